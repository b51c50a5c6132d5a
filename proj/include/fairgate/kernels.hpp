#ifndef FAIRGATE_KERNELS_HPP
#define FAIRGATE_KERNELS_HPP

#include <array>
#include <cstddef>
#include <vector>

#include "fairgate/types.hpp"

// Data-parallel kernels used by the metrics, diagnosis and post-processing
// paths. Each kernel exists twice: an OpenMP version under kernels:: and a
// plain-loop reference under serial:: that the tests compare against and the
// benchmark times. Float-accumulating kernels use a fixed chunk split with an
// ordered combine, so results do not depend on the thread count.

namespace fairgate {

// Confusion counts for one gender threshold pair, order:
// tp_f, fp_f, tn_f, fn_f, tp_m, fp_m, tn_m, fn_m.
using ConfusionCounts = std::array<long, 8>;

struct LogisticGrad {
  std::vector<double> dw;  // size D
  double db = 0.0;
  double loss_sum = 0.0;  // unnormalized data loss
};

namespace kernels {

ConfusionCounts confusion_counts(const std::vector<Trial>& trials, double thr_f,
                                 double thr_m);

// FAR/FRR at each candidate threshold. Inputs must be sorted ascending.
// far[i] = fraction of spoof scores >= candidates[i],
// frr[i] = fraction of bonafide scores < candidates[i].
void far_frr_curve(const std::vector<double>& bona_sorted,
                   const std::vector<double>& spoof_sorted,
                   const std::vector<double>& candidates, std::vector<double>& far,
                   std::vector<double>& frr);

std::vector<long> histogram(const std::vector<double>& values, double lo, double hi,
                            int bins);

double chunked_sum(const double* data, std::size_t n);

// score[i] = dot(head.weights, X.row(i)) + head.bias over a row-major N x D
// matrix.
std::vector<double> rescore_matrix(const std::vector<double>& x, std::size_t n,
                                   std::size_t d, const LinearHead& head);

// Mean absolute contribution per dimension for a linear scorer:
// mass[j] = mean_i |w[j] * (x[i][j] - mean[j])|.
std::vector<double> attribution_mass(const std::vector<double>& x, std::size_t n,
                                     std::size_t d, const std::vector<double>& w,
                                     const std::vector<double>& mean);

// Full-batch logistic regression loss/gradient (data term only, unnormalized;
// the caller divides by n and adds its penalty).
LogisticGrad logistic_grad(const std::vector<double>& x, std::size_t n, std::size_t d,
                           const std::vector<float>& y, const std::vector<double>& w,
                           double b);

}  // namespace kernels

namespace serial {

ConfusionCounts confusion_counts(const std::vector<Trial>& trials, double thr_f,
                                 double thr_m);
void far_frr_curve(const std::vector<double>& bona_sorted,
                   const std::vector<double>& spoof_sorted,
                   const std::vector<double>& candidates, std::vector<double>& far,
                   std::vector<double>& frr);
std::vector<long> histogram(const std::vector<double>& values, double lo, double hi,
                            int bins);
double chunked_sum(const double* data, std::size_t n);
std::vector<double> rescore_matrix(const std::vector<double>& x, std::size_t n,
                                   std::size_t d, const LinearHead& head);
std::vector<double> attribution_mass(const std::vector<double>& x, std::size_t n,
                                     std::size_t d, const std::vector<double>& w,
                                     const std::vector<double>& mean);
LogisticGrad logistic_grad(const std::vector<double>& x, std::size_t n, std::size_t d,
                           const std::vector<float>& y, const std::vector<double>& w,
                           double b);

}  // namespace serial

}  // namespace fairgate

#endif  // FAIRGATE_KERNELS_HPP
