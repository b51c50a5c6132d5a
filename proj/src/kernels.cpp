#include "fairgate/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fairgate {

namespace {

constexpr std::size_t kChunk = 4096;

inline double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Stable binary cross-entropy from a logit: softplus(z) - y*z.
inline double bce_from_logit(double z, double y) {
  return std::max(z, 0.0) - y * z + std::log1p(std::exp(-std::fabs(z)));
}

inline int bin_index(double v, double lo, double width, int bins) {
  int idx = static_cast<int>((v - lo) / width);
  if (idx < 0) idx = 0;
  if (idx >= bins) idx = bins - 1;
  return idx;
}

// Per-trial confusion tally shared by both implementations. Predicted spoof
// iff score < the trial's gender threshold; positive class is spoof.
inline void tally(const Trial& t, double thr_f, double thr_m, long* c) {
  const double thr = t.gender == Gender::F ? thr_f : thr_m;
  const bool pred_spoof = t.score < thr;
  const int base = t.gender == Gender::F ? 0 : 4;
  if (t.label == Label::Spoof) {
    ++c[base + (pred_spoof ? 0 : 3)];  // tp : fn
  } else {
    ++c[base + (pred_spoof ? 1 : 2)];  // fp : tn
  }
}

}  // namespace

namespace kernels {

ConfusionCounts confusion_counts(const std::vector<Trial>& trials, double thr_f,
                                 double thr_m) {
  long c0 = 0, c1 = 0, c2 = 0, c3 = 0, c4 = 0, c5 = 0, c6 = 0, c7 = 0;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(trials.size());
#pragma omp parallel for reduction(+ : c0, c1, c2, c3, c4, c5, c6, c7) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    long local[8] = {};
    tally(trials[static_cast<std::size_t>(i)], thr_f, thr_m, local);
    c0 += local[0];
    c1 += local[1];
    c2 += local[2];
    c3 += local[3];
    c4 += local[4];
    c5 += local[5];
    c6 += local[6];
    c7 += local[7];
  }
  return {c0, c1, c2, c3, c4, c5, c6, c7};
}

void far_frr_curve(const std::vector<double>& bona_sorted,
                   const std::vector<double>& spoof_sorted,
                   const std::vector<double>& candidates, std::vector<double>& far,
                   std::vector<double>& frr) {
  const std::ptrdiff_t c = static_cast<std::ptrdiff_t>(candidates.size());
  far.resize(candidates.size());
  frr.resize(candidates.size());
  const double nb = static_cast<double>(bona_sorted.size());
  const double ns = static_cast<double>(spoof_sorted.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < c; ++i) {
    const double thr = candidates[static_cast<std::size_t>(i)];
    const auto below_s =
        std::lower_bound(spoof_sorted.begin(), spoof_sorted.end(), thr) -
        spoof_sorted.begin();
    const auto below_b =
        std::lower_bound(bona_sorted.begin(), bona_sorted.end(), thr) -
        bona_sorted.begin();
    far[static_cast<std::size_t>(i)] =
        (ns - static_cast<double>(below_s)) / ns;
    frr[static_cast<std::size_t>(i)] = static_cast<double>(below_b) / nb;
  }
}

std::vector<long> histogram(const std::vector<double>& values, double lo, double hi,
                            int bins) {
  std::vector<long> counts(static_cast<std::size_t>(bins), 0);
  const double width = (hi - lo) / bins;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(values.size());
#pragma omp parallel
  {
    std::vector<long> local(static_cast<std::size_t>(bins), 0);
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      ++local[static_cast<std::size_t>(
          bin_index(values[static_cast<std::size_t>(i)], lo, width, bins))];
    }
#pragma omp critical
    for (int b = 0; b < bins; ++b) counts[static_cast<std::size_t>(b)] += local[static_cast<std::size_t>(b)];
  }
  return counts;
}

double chunked_sum(const double* data, std::size_t n) {
  const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
  if (n_chunks == 0) return 0.0;
  std::vector<double> partial(n_chunks, 0.0);
  const std::ptrdiff_t pc = static_cast<std::ptrdiff_t>(n_chunks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < pc; ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * kChunk;
    const std::size_t end = std::min(begin + kChunk, n);
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += data[i];
    partial[static_cast<std::size_t>(c)] = s;
  }
  double total = 0.0;
  for (const double p : partial) total += p;
  return total;
}

std::vector<double> rescore_matrix(const std::vector<double>& x, std::size_t n,
                                   std::size_t d, const LinearHead& head) {
  if (head.weights.size() != d) {
    throw Error(Errc::DimensionMismatch, "head dimension " +
                                             std::to_string(head.weights.size()) +
                                             " does not match embedding dimension " +
                                             std::to_string(d));
  }
  std::vector<double> scores(n, 0.0);
  const std::ptrdiff_t pn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < pn; ++i) {
    const double* row = x.data() + static_cast<std::size_t>(i) * d;
    double s = head.bias;
    for (std::size_t j = 0; j < d; ++j) s += head.weights[j] * row[j];
    scores[static_cast<std::size_t>(i)] = s;
  }
  return scores;
}

std::vector<double> attribution_mass(const std::vector<double>& x, std::size_t n,
                                     std::size_t d, const std::vector<double>& w,
                                     const std::vector<double>& mean) {
  std::vector<double> mass(d, 0.0);
  const std::ptrdiff_t pd = static_cast<std::ptrdiff_t>(d);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < pd; ++j) {
    const std::size_t col = static_cast<std::size_t>(j);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s += std::fabs(w[col] * (x[i * d + col] - mean[col]));
    }
    mass[col] = s / static_cast<double>(n);
  }
  return mass;
}

LogisticGrad logistic_grad(const std::vector<double>& x, std::size_t n, std::size_t d,
                           const std::vector<float>& y, const std::vector<double>& w,
                           double b) {
  const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
  std::vector<std::vector<double>> pw(n_chunks);
  std::vector<double> pb(n_chunks, 0.0);
  std::vector<double> pl(n_chunks, 0.0);
  const std::ptrdiff_t pc = static_cast<std::ptrdiff_t>(n_chunks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < pc; ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * kChunk;
    const std::size_t end = std::min(begin + kChunk, n);
    std::vector<double> gw(d, 0.0);
    double gb = 0.0;
    double loss = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double* row = x.data() + i * d;
      double z = b;
      for (std::size_t j = 0; j < d; ++j) z += w[j] * row[j];
      const double target = static_cast<double>(y[i]);
      loss += bce_from_logit(z, target);
      const double delta = sigmoid(z) - target;
      for (std::size_t j = 0; j < d; ++j) gw[j] += delta * row[j];
      gb += delta;
    }
    pw[static_cast<std::size_t>(c)] = std::move(gw);
    pb[static_cast<std::size_t>(c)] = gb;
    pl[static_cast<std::size_t>(c)] = loss;
  }
  LogisticGrad out;
  out.dw.assign(d, 0.0);
  for (std::size_t c = 0; c < n_chunks; ++c) {
    for (std::size_t j = 0; j < d; ++j) out.dw[j] += pw[c][j];
    out.db += pb[c];
    out.loss_sum += pl[c];
  }
  return out;
}

}  // namespace kernels

namespace serial {

ConfusionCounts confusion_counts(const std::vector<Trial>& trials, double thr_f,
                                 double thr_m) {
  long c[8] = {};
  for (const Trial& t : trials) tally(t, thr_f, thr_m, c);
  return {c[0], c[1], c[2], c[3], c[4], c[5], c[6], c[7]};
}

void far_frr_curve(const std::vector<double>& bona_sorted,
                   const std::vector<double>& spoof_sorted,
                   const std::vector<double>& candidates, std::vector<double>& far,
                   std::vector<double>& frr) {
  far.resize(candidates.size());
  frr.resize(candidates.size());
  const double nb = static_cast<double>(bona_sorted.size());
  const double ns = static_cast<double>(spoof_sorted.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double thr = candidates[i];
    long accepted_spoof = 0;
    for (const double s : spoof_sorted) {
      if (s >= thr) ++accepted_spoof;
    }
    long rejected_bona = 0;
    for (const double s : bona_sorted) {
      if (s < thr) ++rejected_bona;
    }
    far[i] = static_cast<double>(accepted_spoof) / ns;
    frr[i] = static_cast<double>(rejected_bona) / nb;
  }
}

std::vector<long> histogram(const std::vector<double>& values, double lo, double hi,
                            int bins) {
  std::vector<long> counts(static_cast<std::size_t>(bins), 0);
  const double width = (hi - lo) / bins;
  for (const double v : values) {
    ++counts[static_cast<std::size_t>(bin_index(v, lo, width, bins))];
  }
  return counts;
}

double chunked_sum(const double* data, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += data[i];
  return s;
}

std::vector<double> rescore_matrix(const std::vector<double>& x, std::size_t n,
                                   std::size_t d, const LinearHead& head) {
  if (head.weights.size() != d) {
    throw Error(Errc::DimensionMismatch, "head dimension " +
                                             std::to_string(head.weights.size()) +
                                             " does not match embedding dimension " +
                                             std::to_string(d));
  }
  std::vector<double> scores(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = head.bias;
    for (std::size_t j = 0; j < d; ++j) s += head.weights[j] * x[i * d + j];
    scores[i] = s;
  }
  return scores;
}

std::vector<double> attribution_mass(const std::vector<double>& x, std::size_t n,
                                     std::size_t d, const std::vector<double>& w,
                                     const std::vector<double>& mean) {
  std::vector<double> mass(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s += std::fabs(w[j] * (x[i * d + j] - mean[j]));
    }
    mass[j] = s / static_cast<double>(n);
  }
  return mass;
}

LogisticGrad logistic_grad(const std::vector<double>& x, std::size_t n, std::size_t d,
                           const std::vector<float>& y, const std::vector<double>& w,
                           double b) {
  LogisticGrad out;
  out.dw.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = x.data() + i * d;
    double z = b;
    for (std::size_t j = 0; j < d; ++j) z += w[j] * row[j];
    const double target = static_cast<double>(y[i]);
    out.loss_sum += bce_from_logit(z, target);
    const double delta = sigmoid(z) - target;
    for (std::size_t j = 0; j < d; ++j) out.dw[j] += delta * row[j];
    out.db += delta;
  }
  return out;
}

}  // namespace serial

}  // namespace fairgate
