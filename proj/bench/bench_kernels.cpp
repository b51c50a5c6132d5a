// Times each OpenMP kernel against its serial reference and reports the
// speedup. Also cross-checks that both versions agree on the benchmark data,
// so a silently diverging kernel shows up here as well as in the tests.
//
// Usage: bench_kernels [n]   (n = trial/row count, default 2'000'000)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fairgate/kernels.hpp"
#include "fairgate/rng.hpp"
#include "fairgate/types.hpp"

namespace {

using namespace fairgate;

constexpr int kReps = 5;

// Median-of-kReps wall time in milliseconds.
template <typename F>
double time_ms(F&& body) {
  std::vector<double> samples;
  samples.reserve(kReps);
  for (int r = 0; r < kReps; ++r) {
    const auto start = std::chrono::steady_clock::now();
    body();
    const auto stop = std::chrono::steady_clock::now();
    samples.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
  }
  std::sort(samples.begin(), samples.end());
  return samples[samples.size() / 2];
}

struct Row {
  std::string name;
  double serial_ms;
  double parallel_ms;
  bool agree;
};

void print_row(const Row& row) {
  std::printf("%-18s %10.2f %10.2f %9.2fx  %s\n", row.name.c_str(),
              row.serial_ms, row.parallel_ms, row.serial_ms / row.parallel_ms,
              row.agree ? "ok" : "MISMATCH");
}

bool close(double a, double b) {
  return std::fabs(a - b) <= 1e-9 * std::max({std::fabs(a), std::fabs(b), 1.0});
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 2000000;
  const std::size_t d = 16;
  const int bins = 40;

  Rng rng(7);
  std::vector<Trial> trials(n);
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    Trial& t = trials[i];
    t.utt_id = "b" + std::to_string(i);
    t.gender = rng.uniform() < 0.5 ? Gender::F : Gender::M;
    t.label = rng.uniform() < 0.5 ? Label::Bonafide : Label::Spoof;
    t.score = rng.normal() + (t.label == Label::Bonafide ? 2.0 : 0.0);
    t.split = Split::Eval;
    scores[i] = t.score;
  }
  std::vector<double> bona, spoof;
  for (const Trial& t : trials) {
    (t.label == Label::Bonafide ? bona : spoof).push_back(t.score);
  }
  std::sort(bona.begin(), bona.end());
  std::sort(spoof.begin(), spoof.end());
  std::vector<double> candidates;
  for (double c = -4.0; c <= 6.0; c += 0.01) candidates.push_back(c);

  std::vector<double> x(n * d);
  for (double& v : x) v = rng.normal();
  std::vector<float> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = i % 2 ? 1.0f : 0.0f;
  std::vector<double> w(d), mean(d);
  for (std::size_t j = 0; j < d; ++j) {
    w[j] = rng.normal();
    mean[j] = rng.normal() * 0.1;
  }
  LinearHead head;
  head.weights = w;
  head.bias = 0.25;

#ifdef _OPENMP
  std::printf("n = %zu, d = %zu, threads = %d, median of %d reps\n\n", n, d,
              omp_get_max_threads(), kReps);
#else
  std::printf("n = %zu, d = %zu, OpenMP disabled, median of %d reps\n\n", n, d,
              kReps);
#endif
  std::printf("%-18s %10s %10s %10s\n", "kernel", "serial ms", "openmp ms",
              "speedup");

  {
    ConfusionCounts ser{}, par{};
    const Row row{
        "confusion_counts",
        time_ms([&] { ser = serial::confusion_counts(trials, 1.0, 1.1); }),
        time_ms([&] { par = kernels::confusion_counts(trials, 1.0, 1.1); }),
        ser == par};
    print_row(row);
  }
  {
    std::vector<double> far_s, frr_s, far_p, frr_p;
    const Row row{
        "far_frr_curve",
        time_ms([&] { serial::far_frr_curve(bona, spoof, candidates, far_s, frr_s); }),
        time_ms([&] { kernels::far_frr_curve(bona, spoof, candidates, far_p, frr_p); }),
        far_s == far_p && frr_s == frr_p};
    print_row(row);
  }
  {
    std::vector<long> ser, par;
    const Row row{"histogram",
                  time_ms([&] { ser = serial::histogram(scores, -4.0, 6.0, bins); }),
                  time_ms([&] { par = kernels::histogram(scores, -4.0, 6.0, bins); }),
                  ser == par};
    print_row(row);
  }
  {
    // Chunked accumulation reorders the additions, so agreement is to
    // rounding, not bitwise.
    double ser = 0.0, par = 0.0;
    const Row row{"chunked_sum",
                  time_ms([&] { ser = serial::chunked_sum(x.data(), x.size()); }),
                  time_ms([&] { par = kernels::chunked_sum(x.data(), x.size()); }),
                  close(ser, par)};
    print_row(row);
  }
  {
    std::vector<double> ser, par;
    const Row row{"rescore_matrix",
                  time_ms([&] { ser = serial::rescore_matrix(x, n, d, head); }),
                  time_ms([&] { par = kernels::rescore_matrix(x, n, d, head); }),
                  ser == par};
    print_row(row);
  }
  {
    std::vector<double> ser, par;
    const Row row{"attribution_mass",
                  time_ms([&] { ser = serial::attribution_mass(x, n, d, w, mean); }),
                  time_ms([&] { par = kernels::attribution_mass(x, n, d, w, mean); }),
                  ser == par};
    print_row(row);
  }
  {
    LogisticGrad ser, par;
    const double serial_ms =
        time_ms([&] { ser = serial::logistic_grad(x, n, d, y, w, 0.25); });
    const double parallel_ms =
        time_ms([&] { par = kernels::logistic_grad(x, n, d, y, w, 0.25); });
    bool agree = close(ser.db, par.db) && close(ser.loss_sum, par.loss_sum);
    for (std::size_t j = 0; j < d; ++j) agree = agree && close(ser.dw[j], par.dw[j]);
    print_row({"logistic_grad", serial_ms, parallel_ms, agree});
  }
  return 0;
}
