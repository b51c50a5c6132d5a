#pragma once

// Shared fixtures and independent reference implementations used by both the
// unit tests and the acceptance harness.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fairgate/metrics.hpp"
#include "fairgate/rng.hpp"
#include "fairgate/trainer.hpp"
#include "fairgate/types.hpp"

namespace testutil {

inline fairgate::Trial make_trial(std::string id, double score, fairgate::Label label,
                                  fairgate::Gender gender,
                                  fairgate::Split split = fairgate::Split::Eval) {
  fairgate::Trial t;
  t.utt_id = std::move(id);
  t.score = score;
  t.label = label;
  t.gender = gender;
  t.split = split;
  if (label == fairgate::Label::Spoof) t.attack_id = "A01";
  return t;
}

// Fresh scratch directory under the system temp root; wiped on entry so each
// test starts from a clean slate.
inline std::string scratch_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() / ("fairgate_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

// Runs fn and reports which error code it threw, if any.
template <typename Fn>
inline std::optional<fairgate::Errc> error_code_of(Fn&& fn) {
  try {
    fn();
    return std::nullopt;
  } catch (const fairgate::Error& e) {
    return e.code;
  }
}

// Naive recount of the equal-error-rate sweep: the same candidate grid as the
// production path, but FAR/FRR recomputed per candidate by direct counting.
// Ties resolve to the smallest threshold because candidates ascend and only a
// strictly smaller objective replaces the incumbent.
inline fairgate::EerResult eer_exhaustive(std::vector<double> bona, std::vector<double> spoof) {
  std::vector<double> pooled = bona;
  pooled.insert(pooled.end(), spoof.begin(), spoof.end());
  std::sort(pooled.begin(), pooled.end());
  pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());

  std::vector<double> candidates;
  candidates.push_back(pooled.front() - 1.0);
  for (std::size_t i = 0; i + 1 < pooled.size(); ++i)
    candidates.push_back(0.5 * (pooled[i] + pooled[i + 1]));
  candidates.push_back(pooled.back() + 1.0);

  double best = std::numeric_limits<double>::infinity();
  fairgate::EerResult res{0.0, 0.0};
  for (const double thr : candidates) {
    long accepted_spoof = 0;
    long rejected_bona = 0;
    for (const double s : spoof)
      if (s >= thr) ++accepted_spoof;
    for (const double s : bona)
      if (s < thr) ++rejected_bona;
    const double far = static_cast<double>(accepted_spoof) / static_cast<double>(spoof.size());
    const double frr = static_cast<double>(rejected_bona) / static_cast<double>(bona.size());
    if (std::fabs(far - frr) < best) {
      best = std::fabs(far - frr);
      res.eer = 0.5 * (far + frr);
      res.threshold = thr;
    }
  }
  return res;
}

namespace detail {

inline double chi2_pdf(double t, int df) {
  return std::exp((0.5 * df - 1.0) * std::log(t) - 0.5 * t - 0.5 * df * std::log(2.0) -
                  std::lgamma(0.5 * df));
}

// Adaptive Simpson on [a, b]; fm is the density at the midpoint, whole the
// Simpson estimate for the full interval.
inline double simpson_refine(double a, double b, double fa, double fb, double fm, double whole,
                             double eps, int depth, int df) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = chi2_pdf(lm, df);
  const double frm = chi2_pdf(rm, df);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * eps)
    return left + right + (left + right - whole) / 15.0;
  return simpson_refine(a, m, fa, fm, flm, left, 0.5 * eps, depth - 1, df) +
         simpson_refine(m, b, fm, fb, frm, right, 0.5 * eps, depth - 1, df);
}

}  // namespace detail

// Upper-tail chi-squared probability by numerical integration of the density.
// Entirely independent of the incomplete-gamma evaluation under test.
inline double chi2_sf_integral(double x, int df) {
  if (x <= 0.0) return 1.0;
  const double upper = 400.0;  // density beyond this is below 1e-80 for df <= 3
  if (x >= upper) return 0.0;
  const double m = 0.5 * (x + upper);
  const double fa = detail::chi2_pdf(x, df);
  const double fb = detail::chi2_pdf(upper, df);
  const double fm = detail::chi2_pdf(m, df);
  const double whole = (upper - x) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_refine(x, upper, fa, fb, fm, whole, 1e-12, 48, df);
}

// Random mini-batch with all four (gender, label) cells populated; n must be a
// multiple of 4.
inline fairgate::Batch random_batch(std::size_t n, std::size_t d, std::uint64_t seed) {
  fairgate::Rng rng(seed);
  fairgate::Batch b;
  b.n = n;
  b.d = d;
  b.x.resize(n * d);
  b.spoof.resize(n);
  b.female.resize(n);
  for (auto& v : b.x) v = rng.normal();
  for (std::size_t i = 0; i < n; ++i) {
    b.spoof[i] = (i % 2 == 0) ? 1.0f : 0.0f;
    b.female[i] = (i % 4 < 2) ? 1.0f : 0.0f;
  }
  return b;
}

}  // namespace testutil
