#include "fairgate/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fairgate {

namespace {

void require_both_labels(const char* gender, long n_bona, long n_spoof) {
  if (n_bona + n_spoof == 0) {
    throw Error(Errc::EmptyGroup, std::string("no trials for gender ") + gender);
  }
  if (n_bona == 0 || n_spoof == 0) {
    throw Error(Errc::MissingLabelInGroup,
                std::string("gender ") + gender + " is missing " +
                    (n_bona == 0 ? "bonafide" : "spoof") + " trials");
  }
}

}  // namespace

std::vector<double> scores_of(const std::vector<Trial>& trials, Label label) {
  std::vector<double> out;
  for (const Trial& t : trials) {
    if (t.label == label) out.push_back(t.score);
  }
  return out;
}

std::vector<double> scores_of(const std::vector<Trial>& trials, Label label,
                              Gender gender) {
  std::vector<double> out;
  for (const Trial& t : trials) {
    if (t.label == label && t.gender == gender) out.push_back(t.score);
  }
  return out;
}

std::vector<Trial> trials_of_split(const std::vector<Trial>& trials, Split split) {
  std::vector<Trial> out;
  for (const Trial& t : trials) {
    if (t.split == split) out.push_back(t);
  }
  return out;
}

GroupConfusion confusion(const std::vector<Trial>& trials, double thr_f, double thr_m) {
  long n_f = 0, n_m = 0;
  for (const Trial& t : trials) {
    (t.gender == Gender::F ? n_f : n_m)++;
  }
  if (n_f == 0) throw Error(Errc::EmptyGroup, "no trials for gender F");
  if (n_m == 0) throw Error(Errc::EmptyGroup, "no trials for gender M");

  const ConfusionCounts c = kernels::confusion_counts(trials, thr_f, thr_m);
  GroupConfusion g;
  g.tp_f = c[0];
  g.fp_f = c[1];
  g.tn_f = c[2];
  g.fn_f = c[3];
  g.tp_m = c[4];
  g.fp_m = c[5];
  g.tn_m = c[6];
  g.fn_m = c[7];
  return g;
}

EerResult eer(const std::vector<double>& bonafide, const std::vector<double>& spoof) {
  if (bonafide.empty()) throw Error(Errc::EmptyClass, "no bonafide scores");
  if (spoof.empty()) throw Error(Errc::EmptyClass, "no spoof scores");

  std::vector<double> bona_sorted = bonafide;
  std::vector<double> spoof_sorted = spoof;
  std::sort(bona_sorted.begin(), bona_sorted.end());
  std::sort(spoof_sorted.begin(), spoof_sorted.end());

  std::vector<double> pooled;
  pooled.reserve(bona_sorted.size() + spoof_sorted.size());
  std::merge(bona_sorted.begin(), bona_sorted.end(), spoof_sorted.begin(),
             spoof_sorted.end(), std::back_inserter(pooled));
  pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());

  std::vector<double> candidates;
  candidates.reserve(pooled.size() + 1);
  candidates.push_back(pooled.front() - 1.0);
  for (std::size_t i = 0; i + 1 < pooled.size(); ++i) {
    candidates.push_back(0.5 * (pooled[i] + pooled[i + 1]));
  }
  candidates.push_back(pooled.back() + 1.0);

  std::vector<double> far, frr;
  kernels::far_frr_curve(bona_sorted, spoof_sorted, candidates, far, frr);

  std::size_t best = 0;
  double best_diff = std::fabs(far[0] - frr[0]);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double diff = std::fabs(far[i] - frr[i]);
    if (diff < best_diff) {
      best_diff = diff;
      best = i;
    }
  }

  EerResult res;
  res.eer = 0.5 * (far[best] + frr[best]);
  res.threshold = candidates[best];
  return res;
}

FairnessReport fairness_report(const std::vector<Trial>& trials, double thr_f,
                               double thr_m, EopVariant eop_variant) {
  FairnessReport rep;
  rep.threshold_f = thr_f;
  rep.threshold_m = thr_m;
  rep.confusion = confusion(trials, thr_f, thr_m);
  const GroupConfusion& c = rep.confusion;

  require_both_labels("F", c.fp_f + c.tn_f, c.tp_f + c.fn_f);
  require_both_labels("M", c.fp_m + c.tn_m, c.tp_m + c.fn_m);

  const auto ratio = [](long num, long den) {
    return static_cast<double>(num) / static_cast<double>(den);
  };

  rep.eer_f = eer(scores_of(trials, Label::Bonafide, Gender::F),
                  scores_of(trials, Label::Spoof, Gender::F)).eer;
  rep.eer_m = eer(scores_of(trials, Label::Bonafide, Gender::M),
                  scores_of(trials, Label::Spoof, Gender::M)).eer;
  rep.eer_gap = rep.eer_f - rep.eer_m;

  const double fpr_f = ratio(c.fp_f, c.fp_f + c.tn_f);
  const double fpr_m = ratio(c.fp_m, c.fp_m + c.tn_m);
  rep.d_fpr = fpr_f - fpr_m;

  const long n_f = c.tp_f + c.fp_f + c.tn_f + c.fn_f;
  const long n_m = c.tp_m + c.fp_m + c.tn_m + c.fn_m;
  rep.spd = ratio(c.tp_f + c.fp_f, n_f) - ratio(c.tp_m + c.fp_m, n_m);

  if (eop_variant == EopVariant::FalsePositive) {
    rep.eop = fpr_f - fpr_m;
  } else {
    rep.eop = ratio(c.tp_f, c.tp_f + c.fn_f) - ratio(c.tp_m, c.tp_m + c.fn_m);
  }

  double ppv_f = 0.0, ppv_m = 0.0;
  if (c.tp_f + c.fp_f == 0) {
    rep.flags.push_back("ppv_f_undefined");
    ppv_f = std::numeric_limits<double>::quiet_NaN();
  } else {
    ppv_f = ratio(c.tp_f, c.tp_f + c.fp_f);
  }
  if (c.tp_m + c.fp_m == 0) {
    rep.flags.push_back("ppv_m_undefined");
    ppv_m = std::numeric_limits<double>::quiet_NaN();
  } else {
    ppv_m = ratio(c.tp_m, c.tp_m + c.fp_m);
  }
  rep.ppd = ppv_f - ppv_m;

  double te_f = 0.0, te_m = 0.0;
  if (c.fn_f == 0) {
    rep.flags.push_back("te_f_undefined");
    te_f = c.fp_f > 0 ? std::numeric_limits<double>::infinity()
                      : std::numeric_limits<double>::quiet_NaN();
  } else {
    te_f = ratio(c.fp_f, c.fn_f);
  }
  if (c.fn_m == 0) {
    rep.flags.push_back("te_m_undefined");
    te_m = c.fp_m > 0 ? std::numeric_limits<double>::infinity()
                      : std::numeric_limits<double>::quiet_NaN();
  } else {
    te_m = ratio(c.fp_m, c.fn_m);
  }
  rep.ted = te_f - te_m;

  return rep;
}

ScoreSummary score_summary(const std::vector<Trial>& trials, int bins) {
  if (trials.empty()) throw Error(Errc::EmptyClass, "no trials");
  if (bins < 1) throw Error(Errc::InvalidConfig, "bins must be >= 1");

  ScoreSummary sum;
  sum.bins = bins;
  double lo = trials.front().score, hi = trials.front().score;
  for (const Trial& t : trials) {
    lo = std::min(lo, t.score);
    hi = std::max(hi, t.score);
  }
  // Degenerate range (all scores equal): widen so every score lands in one bin.
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  sum.lo = lo;
  sum.hi = hi;

  for (int g = 0; g < 2; ++g) {
    for (int l = 0; l < 2; ++l) {
      std::vector<double> scores;
      for (const Trial& t : trials) {
        if (static_cast<int>(t.gender) == g && static_cast<int>(t.label) == l) {
          scores.push_back(t.score);
        }
      }
      CellSummary& cell = sum.cell[g][l];
      cell.n = static_cast<long>(scores.size());
      if (scores.empty()) {
        // Moments of an empty cell are undefined, not zero.
        cell.mean = std::numeric_limits<double>::quiet_NaN();
        cell.stddev = std::numeric_limits<double>::quiet_NaN();
        cell.histogram.assign(static_cast<std::size_t>(bins), 0);
        continue;
      }
      const double mean = kernels::chunked_sum(scores.data(), scores.size()) /
                          static_cast<double>(scores.size());
      std::vector<double> sq(scores.size());
      for (std::size_t i = 0; i < scores.size(); ++i) {
        const double d = scores[i] - mean;
        sq[i] = d * d;
      }
      cell.mean = mean;
      cell.stddev = std::sqrt(kernels::chunked_sum(sq.data(), sq.size()) /
                              static_cast<double>(sq.size()));
      cell.histogram = kernels::histogram(scores, lo, hi, bins);
    }
  }
  return sum;
}

}  // namespace fairgate
