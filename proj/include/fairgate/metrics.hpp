#ifndef FAIRGATE_METRICS_HPP
#define FAIRGATE_METRICS_HPP

#include <vector>

#include "fairgate/kernels.hpp"
#include "fairgate/types.hpp"

namespace fairgate {

struct GroupConfusion {
  long tp_f = 0, fp_f = 0, tn_f = 0, fn_f = 0;
  long tp_m = 0, fp_m = 0, tn_m = 0, fn_m = 0;
};

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

// Which conditioning the equal-opportunity difference uses. FalsePositive is
// the default: the rate on bonafide (Y=0) trials, FP/(FP+TN). TruePositive
// conditions on spoof trials instead, TP/(TP+FN).
enum class EopVariant { FalsePositive, TruePositive };

// All six gaps are signed female-minus-male fractions in [-1, 1] (ted may be
// unbounded). Degenerate denominators set a flag and leave the field at the
// IEEE result (inf/NaN) instead of crashing.
struct FairnessReport {
  double eer_f = 0.0, eer_m = 0.0;
  double eer_gap = 0.0;
  double d_fpr = 0.0;
  double spd = 0.0;
  double eop = 0.0;
  double ppd = 0.0;
  double ted = 0.0;
  double threshold_f = 0.0, threshold_m = 0.0;
  GroupConfusion confusion;
  std::vector<std::string> flags;
};

struct CellSummary {
  long n = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  std::vector<long> histogram;
};

struct ScoreSummary {
  double lo = 0.0, hi = 0.0;  // shared bin range across all four cells
  int bins = 0;
  CellSummary cell[2][2];  // [gender][label]
};

// Confusion counts per gender at the given thresholds. Positive class is
// spoof: a trial is predicted spoof iff score < its gender's threshold.
GroupConfusion confusion(const std::vector<Trial>& trials, double thr_f, double thr_m);

// Equal error rate by exhaustive threshold sweep. Candidates are the
// midpoints of the sorted pooled unique scores plus one sentinel below the
// minimum and one above the maximum (standing in for -inf/+inf while keeping
// the returned threshold finite). Returns (FAR+FRR)/2 at the candidate
// minimizing |FAR-FRR|; ties break toward the smallest threshold.
EerResult eer(const std::vector<double>& bonafide, const std::vector<double>& spoof);

FairnessReport fairness_report(const std::vector<Trial>& trials, double thr_f,
                               double thr_m, EopVariant eop = EopVariant::FalsePositive);

// Per-(gender, label) score moments and histograms on shared bin edges.
ScoreSummary score_summary(const std::vector<Trial>& trials, int bins = 40);

// Convenience selectors.
std::vector<double> scores_of(const std::vector<Trial>& trials, Label label);
std::vector<double> scores_of(const std::vector<Trial>& trials, Label label,
                              Gender gender);
std::vector<Trial> trials_of_split(const std::vector<Trial>& trials, Split split);

}  // namespace fairgate

#endif  // FAIRGATE_METRICS_HPP
