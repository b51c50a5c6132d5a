#ifndef FAIRGATE_DIAGNOSIS_HPP
#define FAIRGATE_DIAGNOSIS_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fairgate/types.hpp"

namespace fairgate {

enum class CheckStatus { Confirmed, Weak, RuledOut };

const char* to_string(CheckStatus s);

struct CheckResult {
  std::string id;     // stable machine id, e.g. "gender_leakage"
  std::string level;  // "data", "model" or "decision"
  std::string name;   // human-readable source name
  std::vector<std::pair<std::string, double>> stats;
  CheckStatus status = CheckStatus::RuledOut;
  std::string statistic_text;  // one-line rendering of the key statistics
  std::string evidence;        // supporting detail, including check failures
};

struct ProbeOptions {
  double learning_rate = 0.1;
  int iterations = 500;
  double l2 = 1e-4;
  double split_fraction = 0.7;  // fraction per gender used for training
};

// Logistic-regression gender probe trained by full-batch gradient descent
// with step halving on loss increase; weights live in standardized feature
// space. losses holds the initial loss followed by one entry per iteration
// and is non-increasing.
struct ProbeModel {
  std::vector<double> weights;
  double bias = 0.0;
  std::vector<double> feat_mean;
  std::vector<double> feat_std;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  long n_train = 0, n_test = 0;
  std::vector<double> losses;
};

ProbeModel train_probe(const std::vector<EmbeddingRecord>& embeddings,
                       std::uint64_t seed, const ProbeOptions& options = {});

// Exact per-dimension attribution for the linear probe:
// phi_j(x) = w_j * (x_j - mean_j) on standardized features,
// mass_j = mean_x |phi_j(x)|.
struct Attribution {
  std::vector<double> mass;  // per dim
  std::vector<int> ranked;   // dims by descending mass, ties toward lower dim
  int top_k = 3;
  double top_share = 0.0;  // mass fraction carried by the top_k dims
  bool localised = false;
};

Attribution attribution_localisation(const ProbeModel& probe,
                                     const std::vector<EmbeddingRecord>& embeddings,
                                     int top_k = 3, double share_threshold = 0.5);

// Status thresholds for the eight checks, each overridable.
struct DiagnosisConfig {
  double p_threshold = 0.05;        // training balance / eval asymmetry
  double separation_confirm = 0.1;  // score separation gap
  double leak_confirm = 0.10;       // probe margin for Confirmed
  double leak_weak = 0.02;          // probe margin for Weak
  int top_k = 3;                    // attribution dims considered
  double localised_share = 0.5;     // top-k share for Localised
  double d_fpr_confirm = 0.02;      // objective bias
  // Threshold gap slack: max(threshold_gap_floor, half the minimal
  // inter-score spacing). The floor keeps sampling noise on continuous
  // scores from confirming; the spacing term handles coarse score grids.
  double threshold_gap_floor = 0.08;
  std::uint64_t seed = 1;
  ProbeOptions probe;
};

CheckResult check_training_balance(const std::vector<Trial>& train_trials,
                                   const DiagnosisConfig& config = {});
CheckResult check_eval_asymmetry(const std::vector<Trial>& eval_trials,
                                 const DiagnosisConfig& config = {});
CheckResult check_attack_overlap(const std::vector<Trial>& train_trials,
                                 const std::vector<Trial>& eval_trials);
CheckResult check_score_separation(const std::vector<Trial>& eval_trials,
                                   const DiagnosisConfig& config = {});
CheckResult check_leakage(const ProbeModel& probe, const DiagnosisConfig& config = {});
CheckResult check_localisation(const Attribution& attribution,
                               CheckStatus leakage_status,
                               const DiagnosisConfig& config = {});
CheckResult check_threshold_bias(const std::vector<Trial>& dev_trials,
                                 const DiagnosisConfig& config = {});
CheckResult check_objective_bias(const std::vector<Trial>& eval_trials,
                                 double pooled_threshold,
                                 const DiagnosisConfig& config = {});

struct Recommendation {
  std::string source;                   // check id the recommendation stems from
  std::vector<std::string> strategies;  // strategy name strings, may be empty
  std::string note;
};

struct DiagnosisReport {
  std::vector<CheckResult> checks;  // always all eight, fixed order
  std::vector<Recommendation> recommendations;
  bool any_confirmed = false;
};

// Runs all eight checks. A check that cannot run (missing split, missing
// embeddings, degenerate table) is reported Weak with the failure in its
// evidence; the report is always produced.
DiagnosisReport diagnose_all(const Dataset& dataset, const DiagnosisConfig& config = {});

}  // namespace fairgate

#endif  // FAIRGATE_DIAGNOSIS_HPP
