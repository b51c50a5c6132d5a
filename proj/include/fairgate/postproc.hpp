#ifndef FAIRGATE_POSTPROC_HPP
#define FAIRGATE_POSTPROC_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fairgate/diagnosis.hpp"
#include "fairgate/metrics.hpp"
#include "fairgate/types.hpp"

namespace fairgate {

// Per-gender operating points from the calibration split.
struct ThresholdPair {
  double thr_f = 0.0, thr_m = 0.0;
  double eer_f = 0.0, eer_m = 0.0;
};

ThresholdPair calibrate_thresholds(const std::vector<Trial>& dev_trials);

// How selected embedding dimensions are edited. Zero clears them; Align sets
// them to a frozen constant (the midpoint of the two gender means on the
// calibration split), removing both the group difference and the variance;
// AlignShift moves each gender's values by a frozen per-gender offset so only
// the between-group mean difference goes.
enum class SuppressMode { Zero, Align, AlignShift };

const char* to_string(SuppressMode mode);

struct SuppressionSet {
  std::vector<int> dims;  // selected dimensions, attribution rank order
  SuppressMode mode = SuppressMode::Zero;
  std::vector<double> target;   // Align: constant per selected dim
  std::vector<double> delta_f;  // AlignShift: offset per selected dim
  std::vector<double> delta_m;
};

// Selects the k strongest gender-attribution dimensions of the probe and
// freezes the alignment statistics from the given records. k == 0 yields an
// empty edit; k < 0 or k > dimension is an error.
SuppressionSet build_suppression(const ProbeModel& probe,
                                 const std::vector<EmbeddingRecord>& records,
                                 int k, SuppressMode mode);

std::vector<EmbeddingRecord> apply_suppression(
    const std::vector<EmbeddingRecord>& embeddings, const SuppressionSet& set);

// Overwrites every trial score with head(embedding), matching by utterance id.
void rescore(Dataset& dataset);

struct PipelineOptions {
  int k = 3;                 // suppression width for sgfs/gnea
  std::uint64_t seed = 1;    // probe seed
  SuppressMode gnea_mode = SuppressMode::Align;
  EopVariant eop = EopVariant::FalsePositive;
  ProbeOptions probe;
};

struct PipelineResult {
  std::string strategy;
  FairnessReport report;  // measured on the eval split
  double threshold_f = 0.0, threshold_m = 0.0;
  bool per_gender_thresholds = false;
  std::vector<int> suppressed_dims;
  std::string notes;
};

// Runs one mitigation strategy end to end: optional embedding edit and
// rescore, threshold calibration on the dev split (post-edit), fairness
// report on the eval split. Strategy names: baseline, tc, sgfs, gnea,
// s1, s2, s3, eafr, each optionally suffixed "+tc". The s* names score
// like baseline (their effect lives in the trained model that produced the
// dataset); the tag is kept for reporting.
PipelineResult run_pipeline(const Dataset& dataset, const std::string& strategy,
                            const PipelineOptions& options = {});

const std::vector<std::string>& strategy_names();

}  // namespace fairgate

#endif  // FAIRGATE_POSTPROC_HPP
