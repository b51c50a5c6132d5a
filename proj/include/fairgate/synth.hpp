#ifndef FAIRGATE_SYNTH_HPP
#define FAIRGATE_SYNTH_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fairgate/types.hpp"

namespace fairgate {

enum class LeakMode { None, Localised, Diffuse };

struct CellGaussian {
  double mean = 0.0;
  double stddev = 1.0;
};

// Synthetic scenario with one Gaussian score cell per (gender, label) and an
// embedding model carrying label signal plus an optional gender leak. Scores
// follow the bonafide-high convention.
struct ScenarioConfig {
  std::string name = "custom";
  std::uint64_t seed = 1;
  int n_per_cell = 1000;
  int embed_dim = 16;

  CellGaussian score_bona{2.0, 1.0};
  CellGaussian score_spoof{0.0, 1.0};

  // Added to every female score (bonafide and spoof alike), so per-gender
  // separations stay equal while thresholds diverge.
  double threshold_shift = 0.0;

  // Gender signal in the embeddings. Localised puts a per-dim mean gap of
  // leak_strength between genders on leak_dims dims disjoint from the label
  // dims. Diffuse spreads the same total signal energy over all embed_dim
  // dims (leak_dims acts as the energy reference).
  LeakMode leak_mode = LeakMode::None;
  int leak_dims = 3;
  double leak_strength = 2.0;

  // Label signal lives in the first label_dims dims: bonafide +label_strength,
  // spoof -label_strength per dim.
  int label_dims = 4;
  double label_strength = 1.0;

  // Spoof:bonafide count ratio per gender in the eval split (1.0 = balanced).
  double eval_spoof_ratio_f = 1.0;
  double eval_spoof_ratio_m = 1.0;

  // Spoof count multipliers per gender in the train split, for composition
  // imbalance experiments.
  double train_spoof_ratio_f = 1.0;
  double train_spoof_ratio_m = 1.0;

  // Attack id pools per split; spoof rows cycle through them round-robin.
  std::vector<std::string> attacks_train;
  std::vector<std::string> attacks_dev;
  std::vector<std::string> attacks_eval;
};

// Which diagnosis sources the config injects, plus the knob values, for
// checking a diagnosis run against known ground truth.
struct GroundTruth {
  std::string preset;
  std::uint64_t seed = 0;
  std::vector<std::string> injected;  // check ids, empty for a clean scenario
  ScenarioConfig config;
};

// Deterministic for a given config: identical configs produce bit-identical
// datasets. The returned dataset holds trials for train/dev/eval, one
// embedding per trial, and the Bayes-optimal linear head for the label signal.
std::pair<Dataset, GroundTruth> generate(const ScenarioConfig& config);

ScenarioConfig preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace fairgate

#endif  // FAIRGATE_SYNTH_HPP
