#include "fairgate/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "fairgate/rng.hpp"

namespace fairgate {

namespace {

std::vector<std::string> attack_range(int first, int last) {
  std::vector<std::string> out;
  for (int i = first; i <= last; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "A%02d", i);
    out.emplace_back(buf);
  }
  return out;
}

void check_config(const ScenarioConfig& c) {
  if (c.n_per_cell < 1) throw Error(Errc::InvalidConfig, "n_per_cell must be >= 1");
  if (c.label_dims < 1 || c.label_dims > c.embed_dim) {
    throw Error(Errc::InvalidConfig, "label_dims must be in [1, embed_dim]");
  }
  if (c.leak_mode == LeakMode::Localised && c.label_dims + c.leak_dims > c.embed_dim) {
    throw Error(Errc::InvalidConfig,
                "embed_dim too small for disjoint label and leak dims");
  }
  if (c.leak_mode != LeakMode::None && c.leak_dims < 1) {
    throw Error(Errc::InvalidConfig, "leak_dims must be >= 1");
  }
  if (c.eval_spoof_ratio_f <= 0.0 || c.eval_spoof_ratio_m <= 0.0 ||
      c.train_spoof_ratio_f <= 0.0 || c.train_spoof_ratio_m <= 0.0) {
    throw Error(Errc::InvalidConfig, "spoof ratios must be positive");
  }
  if (c.score_bona.stddev <= 0.0 || c.score_spoof.stddev <= 0.0) {
    throw Error(Errc::InvalidConfig, "score stddev must be positive");
  }
}

long cell_count(const ScenarioConfig& c, Split split, Gender g, Label label) {
  if (label == Label::Bonafide) return c.n_per_cell;
  double ratio = 1.0;
  if (split == Split::Eval) {
    ratio = g == Gender::F ? c.eval_spoof_ratio_f : c.eval_spoof_ratio_m;
  } else if (split == Split::Train) {
    ratio = g == Gender::F ? c.train_spoof_ratio_f : c.train_spoof_ratio_m;
  }
  return std::lround(ratio * c.n_per_cell);
}

}  // namespace

std::pair<Dataset, GroundTruth> generate(const ScenarioConfig& config_in) {
  ScenarioConfig config = config_in;
  if (config.attacks_train.empty()) config.attacks_train = attack_range(1, 8);
  if (config.attacks_dev.empty()) config.attacks_dev = attack_range(1, 8);
  if (config.attacks_eval.empty()) config.attacks_eval = attack_range(1, 8);
  check_config(config);

  const int d = config.embed_dim;

  // Per-dim half-shifts for the gender signal.
  std::vector<double> gender_shift(static_cast<std::size_t>(d), 0.0);
  if (config.leak_mode == LeakMode::Localised) {
    for (int j = 0; j < config.leak_dims; ++j) {
      gender_shift[static_cast<std::size_t>(config.label_dims + j)] =
          0.5 * config.leak_strength;
    }
  } else if (config.leak_mode == LeakMode::Diffuse) {
    const double per_dim = 0.5 * config.leak_strength *
                           std::sqrt(static_cast<double>(config.leak_dims) /
                                     static_cast<double>(d));
    for (int j = 0; j < d; ++j) gender_shift[static_cast<std::size_t>(j)] = per_dim;
  }

  Rng rng(config.seed);
  Dataset ds;

  for (const Split split : {Split::Train, Split::Dev, Split::Eval}) {
    const std::vector<std::string>& attacks =
        split == Split::Train ? config.attacks_train
        : split == Split::Dev ? config.attacks_dev
                              : config.attacks_eval;
    for (const Gender g : {Gender::F, Gender::M}) {
      const double gsign = g == Gender::F ? 1.0 : -1.0;
      for (const Label label : {Label::Bonafide, Label::Spoof}) {
        const long count = cell_count(config, split, g, label);
        const CellGaussian& cell =
            label == Label::Bonafide ? config.score_bona : config.score_spoof;
        const double lsign = label == Label::Bonafide ? 1.0 : -1.0;
        for (long i = 0; i < count; ++i) {
          Trial t;
          char buf[96];
          std::snprintf(buf, sizeof(buf), "%s-%s-%s-%06ld", to_string(split),
                        to_string(g), to_string(label), i);
          t.utt_id = buf;
          t.score = cell.mean + cell.stddev * rng.normal();
          if (g == Gender::F) t.score += config.threshold_shift;
          t.label = label;
          t.gender = g;
          t.split = split;
          if (label == Label::Spoof) {
            t.attack_id = attacks[static_cast<std::size_t>(i) % attacks.size()];
          }

          EmbeddingRecord rec;
          rec.utt_id = t.utt_id;
          rec.gender = g;
          rec.label = label;
          rec.vec.resize(static_cast<std::size_t>(d));
          for (int j = 0; j < d; ++j) {
            double v = rng.normal();
            if (j < config.label_dims) v += lsign * config.label_strength;
            v += gsign * gender_shift[static_cast<std::size_t>(j)];
            rec.vec[static_cast<std::size_t>(j)] = v;
          }

          ds.trials.push_back(std::move(t));
          ds.embeddings.push_back(std::move(rec));
        }
      }
    }
  }

  // Bayes-optimal direction for the label signal under isotropic noise: the
  // label-carrying dims with equal weight.
  LinearHead head;
  head.weights.assign(static_cast<std::size_t>(d), 0.0);
  for (int j = 0; j < config.label_dims; ++j) head.weights[static_cast<std::size_t>(j)] = 1.0;
  head.bias = 0.0;
  ds.head = head;

  GroundTruth gt;
  gt.preset = config.name;
  gt.seed = config.seed;
  gt.config = config;
  if (config.train_spoof_ratio_f != config.train_spoof_ratio_m) {
    gt.injected.push_back("training_imbalance");
  }
  if (config.eval_spoof_ratio_f != config.eval_spoof_ratio_m) {
    gt.injected.push_back("eval_asymmetry");
  }
  {
    std::set<std::string> train_set(config.attacks_train.begin(),
                                    config.attacks_train.end());
    bool overlap = false;
    for (const std::string& a : config.attacks_eval) {
      if (train_set.count(a)) {
        overlap = true;
        break;
      }
    }
    if (!overlap) gt.injected.push_back("attack_overlap");
  }
  if (config.leak_mode != LeakMode::None) gt.injected.push_back("gender_leakage");
  if (config.threshold_shift != 0.0) gt.injected.push_back("threshold_bias");

  return {std::move(ds), std::move(gt)};
}

ScenarioConfig preset(const std::string& name) {
  ScenarioConfig c;
  c.name = name;
  if (name == "balanced-clean") {
    return c;
  }
  if (name == "threshold-biased") {
    c.threshold_shift = 0.5;
    return c;
  }
  if (name == "localised-leak") {
    c.leak_mode = LeakMode::Localised;
    c.leak_dims = 3;
    c.leak_strength = 2.0;
    return c;
  }
  if (name == "diffuse-leak") {
    c.leak_mode = LeakMode::Diffuse;
    c.leak_dims = 3;
    c.leak_strength = 2.0;
    return c;
  }
  if (name == "eval-asymmetric") {
    c.eval_spoof_ratio_f = 4.10;
    c.eval_spoof_ratio_m = 3.71;
    return c;
  }
  if (name == "attack-disjoint") {
    c.attacks_train = attack_range(1, 8);
    c.attacks_dev = attack_range(9, 16);
    c.attacks_eval = attack_range(17, 32);
    return c;
  }
  std::string known;
  for (const std::string& n : preset_names()) {
    if (!known.empty()) known += ", ";
    known += n;
  }
  throw Error(Errc::UnknownPreset, "unknown preset '" + name + "' (known: " + known + ")");
}

std::vector<std::string> preset_names() {
  return {"balanced-clean", "threshold-biased", "localised-leak",
          "diffuse-leak",   "eval-asymmetric",  "attack-disjoint"};
}

}  // namespace fairgate
