#include "fairgate/postproc.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "fairgate/kernels.hpp"

namespace fairgate {

namespace {

std::unordered_map<std::string, Split> split_by_utt(const std::vector<Trial>& trials) {
  std::unordered_map<std::string, Split> map;
  map.reserve(trials.size());
  for (const Trial& t : trials) map.emplace(t.utt_id, t.split);
  return map;
}

std::vector<EmbeddingRecord> embeddings_of_split(const Dataset& dataset, Split split) {
  const auto splits = split_by_utt(dataset.trials);
  std::vector<EmbeddingRecord> out;
  for (const EmbeddingRecord& rec : dataset.embeddings) {
    const auto it = splits.find(rec.utt_id);
    if (it != splits.end() && it->second == split) out.push_back(rec);
  }
  return out;
}

struct ParsedStrategy {
  std::string base;
  bool tc = false;
  bool suppression = false;
  SuppressMode mode = SuppressMode::Zero;
};

ParsedStrategy parse_strategy(const std::string& name, const PipelineOptions& options) {
  ParsedStrategy p;
  std::string base = name;
  const std::string suffix = "+tc";
  if (base.size() > suffix.size() &&
      base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0) {
    p.tc = true;
    base.resize(base.size() - suffix.size());
  }
  p.base = base;
  if (base == "tc") {
    p.tc = true;
  } else if (base == "sgfs") {
    p.suppression = true;
    p.mode = SuppressMode::Zero;
  } else if (base == "gnea") {
    p.suppression = true;
    p.mode = options.gnea_mode;
  } else if (base != "baseline" && base != "s1" && base != "s2" && base != "s3" &&
             base != "eafr") {
    throw Error(Errc::UnknownStrategy, "unknown strategy '" + name + "'");
  }
  if (base == "tc" && name != "tc") {
    throw Error(Errc::UnknownStrategy, "unknown strategy '" + name + "'");
  }
  return p;
}

}  // namespace

const char* to_string(SuppressMode mode) {
  switch (mode) {
    case SuppressMode::Zero: return "zero";
    case SuppressMode::Align: return "align";
    default: return "align-shift";
  }
}

ThresholdPair calibrate_thresholds(const std::vector<Trial>& dev_trials) {
  ThresholdPair pair;
  const EerResult f = eer(scores_of(dev_trials, Label::Bonafide, Gender::F),
                          scores_of(dev_trials, Label::Spoof, Gender::F));
  const EerResult m = eer(scores_of(dev_trials, Label::Bonafide, Gender::M),
                          scores_of(dev_trials, Label::Spoof, Gender::M));
  pair.thr_f = f.threshold;
  pair.thr_m = m.threshold;
  pair.eer_f = f.eer;
  pair.eer_m = m.eer;
  return pair;
}

SuppressionSet build_suppression(const ProbeModel& probe,
                                 const std::vector<EmbeddingRecord>& records,
                                 int k, SuppressMode mode) {
  const int d = static_cast<int>(probe.weights.size());
  if (k < 0 || k > d) {
    throw Error(Errc::KTooLarge, "suppression width " + std::to_string(k) +
                                     " out of range for dimension " + std::to_string(d));
  }
  SuppressionSet set;
  set.mode = mode;
  if (k == 0) return set;

  const Attribution attr = attribution_localisation(probe, records, k, 0.5);
  set.dims.assign(attr.ranked.begin(), attr.ranked.begin() + k);

  // Freeze alignment statistics (raw feature space) from the given records.
  // The alignment constant is the midpoint of the two gender means, so each
  // gender moves the same distance regardless of group sizes.
  set.target.assign(static_cast<std::size_t>(k), 0.0);
  set.delta_f.assign(static_cast<std::size_t>(k), 0.0);
  set.delta_m.assign(static_cast<std::size_t>(k), 0.0);
  std::vector<double> mean_f(static_cast<std::size_t>(k), 0.0);
  std::vector<double> mean_m(static_cast<std::size_t>(k), 0.0);
  long n_f = 0, n_m = 0;
  for (const EmbeddingRecord& rec : records) {
    const bool is_f = rec.gender == Gender::F;
    (is_f ? n_f : n_m)++;
    for (int j = 0; j < k; ++j) {
      const double v = rec.vec[static_cast<std::size_t>(set.dims[static_cast<std::size_t>(j)])];
      (is_f ? mean_f : mean_m)[static_cast<std::size_t>(j)] += v;
    }
  }
  if (n_f == 0 || n_m == 0) {
    throw Error(Errc::SingleGender, "alignment statistics require both genders");
  }
  for (int j = 0; j < k; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    mean_f[uj] /= static_cast<double>(n_f);
    mean_m[uj] /= static_cast<double>(n_m);
    set.target[uj] = 0.5 * (mean_f[uj] + mean_m[uj]);
    set.delta_f[uj] = set.target[uj] - mean_f[uj];
    set.delta_m[uj] = set.target[uj] - mean_m[uj];
  }
  return set;
}

std::vector<EmbeddingRecord> apply_suppression(
    const std::vector<EmbeddingRecord>& embeddings, const SuppressionSet& set) {
  std::vector<EmbeddingRecord> out = embeddings;
  if (set.dims.empty()) return out;
  for (EmbeddingRecord& rec : out) {
    for (std::size_t j = 0; j < set.dims.size(); ++j) {
      const auto dim = static_cast<std::size_t>(set.dims[j]);
      if (dim >= rec.vec.size()) {
        throw Error(Errc::DimensionMismatch,
                    "suppressed dimension " + std::to_string(set.dims[j]) +
                        " out of range for '" + rec.utt_id + "'");
      }
      switch (set.mode) {
        case SuppressMode::Zero:
          rec.vec[dim] = 0.0;
          break;
        case SuppressMode::Align:
          rec.vec[dim] = set.target[j];
          break;
        case SuppressMode::AlignShift:
          rec.vec[dim] += rec.gender == Gender::F ? set.delta_f[j] : set.delta_m[j];
          break;
      }
    }
  }
  return out;
}

void rescore(Dataset& dataset) {
  if (!dataset.has_embeddings()) {
    throw Error(Errc::MissingEmbeddings, "rescoring requires embeddings");
  }
  if (!dataset.head) {
    throw Error(Errc::MissingHead, "rescoring requires a linear head");
  }
  const std::size_t d = dataset.embed_dim();
  const std::size_t n = dataset.embeddings.size();
  std::vector<double> x(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const EmbeddingRecord& rec = dataset.embeddings[i];
    if (rec.vec.size() != d) {
      throw Error(Errc::DimensionMismatch,
                  "embedding dimension mismatch for '" + rec.utt_id + "'");
    }
    std::copy(rec.vec.begin(), rec.vec.end(), x.begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  const std::vector<double> scores = kernels::rescore_matrix(x, n, d, *dataset.head);

  std::unordered_map<std::string, double> by_utt;
  by_utt.reserve(n);
  for (std::size_t i = 0; i < n; ++i) by_utt.emplace(dataset.embeddings[i].utt_id, scores[i]);
  for (Trial& t : dataset.trials) {
    const auto it = by_utt.find(t.utt_id);
    if (it == by_utt.end()) {
      throw Error(Errc::MissingEmbeddings, "no embedding for trial '" + t.utt_id + "'");
    }
    t.score = it->second;
  }
}

PipelineResult run_pipeline(const Dataset& dataset, const std::string& strategy,
                            const PipelineOptions& options) {
  const ParsedStrategy parsed = parse_strategy(strategy, options);
  PipelineResult result;
  result.strategy = strategy;

  Dataset working = dataset;
  if (parsed.suppression) {
    if (!working.has_embeddings()) {
      throw Error(Errc::MissingEmbeddings,
                  "strategy '" + strategy + "' requires embeddings");
    }
    if (!working.head) {
      throw Error(Errc::MissingHead, "strategy '" + strategy + "' requires a linear head");
    }
    // Fit the edit on the calibration split; fall back to all records when
    // the dataset has no dev split.
    std::vector<EmbeddingRecord> fit = embeddings_of_split(working, Split::Dev);
    if (fit.empty()) {
      fit = working.embeddings;
      result.notes = "suppression fitted on all records (no dev embeddings); ";
    }
    const ProbeModel probe = train_probe(fit, options.seed, options.probe);
    const SuppressionSet set = build_suppression(probe, fit, options.k, parsed.mode);
    result.suppressed_dims = set.dims;
    if (!set.dims.empty()) {
      working.embeddings = apply_suppression(working.embeddings, set);
      rescore(working);
    }
  }

  std::vector<Trial> dev = trials_of_split(working.trials, Split::Dev);
  const std::vector<Trial> eval = trials_of_split(working.trials, Split::Eval);
  if (dev.empty()) {
    dev = eval;
    result.notes += "thresholds calibrated on eval (no dev split); ";
  }

  if (parsed.tc) {
    const ThresholdPair pair = calibrate_thresholds(dev);
    result.threshold_f = pair.thr_f;
    result.threshold_m = pair.thr_m;
    result.per_gender_thresholds = true;
  } else {
    const EerResult pooled =
        eer(scores_of(dev, Label::Bonafide), scores_of(dev, Label::Spoof));
    result.threshold_f = pooled.threshold;
    result.threshold_m = pooled.threshold;
  }

  result.report = fairness_report(eval, result.threshold_f, result.threshold_m,
                                  options.eop);
  return result;
}

const std::vector<std::string>& strategy_names() {
  static const std::vector<std::string> names = {
      "baseline", "tc",      "sgfs",    "gnea",    "sgfs+tc", "gnea+tc",
      "s1",       "s1+tc",   "s2",      "s2+tc",   "s3",      "s3+tc",
      "eafr",     "eafr+tc",
  };
  return names;
}

}  // namespace fairgate
