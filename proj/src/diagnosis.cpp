#include "fairgate/diagnosis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>

#include "fairgate/kernels.hpp"
#include "fairgate/metrics.hpp"
#include "fairgate/rng.hpp"
#include "fairgate/stats.hpp"

namespace fairgate {

namespace {

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

std::string format_p(double p) {
  return p >= 1e-3 ? fmt("%.3f", p) : fmt("%.3g", p);
}

// gender x label counts, rows F/M, columns bonafide/spoof.
std::array<std::array<long, 2>, 2> gender_label_table(const std::vector<Trial>& trials) {
  std::array<std::array<long, 2>, 2> table = {{{0, 0}, {0, 0}}};
  for (const Trial& t : trials) {
    ++table[static_cast<std::size_t>(t.gender)][static_cast<std::size_t>(t.label)];
  }
  return table;
}

void require_both_genders(const std::array<std::array<long, 2>, 2>& table,
                          const char* what) {
  if (table[0][0] + table[0][1] == 0) {
    throw Error(Errc::EmptyGroup, std::string("no trials for gender F in ") + what);
  }
  if (table[1][0] + table[1][1] == 0) {
    throw Error(Errc::EmptyGroup, std::string("no trials for gender M in ") + what);
  }
}

double mean_of(const std::vector<double>& v) {
  return kernels::chunked_sum(v.data(), v.size()) / static_cast<double>(v.size());
}

std::vector<double> standardized_matrix(const ProbeModel& probe,
                                        const std::vector<EmbeddingRecord>& records) {
  const std::size_t d = probe.feat_mean.size();
  std::vector<double> x(records.size() * d);
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].vec.size() != d) {
      throw Error(Errc::DimensionMismatch,
                  "embedding dimension mismatch for '" + records[i].utt_id + "'");
    }
    for (std::size_t j = 0; j < d; ++j) {
      x[i * d + j] = (records[i].vec[j] - probe.feat_mean[j]) / probe.feat_std[j];
    }
  }
  return x;
}

}  // namespace

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Confirmed: return "confirmed";
    case CheckStatus::Weak: return "weak";
    default: return "ruled_out";
  }
}

ProbeModel train_probe(const std::vector<EmbeddingRecord>& embeddings,
                       std::uint64_t seed, const ProbeOptions& options) {
  if (embeddings.empty()) {
    throw Error(Errc::MissingEmbeddings, "no embeddings to probe");
  }
  std::vector<std::size_t> idx_f, idx_m;
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    (embeddings[i].gender == Gender::F ? idx_f : idx_m).push_back(i);
  }
  if (idx_f.empty() || idx_m.empty()) {
    throw Error(Errc::SingleGender, "probe requires both genders");
  }
  if (idx_f.size() < 2 || idx_m.size() < 2) {
    throw Error(Errc::InvalidConfig, "probe requires at least two records per gender");
  }
  if (options.split_fraction <= 0.0 || options.split_fraction >= 1.0) {
    throw Error(Errc::InvalidConfig, "probe split_fraction must be in (0, 1)");
  }

  const std::size_t d = embeddings.front().vec.size();
  for (const EmbeddingRecord& rec : embeddings) {
    if (rec.vec.size() != d) {
      throw Error(Errc::DimensionMismatch,
                  "embedding dimension mismatch for '" + rec.utt_id + "'");
    }
  }

  // Stratified split, seeded: shuffle each gender's indices, take the leading
  // fraction for training (at least one record on each side per gender).
  Rng rng(seed);
  rng.shuffle(idx_f);
  rng.shuffle(idx_m);
  const auto take = [&](const std::vector<std::size_t>& idx) {
    std::size_t n_train = static_cast<std::size_t>(
        options.split_fraction * static_cast<double>(idx.size()));
    n_train = std::max<std::size_t>(1, std::min(n_train, idx.size() - 1));
    return n_train;
  };
  const std::size_t train_f = take(idx_f), train_m = take(idx_m);

  std::vector<std::size_t> train_idx, test_idx;
  train_idx.insert(train_idx.end(), idx_f.begin(), idx_f.begin() + static_cast<std::ptrdiff_t>(train_f));
  train_idx.insert(train_idx.end(), idx_m.begin(), idx_m.begin() + static_cast<std::ptrdiff_t>(train_m));
  test_idx.insert(test_idx.end(), idx_f.begin() + static_cast<std::ptrdiff_t>(train_f), idx_f.end());
  test_idx.insert(test_idx.end(), idx_m.begin() + static_cast<std::ptrdiff_t>(train_m), idx_m.end());

  ProbeModel probe;
  probe.n_train = static_cast<long>(train_idx.size());
  probe.n_test = static_cast<long>(test_idx.size());

  // Standardization from the training rows only.
  probe.feat_mean.assign(d, 0.0);
  probe.feat_std.assign(d, 0.0);
  for (const std::size_t i : train_idx) {
    for (std::size_t j = 0; j < d; ++j) probe.feat_mean[j] += embeddings[i].vec[j];
  }
  for (std::size_t j = 0; j < d; ++j) {
    probe.feat_mean[j] /= static_cast<double>(train_idx.size());
  }
  for (const std::size_t i : train_idx) {
    for (std::size_t j = 0; j < d; ++j) {
      const double dev = embeddings[i].vec[j] - probe.feat_mean[j];
      probe.feat_std[j] += dev * dev;
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    probe.feat_std[j] = std::sqrt(probe.feat_std[j] / static_cast<double>(train_idx.size()));
    if (probe.feat_std[j] == 0.0) probe.feat_std[j] = 1.0;  // constant feature
  }

  const auto build = [&](const std::vector<std::size_t>& idx, std::vector<double>& x,
                         std::vector<float>& y) {
    x.resize(idx.size() * d);
    y.resize(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const EmbeddingRecord& rec = embeddings[idx[r]];
      for (std::size_t j = 0; j < d; ++j) {
        x[r * d + j] = (rec.vec[j] - probe.feat_mean[j]) / probe.feat_std[j];
      }
      y[r] = rec.gender == Gender::F ? 1.0f : 0.0f;
    }
  };
  std::vector<double> x_train, x_test;
  std::vector<float> y_train, y_test;
  build(train_idx, x_train, y_train);
  build(test_idx, x_test, y_test);

  const std::size_t n = train_idx.size();
  std::vector<double> w(d, 0.0);
  double b = 0.0;

  const auto eval_loss = [&](const std::vector<double>& weights, double bias,
                             LogisticGrad& grad_out) {
    grad_out = kernels::logistic_grad(x_train, n, d, y_train, weights, bias);
    double penalty = 0.0;
    for (const double wj : weights) penalty += wj * wj;
    return grad_out.loss_sum / static_cast<double>(n) + 0.5 * options.l2 * penalty;
  };

  LogisticGrad grad;
  double loss = eval_loss(w, b, grad);
  probe.losses.push_back(loss);

  double lr = options.learning_rate;
  std::vector<double> w_next(d);
  for (int it = 0; it < options.iterations; ++it) {
    bool stepped = false;
    while (lr > 1e-14) {
      for (std::size_t j = 0; j < d; ++j) {
        const double gj = grad.dw[j] / static_cast<double>(n) + options.l2 * w[j];
        w_next[j] = w[j] - lr * gj;
      }
      const double b_next = b - lr * grad.db / static_cast<double>(n);
      LogisticGrad grad_next;
      const double loss_next = eval_loss(w_next, b_next, grad_next);
      if (loss_next <= loss) {
        w.swap(w_next);
        b = b_next;
        loss = loss_next;
        grad = std::move(grad_next);
        stepped = true;
        break;
      }
      lr *= 0.5;  // overshoot: halve and retry
    }
    probe.losses.push_back(loss);
    if (!stepped) continue;  // step size exhausted; loss already minimal
  }

  probe.weights = w;
  probe.bias = b;

  const auto accuracy = [&](const std::vector<double>& x, const std::vector<float>& y,
                            std::size_t rows) {
    long correct = 0;
    for (std::size_t i = 0; i < rows; ++i) {
      double z = b;
      for (std::size_t j = 0; j < d; ++j) z += w[j] * x[i * d + j];
      const bool pred_f = z >= 0.0;
      if (pred_f == (y[i] == 1.0f)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(rows);
  };
  probe.train_accuracy = accuracy(x_train, y_train, train_idx.size());
  probe.test_accuracy = accuracy(x_test, y_test, test_idx.size());
  return probe;
}

Attribution attribution_localisation(const ProbeModel& probe,
                                     const std::vector<EmbeddingRecord>& embeddings,
                                     int top_k, double share_threshold) {
  const int d = static_cast<int>(probe.weights.size());
  if (top_k < 1 || top_k > d) {
    throw Error(Errc::KTooLarge,
                "top_k " + std::to_string(top_k) + " out of range for dimension " +
                    std::to_string(d));
  }
  if (embeddings.empty()) {
    throw Error(Errc::MissingEmbeddings, "no embeddings for attribution");
  }

  const std::vector<double> x = standardized_matrix(probe, embeddings);
  const std::size_t n = embeddings.size();
  const std::size_t ud = static_cast<std::size_t>(d);

  std::vector<double> mean(ud, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < ud; ++j) mean[j] += x[i * ud + j];
  }
  for (std::size_t j = 0; j < ud; ++j) mean[j] /= static_cast<double>(n);

  Attribution attr;
  attr.top_k = top_k;
  attr.mass = kernels::attribution_mass(x, n, ud, probe.weights, mean);

  const double total =
      std::accumulate(attr.mass.begin(), attr.mass.end(), 0.0);
  if (total == 0.0) {
    throw Error(Errc::ZeroTotalMass, "attribution mass is zero for every dimension");
  }

  attr.ranked.resize(ud);
  std::iota(attr.ranked.begin(), attr.ranked.end(), 0);
  std::stable_sort(attr.ranked.begin(), attr.ranked.end(), [&](int a, int bdim) {
    return attr.mass[static_cast<std::size_t>(a)] > attr.mass[static_cast<std::size_t>(bdim)];
  });

  double top = 0.0;
  for (int k = 0; k < top_k; ++k) {
    top += attr.mass[static_cast<std::size_t>(attr.ranked[static_cast<std::size_t>(k)])];
  }
  attr.top_share = top / total;
  attr.localised = attr.top_share >= share_threshold;
  return attr;
}

CheckResult check_training_balance(const std::vector<Trial>& train_trials,
                                   const DiagnosisConfig& config) {
  CheckResult res;
  res.id = "training_imbalance";
  res.level = "data";
  res.name = "Training imbalance";
  if (train_trials.empty()) {
    throw Error(Errc::MissingSplit, "no train trials");
  }
  const auto table = gender_label_table(train_trials);
  require_both_genders(table, "train split");
  const Chi2Result chi2 = chi2_test(table);
  res.stats = {{"chi2", chi2.statistic}, {"p", chi2.p_value}};
  res.status = chi2.p_value >= config.p_threshold ? CheckStatus::RuledOut
                                                  : CheckStatus::Confirmed;
  res.statistic_text =
      fmt("chi2=%.3f, p=%s", chi2.statistic, format_p(chi2.p_value).c_str());
  res.evidence = fmt("train cells F:(bona %ld, spoof %ld) M:(bona %ld, spoof %ld)",
                     table[0][0], table[0][1], table[1][0], table[1][1]);
  return res;
}

CheckResult check_eval_asymmetry(const std::vector<Trial>& eval_trials,
                                 const DiagnosisConfig& config) {
  CheckResult res;
  res.id = "eval_asymmetry";
  res.level = "data";
  res.name = "Eval protocol asymmetry";
  if (eval_trials.empty()) {
    throw Error(Errc::MissingSplit, "no eval trials");
  }
  const auto table = gender_label_table(eval_trials);
  require_both_genders(table, "eval split");
  const Chi2Result chi2 = chi2_test(table);

  const double ratio_f = table[0][0] > 0 ? static_cast<double>(table[0][1]) /
                                               static_cast<double>(table[0][0])
                                         : std::numeric_limits<double>::infinity();
  const double ratio_m = table[1][0] > 0 ? static_cast<double>(table[1][1]) /
                                               static_cast<double>(table[1][0])
                                         : std::numeric_limits<double>::infinity();

  res.stats = {{"chi2", chi2.statistic},
               {"p", chi2.p_value},
               {"spoof_per_bona_f", ratio_f},
               {"spoof_per_bona_m", ratio_m}};
  res.status = chi2.p_value < config.p_threshold ? CheckStatus::Confirmed
                                                 : CheckStatus::RuledOut;
  res.statistic_text = fmt("F 1:%.2f, M 1:%.2f (chi2=%.2f, p=%s)", ratio_f, ratio_m,
                           chi2.statistic, format_p(chi2.p_value).c_str());

  // Per-gender attack composition of the eval spoof pool.
  std::map<std::string, long> att_f, att_m;
  for (const Trial& t : eval_trials) {
    if (t.label == Label::Spoof && t.attack_id) {
      ++(t.gender == Gender::F ? att_f : att_m)[*t.attack_id];
    }
  }
  const auto render = [](const std::map<std::string, long>& m) {
    std::string s;
    for (const auto& [attack, count] : m) {
      if (!s.empty()) s += " ";
      s += attack + ":" + std::to_string(count);
    }
    return s.empty() ? std::string("none") : s;
  };
  res.evidence = "eval attacks F: " + render(att_f) + " | M: " + render(att_m);
  return res;
}

CheckResult check_attack_overlap(const std::vector<Trial>& train_trials,
                                 const std::vector<Trial>& eval_trials) {
  CheckResult res;
  res.id = "attack_overlap";
  res.level = "data";
  res.name = "Attack non-overlap";

  std::set<std::string> train_attacks, eval_attacks;
  for (const Trial& t : train_trials) {
    if (t.attack_id) train_attacks.insert(*t.attack_id);
  }
  for (const Trial& t : eval_trials) {
    if (t.attack_id) eval_attacks.insert(*t.attack_id);
  }

  std::vector<std::string> shared;
  std::set_intersection(train_attacks.begin(), train_attacks.end(),
                        eval_attacks.begin(), eval_attacks.end(),
                        std::back_inserter(shared));

  res.stats = {{"train_attacks", static_cast<double>(train_attacks.size())},
               {"eval_attacks", static_cast<double>(eval_attacks.size())},
               {"shared_attacks", static_cast<double>(shared.size())}};
  res.statistic_text = fmt("train=%zu, eval=%zu, shared=%zu", train_attacks.size(),
                           eval_attacks.size(), shared.size());

  if (eval_attacks.empty()) {
    res.status = CheckStatus::Weak;
    res.evidence = "no eval attacks: overlap cannot be assessed";
  } else if (train_attacks.empty()) {
    res.status = CheckStatus::Weak;
    res.evidence = "no train attacks: overlap cannot be assessed";
  } else if (shared.empty()) {
    res.status = CheckStatus::Confirmed;
    res.evidence = "train and eval attack sets are disjoint";
  } else {
    res.status = CheckStatus::RuledOut;
    res.evidence = std::to_string(shared.size()) + " attack(s) appear in both splits";
  }
  return res;
}

CheckResult check_score_separation(const std::vector<Trial>& eval_trials,
                                   const DiagnosisConfig& config) {
  CheckResult res;
  res.id = "score_separation";
  res.level = "model";
  res.name = "Score separation gap";
  if (eval_trials.empty()) {
    throw Error(Errc::MissingSplit, "no eval trials");
  }
  const auto sep = [&](Gender g) {
    const std::vector<double> bona = scores_of(eval_trials, Label::Bonafide, g);
    const std::vector<double> spoof = scores_of(eval_trials, Label::Spoof, g);
    if (bona.empty() && spoof.empty()) {
      throw Error(Errc::EmptyGroup, std::string("no trials for gender ") + to_string(g));
    }
    if (bona.empty() || spoof.empty()) {
      throw Error(Errc::MissingLabelInGroup,
                  std::string("gender ") + to_string(g) + " is missing " +
                      (bona.empty() ? "bonafide" : "spoof") + " trials");
    }
    return mean_of(bona) - mean_of(spoof);
  };
  const double sep_f = sep(Gender::F);
  const double sep_m = sep(Gender::M);
  const double gap = std::fabs(sep_f - sep_m);

  res.stats = {{"sep_f", sep_f}, {"sep_m", sep_m}, {"gap", gap}};
  if (gap >= config.separation_confirm) {
    res.status = CheckStatus::Confirmed;
  } else if (gap > 0.0) {
    res.status = CheckStatus::Weak;
  } else {
    res.status = CheckStatus::RuledOut;
  }
  res.statistic_text = fmt("F=%.3f, M=%.3f (gap=%.3f)", sep_f, sep_m, gap);
  res.evidence = fmt("confirm threshold %.3f", config.separation_confirm);
  return res;
}

CheckResult check_leakage(const ProbeModel& probe, const DiagnosisConfig& config) {
  CheckResult res;
  res.id = "gender_leakage";
  res.level = "model";
  res.name = "Gender leakage accuracy";
  const double margin = probe.test_accuracy - 0.5;
  res.stats = {{"test_accuracy", probe.test_accuracy},
               {"train_accuracy", probe.train_accuracy},
               {"margin", margin}};
  if (margin >= config.leak_confirm) {
    res.status = CheckStatus::Confirmed;
  } else if (margin >= config.leak_weak) {
    res.status = CheckStatus::Weak;
  } else {
    res.status = CheckStatus::RuledOut;
  }
  res.statistic_text = fmt("%.1f%% (%+.1f pp above chance)", 100.0 * probe.test_accuracy,
                           100.0 * margin);
  res.evidence = fmt("probe train accuracy %.1f%%, %ld train / %ld test records",
                     100.0 * probe.train_accuracy, probe.n_train, probe.n_test);
  return res;
}

CheckResult check_localisation(const Attribution& attribution,
                               CheckStatus leakage_status,
                               const DiagnosisConfig& config) {
  CheckResult res;
  res.id = "leakage_localisation";
  res.level = "model";
  res.name = "Leakage localisation";
  res.stats = {{"top_share", attribution.top_share},
               {"top_k", static_cast<double>(attribution.top_k)}};
  if (leakage_status == CheckStatus::RuledOut) {
    res.status = CheckStatus::RuledOut;
    res.statistic_text = "no leakage to localise";
    res.evidence = "probe margin below the weak threshold";
    return res;
  }
  std::string dims;
  for (int k = 0; k < attribution.top_k; ++k) {
    if (!dims.empty()) dims += ", ";
    dims += std::to_string(attribution.ranked[static_cast<std::size_t>(k)]);
  }
  if (attribution.localised) {
    res.status = CheckStatus::Confirmed;
    res.statistic_text = fmt("dims %s - localised (top-%d share %.2f)", dims.c_str(),
                             attribution.top_k, attribution.top_share);
    res.evidence = fmt("top-%d share %.2f >= %.2f", attribution.top_k,
                       attribution.top_share, config.localised_share);
  } else {
    res.status = CheckStatus::Weak;
    res.statistic_text = fmt("diffuse (top-%d share %.2f)", attribution.top_k,
                             attribution.top_share);
    res.evidence = fmt("top-%d share %.2f < %.2f", attribution.top_k,
                       attribution.top_share, config.localised_share);
  }
  return res;
}

CheckResult check_threshold_bias(const std::vector<Trial>& dev_trials,
                                 const DiagnosisConfig& config) {
  CheckResult res;
  res.id = "threshold_bias";
  res.level = "decision";
  res.name = "Single threshold bias";
  if (dev_trials.empty()) {
    throw Error(Errc::MissingSplit, "no dev trials");
  }
  const EerResult eer_f = eer(scores_of(dev_trials, Label::Bonafide, Gender::F),
                              scores_of(dev_trials, Label::Spoof, Gender::F));
  const EerResult eer_m = eer(scores_of(dev_trials, Label::Bonafide, Gender::M),
                              scores_of(dev_trials, Label::Spoof, Gender::M));
  const double gap = std::fabs(eer_f.threshold - eer_m.threshold);

  // Half the minimal inter-score spacing: gaps at or below it are within
  // score granularity.
  std::vector<double> pooled;
  for (const Trial& t : dev_trials) pooled.push_back(t.score);
  std::sort(pooled.begin(), pooled.end());
  pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());
  double half_spacing = 0.0;
  if (pooled.size() > 1) {
    double min_spacing = pooled[1] - pooled[0];
    for (std::size_t i = 2; i < pooled.size(); ++i) {
      min_spacing = std::min(min_spacing, pooled[i] - pooled[i - 1]);
    }
    half_spacing = 0.5 * min_spacing;
  }
  const double slack = std::max(config.threshold_gap_floor, half_spacing);

  res.stats = {{"theta_f", eer_f.threshold},
               {"theta_m", eer_m.threshold},
               {"gap", gap},
               {"slack", slack}};
  res.status = gap > slack ? CheckStatus::Confirmed : CheckStatus::RuledOut;
  res.statistic_text =
      fmt("F=%.3f, M=%.3f, gap=%.3f", eer_f.threshold, eer_m.threshold, gap);
  res.evidence = fmt("slack %.4g (floor %.4g, half spacing %.4g)", slack,
                     config.threshold_gap_floor, half_spacing);
  return res;
}

CheckResult check_objective_bias(const std::vector<Trial>& eval_trials,
                                 double pooled_threshold,
                                 const DiagnosisConfig& config) {
  CheckResult res;
  res.id = "objective_bias";
  res.level = "decision";
  res.name = "Training objective bias";
  if (eval_trials.empty()) {
    throw Error(Errc::MissingSplit, "no eval trials");
  }
  const GroupConfusion c = confusion(eval_trials, pooled_threshold, pooled_threshold);
  if (c.fp_f + c.tn_f == 0 || c.fp_m + c.tn_m == 0) {
    throw Error(Errc::MissingLabelInGroup, "a gender has no bonafide trials");
  }
  const double fpr_f =
      static_cast<double>(c.fp_f) / static_cast<double>(c.fp_f + c.tn_f);
  const double fpr_m =
      static_cast<double>(c.fp_m) / static_cast<double>(c.fp_m + c.tn_m);
  const double d_fpr = fpr_f - fpr_m;

  res.stats = {{"d_fpr", d_fpr},
               {"fpr_f", fpr_f},
               {"fpr_m", fpr_m},
               {"pooled_threshold", pooled_threshold}};
  res.status = std::fabs(d_fpr) >= config.d_fpr_confirm ? CheckStatus::Confirmed
                                                        : CheckStatus::RuledOut;
  res.statistic_text = fmt("d_FPR=%+.3f at pooled threshold %.3f", d_fpr,
                           pooled_threshold);
  res.evidence = fmt("FPR F=%.4f, M=%.4f, confirm threshold %.3f", fpr_f, fpr_m,
                     config.d_fpr_confirm);
  return res;
}

DiagnosisReport diagnose_all(const Dataset& dataset, const DiagnosisConfig& config) {
  DiagnosisReport report;

  const std::vector<Trial> train = trials_of_split(dataset.trials, Split::Train);
  const std::vector<Trial> dev = trials_of_split(dataset.trials, Split::Dev);
  const std::vector<Trial> eval = trials_of_split(dataset.trials, Split::Eval);

  // A check that throws is reported Weak with the failure recorded; the run
  // never aborts on an individual check.
  const auto guarded = [&](const char* id, const char* level, const char* name,
                           auto&& fn) {
    try {
      report.checks.push_back(fn());
    } catch (const Error& e) {
      CheckResult failed;
      failed.id = id;
      failed.level = level;
      failed.name = name;
      failed.status = CheckStatus::Weak;
      failed.statistic_text = "check failed";
      failed.evidence = std::string("check failed [") + to_string(e.code) + "]: " + e.what();
      report.checks.push_back(std::move(failed));
    }
  };

  guarded("training_imbalance", "data", "Training imbalance",
          [&] { return check_training_balance(train, config); });
  guarded("eval_asymmetry", "data", "Eval protocol asymmetry",
          [&] { return check_eval_asymmetry(eval, config); });
  guarded("attack_overlap", "data", "Attack non-overlap",
          [&] { return check_attack_overlap(train, eval); });
  guarded("score_separation", "model", "Score separation gap",
          [&] { return check_score_separation(eval, config); });

  bool probe_ok = false;
  ProbeModel probe;
  if (dataset.has_embeddings()) {
    guarded("gender_leakage", "model", "Gender leakage accuracy", [&] {
      probe = train_probe(dataset.embeddings, config.seed, config.probe);
      probe_ok = true;
      return check_leakage(probe, config);
    });
  } else {
    CheckResult missing;
    missing.id = "gender_leakage";
    missing.level = "model";
    missing.name = "Gender leakage accuracy";
    missing.status = CheckStatus::Weak;
    missing.statistic_text = "no embeddings provided";
    missing.evidence = "leakage probe requires embeddings";
    report.checks.push_back(std::move(missing));
  }
  const CheckStatus leakage_status = report.checks.back().status;

  if (probe_ok) {
    guarded("leakage_localisation", "model", "Leakage localisation", [&] {
      const Attribution attr = attribution_localisation(
          probe, dataset.embeddings, config.top_k, config.localised_share);
      return check_localisation(attr, leakage_status, config);
    });
  } else {
    CheckResult missing;
    missing.id = "leakage_localisation";
    missing.level = "model";
    missing.name = "Leakage localisation";
    missing.status = CheckStatus::Weak;
    missing.statistic_text = "no embeddings provided";
    missing.evidence = "attribution requires a trained probe";
    report.checks.push_back(std::move(missing));
  }

  guarded("threshold_bias", "decision", "Single threshold bias",
          [&] { return check_threshold_bias(dev, config); });
  guarded("objective_bias", "decision", "Training objective bias", [&] {
    std::string source = "dev";
    std::vector<Trial> calib = dev;
    if (calib.empty()) {
      calib = eval;
      source = "eval (no dev split)";
    }
    const EerResult pooled = eer(scores_of(calib, Label::Bonafide),
                                 scores_of(calib, Label::Spoof));
    CheckResult res = check_objective_bias(eval, pooled.threshold, config);
    res.evidence += "; pooled threshold from " + source;
    return res;
  });

  for (const CheckResult& check : report.checks) {
    if (check.status == CheckStatus::Confirmed) {
      report.any_confirmed = true;
      break;
    }
  }

  // Mitigation mapping; the leakage pair is treated as one source whose
  // recommendation depends on the localisation outcome.
  const auto status_of = [&](const char* id) {
    for (const CheckResult& check : report.checks) {
      if (check.id == id) return check.status;
    }
    return CheckStatus::RuledOut;
  };
  const auto add = [&](const char* source, std::vector<std::string> strategies,
                       std::string note) {
    report.recommendations.push_back({source, std::move(strategies), std::move(note)});
  };

  if (status_of("training_imbalance") == CheckStatus::Confirmed) {
    add("training_imbalance", {"s1"}, "reweight the training loss per cell");
  }
  if (status_of("eval_asymmetry") == CheckStatus::Confirmed) {
    add("eval_asymmetry", {"protocol-redesign"},
        "non-model mitigation: rebalance the eval protocol");
  }
  if (status_of("attack_overlap") == CheckStatus::Confirmed) {
    add("attack_overlap", {"protocol-redesign"},
        "non-model mitigation: align attack coverage across splits");
  }
  if (status_of("score_separation") == CheckStatus::Confirmed) {
    add("score_separation", {"s2", "eafr"}, "equalize error rates during training");
  }
  const CheckStatus loc_status = status_of("leakage_localisation");
  if (status_of("gender_leakage") == CheckStatus::Confirmed ||
      loc_status == CheckStatus::Confirmed) {
    if (loc_status == CheckStatus::Confirmed) {
      add("gender_leakage", {"s3", "sgfs", "gnea"},
          "leakage is localised: suppression and adversarial training apply");
    } else {
      add("gender_leakage", {},
          "adversarial debiasing predicted to fail: leakage is diffuse");
    }
  }
  if (status_of("threshold_bias") == CheckStatus::Confirmed) {
    add("threshold_bias", {"tc"}, "calibrate one threshold per gender");
  }
  if (status_of("objective_bias") == CheckStatus::Confirmed) {
    add("objective_bias", {"s2", "eafr"}, "equalize error rates during training");
  }

  return report;
}

}  // namespace fairgate
