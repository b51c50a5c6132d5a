#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fairgate/diagnosis.hpp"
#include "fairgate/rng.hpp"
#include "fairgate/synth.hpp"
#include "fairgate/types.hpp"
#include "helpers.hpp"

using namespace fairgate;
using testutil::error_code_of;
using testutil::make_trial;

namespace {

double stat_of(const CheckResult& c, const std::string& key) {
  for (const auto& [k, v] : c.stats)
    if (k == key) return v;
  return std::numeric_limits<double>::quiet_NaN();
}

// n records per gender; dim 0 carries +/-1 by gender when separable.
std::vector<EmbeddingRecord> probe_records(std::size_t n_per_gender, int d, bool separable,
                                           std::uint64_t seed) {
  Rng rng(seed);
  std::vector<EmbeddingRecord> recs;
  for (std::size_t i = 0; i < 2 * n_per_gender; ++i) {
    EmbeddingRecord r;
    r.utt_id = "p" + std::to_string(i);
    r.gender = (i % 2 == 0) ? Gender::F : Gender::M;
    r.label = (i % 4 < 2) ? Label::Bonafide : Label::Spoof;
    r.vec.resize(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) r.vec[static_cast<std::size_t>(j)] = rng.normal();
    if (separable)
      r.vec[0] = (r.gender == Gender::F ? 1.0 : -1.0) + 0.5 * rng.normal();
    recs.push_back(std::move(r));
  }
  return recs;
}

void add_cell(std::vector<Trial>& out, Split split, Gender g, Label label, long n,
              double score) {
  for (long i = 0; i < n; ++i) {
    auto t = make_trial("c" + std::to_string(out.size()), score, label, g, split);
    out.push_back(std::move(t));
  }
}

}  // namespace

TEST_CASE("gender probe learns a planted direction and stays at chance on noise") {
  const auto separable = probe_records(200, 8, true, 31);
  const ProbeModel probe = train_probe(separable, 1);
  CHECK(probe.test_accuracy >= 0.9);
  CHECK(probe.train_accuracy >= 0.9);
  CHECK(probe.n_train + probe.n_test == 400);
  CHECK(probe.n_train == 280);  // 0.7 per gender
  REQUIRE(probe.weights.size() == 8);
  REQUIRE(probe.feat_std.size() == 8);
  for (const double s : probe.feat_std) CHECK(s > 0.0);

  // Deterministic: the same seed reproduces the model bit for bit.
  const ProbeModel again = train_probe(separable, 1);
  CHECK(again.weights == probe.weights);
  CHECK(again.bias == probe.bias);
  CHECK(again.losses == probe.losses);
  CHECK(again.test_accuracy == probe.test_accuracy);

  // Full-batch descent with step halving never lets the loss rise.
  REQUIRE(probe.losses.size() == 501);  // initial loss plus one per iteration
  for (std::size_t i = 1; i < probe.losses.size(); ++i)
    CHECK(probe.losses[i] <= probe.losses[i - 1] + 1e-12);

  for (const std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
    const ProbeModel chance = train_probe(probe_records(450, 8, false, 900 + seed), seed);
    CHECK(chance.test_accuracy > 0.42);
    CHECK(chance.test_accuracy < 0.58);
  }
}

TEST_CASE("gender probe rejects degenerate inputs") {
  CHECK(error_code_of([] { train_probe({}, 1); }) == Errc::MissingEmbeddings);

  std::vector<EmbeddingRecord> one_gender;
  for (int i = 0; i < 6; ++i)
    one_gender.push_back({"g" + std::to_string(i), {0.0, 1.0}, Gender::F, Label::Bonafide});
  CHECK(error_code_of([&] { train_probe(one_gender, 1); }) == Errc::SingleGender);

  auto tiny = probe_records(1, 2, false, 5);  // one record per gender
  CHECK(error_code_of([&] { train_probe(tiny, 1); }) == Errc::InvalidConfig);

  ProbeOptions bad;
  bad.split_fraction = 1.5;
  const auto recs = probe_records(10, 2, false, 6);
  CHECK(error_code_of([&] { train_probe(recs, 1, bad); }) == Errc::InvalidConfig);
}

TEST_CASE("attribution equals the prediction change of mean-replacement") {
  ScenarioConfig cfg = preset("localised-leak");
  cfg.n_per_cell = 150;
  const auto ds = generate(cfg).first;
  const ProbeModel probe = train_probe(ds.embeddings, 3);
  const Attribution attr = attribution_localisation(probe, ds.embeddings, 3, 0.5);

  const std::size_t n = ds.embeddings.size();
  const std::size_t d = probe.weights.size();
  // Standardize exactly as the probe stores its statistics.
  std::vector<std::vector<double>> z(n, std::vector<double>(d));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j)
      z[i][j] = (ds.embeddings[i].vec[j] - probe.feat_mean[j]) / probe.feat_std[j];
  std::vector<double> colmean(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < n; ++i) colmean[j] += z[i][j];
    colmean[j] /= static_cast<double>(n);
  }
  auto predict = [&](const std::vector<double>& row) {
    double s = probe.bias;
    for (std::size_t j = 0; j < d; ++j) s += probe.weights[j] * row[j];
    return s;
  };
  for (std::size_t j = 0; j < d; ++j) {
    double mean_abs_delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> replaced = z[i];
      replaced[j] = colmean[j];
      mean_abs_delta += std::fabs(predict(z[i]) - predict(replaced));
    }
    mean_abs_delta /= static_cast<double>(n);
    CHECK(attr.mass[j] == doctest::Approx(mean_abs_delta).epsilon(1e-9));
  }

  // The planted leak dims carry the mass.
  std::vector<int> top(attr.ranked.begin(), attr.ranked.begin() + 3);
  std::sort(top.begin(), top.end());
  CHECK(top == std::vector<int>{4, 5, 6});
  CHECK(attr.top_share >= 0.5);
  CHECK(attr.localised);
}

TEST_CASE("attribution ranking breaks mass ties toward lower dims") {
  ProbeModel probe;
  probe.weights = {1.0, 1.0};
  probe.bias = 0.0;
  probe.feat_mean = {0.0, 0.0};
  probe.feat_std = {1.0, 1.0};
  std::vector<EmbeddingRecord> recs;
  recs.push_back({"a", {1.0, 1.0}, Gender::F, Label::Bonafide});
  recs.push_back({"b", {-1.0, -1.0}, Gender::M, Label::Bonafide});

  const Attribution attr = attribution_localisation(probe, recs, 1, 0.5);
  CHECK(attr.ranked == std::vector<int>{0, 1});
  CHECK(attr.top_share == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(attr.localised);  // share 0.5 meets the >= 0.5 rule

  const Attribution strict = attribution_localisation(probe, recs, 1, 0.6);
  CHECK(!strict.localised);

  CHECK(error_code_of([&] { attribution_localisation(probe, recs, 0, 0.5); }) ==
        Errc::KTooLarge);
  CHECK(error_code_of([&] { attribution_localisation(probe, recs, 3, 0.5); }) ==
        Errc::KTooLarge);
  CHECK(error_code_of([&] { attribution_localisation(probe, {}, 1, 0.5); }) ==
        Errc::MissingEmbeddings);

  ProbeModel dead = probe;
  dead.weights = {0.0, 0.0};
  CHECK(error_code_of([&] { attribution_localisation(dead, recs, 1, 0.5); }) ==
        Errc::ZeroTotalMass);
}

TEST_CASE("training-composition check follows the contingency test") {
  std::vector<Trial> balanced;
  add_cell(balanced, Split::Train, Gender::F, Label::Bonafide, 100, 1.0);
  add_cell(balanced, Split::Train, Gender::F, Label::Spoof, 100, 0.0);
  add_cell(balanced, Split::Train, Gender::M, Label::Bonafide, 100, 1.0);
  add_cell(balanced, Split::Train, Gender::M, Label::Spoof, 100, 0.0);
  const auto ok = check_training_balance(balanced);
  CHECK(ok.status == CheckStatus::RuledOut);
  CHECK(ok.id == "training_imbalance");
  CHECK(ok.level == "data");
  CHECK(stat_of(ok, "chi2") == 0.0);

  std::vector<Trial> skewed;
  add_cell(skewed, Split::Train, Gender::F, Label::Bonafide, 900, 1.0);
  add_cell(skewed, Split::Train, Gender::F, Label::Spoof, 100, 0.0);
  add_cell(skewed, Split::Train, Gender::M, Label::Bonafide, 100, 1.0);
  add_cell(skewed, Split::Train, Gender::M, Label::Spoof, 900, 0.0);
  const auto bad = check_training_balance(skewed);
  CHECK(bad.status == CheckStatus::Confirmed);
  CHECK(stat_of(bad, "p") < 1e-10);
  CHECK(bad.statistic_text.find("chi2=") == 0);
}

TEST_CASE("eval-asymmetry check needs statistical evidence, not just a ratio gap") {
  auto build = [](long f_spoof, long m_spoof, long bona) {
    std::vector<Trial> t;
    add_cell(t, Split::Eval, Gender::F, Label::Bonafide, bona, 1.0);
    add_cell(t, Split::Eval, Gender::F, Label::Spoof, f_spoof, 0.0);
    add_cell(t, Split::Eval, Gender::M, Label::Bonafide, bona, 1.0);
    add_cell(t, Split::Eval, Gender::M, Label::Spoof, m_spoof, 0.0);
    return t;
  };

  // Same 4.10 vs 3.71 ratio: decisive at scale, inconclusive on 100 trials.
  const auto small = check_eval_asymmetry(build(410, 371, 100));
  CHECK(small.status == CheckStatus::RuledOut);
  CHECK(stat_of(small, "p") > 0.05);

  const auto large = check_eval_asymmetry(build(32800, 29680, 8000));
  CHECK(large.status == CheckStatus::Confirmed);
  CHECK(stat_of(large, "p") < 1e-6);
  CHECK(stat_of(large, "spoof_per_bona_f") == doctest::Approx(4.10).epsilon(1e-12));
  CHECK(stat_of(large, "spoof_per_bona_m") == doctest::Approx(3.71).epsilon(1e-12));

  const auto flat = check_eval_asymmetry(build(500, 500, 250));
  CHECK(flat.status == CheckStatus::RuledOut);
}

TEST_CASE("attack-overlap check distinguishes disjoint, shared and missing pools") {
  std::vector<Trial> train, eval_shared, eval_disjoint, eval_no_spoof;
  add_cell(train, Split::Train, Gender::F, Label::Bonafide, 4, 1.0);
  for (int i = 0; i < 4; ++i) {
    auto t = make_trial("ts" + std::to_string(i), 0.0, Label::Spoof, Gender::M, Split::Train);
    t.attack_id = "A0" + std::to_string(i + 1);
    train.push_back(t);
  }
  for (int i = 0; i < 4; ++i) {
    auto t = make_trial("es" + std::to_string(i), 0.0, Label::Spoof, Gender::F, Split::Eval);
    t.attack_id = "A0" + std::to_string(i + 1);
    eval_shared.push_back(t);
    auto u = make_trial("ed" + std::to_string(i), 0.0, Label::Spoof, Gender::F, Split::Eval);
    u.attack_id = "B0" + std::to_string(i + 1);
    eval_disjoint.push_back(u);
  }
  add_cell(eval_no_spoof, Split::Eval, Gender::F, Label::Bonafide, 4, 1.0);

  const auto disjoint = check_attack_overlap(train, eval_disjoint);
  CHECK(disjoint.status == CheckStatus::Confirmed);
  CHECK(disjoint.statistic_text == "train=4, eval=4, shared=0");

  const auto shared = check_attack_overlap(train, eval_shared);
  CHECK(shared.status == CheckStatus::RuledOut);
  CHECK(stat_of(shared, "shared_attacks") == 4.0);

  const auto missing = check_attack_overlap(train, eval_no_spoof);
  CHECK(missing.status == CheckStatus::Weak);
  CHECK(missing.evidence.find("no eval attacks") != std::string::npos);
}

TEST_CASE("separation check grades the per-gender mean gap") {
  auto build = [](double sep_f, double sep_m) {
    std::vector<Trial> t;
    add_cell(t, Split::Eval, Gender::F, Label::Bonafide, 4, sep_f);
    add_cell(t, Split::Eval, Gender::F, Label::Spoof, 4, 0.0);
    add_cell(t, Split::Eval, Gender::M, Label::Bonafide, 4, sep_m);
    add_cell(t, Split::Eval, Gender::M, Label::Spoof, 4, 0.0);
    return t;
  };

  const auto confirmed = check_score_separation(build(2.407, 2.0));
  CHECK(confirmed.status == CheckStatus::Confirmed);
  CHECK(stat_of(confirmed, "gap") == doctest::Approx(0.407).epsilon(1e-12));
  CHECK(confirmed.statistic_text == "F=2.407, M=2.000 (gap=0.407)");

  const auto weak = check_score_separation(build(2.034, 2.0));
  CHECK(weak.status == CheckStatus::Weak);
  CHECK(stat_of(weak, "gap") == doctest::Approx(0.034).epsilon(1e-12));

  // Identical per-gender separations: the gap is exactly zero.
  const auto none = check_score_separation(build(2.0, 2.0));
  CHECK(none.status == CheckStatus::RuledOut);
  CHECK(stat_of(none, "gap") == 0.0);
}

TEST_CASE("leakage check maps probe margin to status") {
  auto with_accuracy = [](double acc) {
    ProbeModel p;
    p.test_accuracy = acc;
    return p;
  };
  CHECK(check_leakage(with_accuracy(0.625)).status == CheckStatus::Confirmed);
  CHECK(check_leakage(with_accuracy(0.61)).status == CheckStatus::Confirmed);
  CHECK(check_leakage(with_accuracy(0.534)).status == CheckStatus::Weak);
  CHECK(check_leakage(with_accuracy(0.52)).status == CheckStatus::Weak);  // margin 0.02
  CHECK(check_leakage(with_accuracy(0.512)).status == CheckStatus::RuledOut);
  const auto one = check_leakage(with_accuracy(0.625));
  CHECK(one.statistic_text == "62.5% (+12.5 pp above chance)");
}

TEST_CASE("localisation check is gated on leakage and on the top-k share") {
  Attribution attr;
  attr.mass = {0.1, 0.1, 0.1, 0.1, 2.0, 2.0, 2.0, 0.1};
  attr.ranked = {4, 5, 6, 0, 1, 2, 3, 7};
  attr.top_k = 3;
  attr.top_share = 0.92;
  attr.localised = true;

  const auto confirmed = check_localisation(attr, CheckStatus::Confirmed);
  CHECK(confirmed.status == CheckStatus::Confirmed);
  CHECK(confirmed.statistic_text.find("dims 4, 5, 6") != std::string::npos);

  Attribution diffuse = attr;
  diffuse.top_share = 0.31;
  diffuse.localised = false;
  const auto weak = check_localisation(diffuse, CheckStatus::Confirmed);
  CHECK(weak.status == CheckStatus::Weak);
  CHECK(weak.statistic_text.find("diffuse") != std::string::npos);

  const auto gated = check_localisation(attr, CheckStatus::RuledOut);
  CHECK(gated.status == CheckStatus::RuledOut);
  CHECK(gated.statistic_text == "no leakage to localise");
}

TEST_CASE("threshold-bias check compares the gap against noise-aware slack") {
  auto lattice = [](double shift) {
    std::vector<Trial> t;
    for (const double s : {2.0, 3.0, 4.0})
      t.push_back(make_trial("fb" + std::to_string(t.size()), s + shift, Label::Bonafide,
                             Gender::F, Split::Dev));
    for (const double s : {-1.0, 0.0, 1.0})
      t.push_back(
          make_trial("fs" + std::to_string(t.size()), s + shift, Label::Spoof, Gender::F,
                     Split::Dev));
    for (const double s : {2.0, 3.0, 4.0})
      t.push_back(
          make_trial("mb" + std::to_string(t.size()), s, Label::Bonafide, Gender::M, Split::Dev));
    for (const double s : {-1.0, 0.0, 1.0})
      t.push_back(
          make_trial("ms" + std::to_string(t.size()), s, Label::Spoof, Gender::M, Split::Dev));
    return t;
  };

  // Unit-spaced scores: half spacing 0.5 beats the floor, so only a gap
  // beyond 0.5 counts.
  const auto shifted = check_threshold_bias(lattice(2.0));
  CHECK(shifted.status == CheckStatus::Confirmed);
  CHECK(stat_of(shifted, "slack") == 0.5);
  CHECK(stat_of(shifted, "gap") == doctest::Approx(2.0).epsilon(1e-12));

  const auto same = check_threshold_bias(lattice(0.0));
  CHECK(same.status == CheckStatus::RuledOut);
  CHECK(stat_of(same, "gap") == 0.0);

  // Fine grid: the floor dominates and a 0.102 gap clears it.
  std::vector<Trial> fine;
  for (const double s : {1.001, 1.002})
    fine.push_back(make_trial("a" + std::to_string(fine.size()), s, Label::Bonafide, Gender::M,
                              Split::Dev));
  for (const double s : {0.999, 1.000})
    fine.push_back(
        make_trial("b" + std::to_string(fine.size()), s, Label::Spoof, Gender::M, Split::Dev));
  for (const double s : {1.103, 1.104})
    fine.push_back(make_trial("c" + std::to_string(fine.size()), s, Label::Bonafide, Gender::F,
                              Split::Dev));
  for (const double s : {1.101, 1.102})
    fine.push_back(
        make_trial("d" + std::to_string(fine.size()), s, Label::Spoof, Gender::F, Split::Dev));
  const auto fine_res = check_threshold_bias(fine);
  CHECK(fine_res.status == CheckStatus::Confirmed);
  CHECK(stat_of(fine_res, "slack") == doctest::Approx(0.08).epsilon(1e-12));
  CHECK(stat_of(fine_res, "gap") == doctest::Approx(0.102).epsilon(1e-9));
}

TEST_CASE("objective-bias check measures the pooled-threshold FPR difference") {
  auto build = [](long fp_f, long n_f, long fp_m, long n_m) {
    std::vector<Trial> t;
    add_cell(t, Split::Eval, Gender::F, Label::Bonafide, fp_f, -1.0);       // below: fp
    add_cell(t, Split::Eval, Gender::F, Label::Bonafide, n_f - fp_f, 1.0);  // above: tn
    add_cell(t, Split::Eval, Gender::F, Label::Spoof, 10, -1.0);
    add_cell(t, Split::Eval, Gender::M, Label::Bonafide, fp_m, -1.0);
    add_cell(t, Split::Eval, Gender::M, Label::Bonafide, n_m - fp_m, 1.0);
    add_cell(t, Split::Eval, Gender::M, Label::Spoof, 10, -1.0);
    return t;
  };

  const auto confirmed = check_objective_bias(build(105, 1000, 55, 1000), 0.0);
  CHECK(confirmed.status == CheckStatus::Confirmed);
  CHECK(stat_of(confirmed, "d_fpr") == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(confirmed.statistic_text == "d_FPR=+0.050 at pooled threshold 0.000");

  const auto mild = check_objective_bias(build(112, 1000, 55, 1000), 0.0);
  CHECK(mild.status == CheckStatus::Confirmed);
  CHECK(stat_of(mild, "d_fpr") == doctest::Approx(0.057).epsilon(1e-9));

  const auto flat = check_objective_bias(build(80, 1000, 80, 1000), 0.0);
  CHECK(flat.status == CheckStatus::RuledOut);
  CHECK(stat_of(flat, "d_fpr") == 0.0);
}

TEST_CASE("full diagnosis keeps a fixed check order and degrades gracefully") {
  ScenarioConfig cfg = preset("balanced-clean");
  cfg.n_per_cell = 100;
  const auto ds = generate(cfg).first;

  const auto report = diagnose_all(ds);
  REQUIRE(report.checks.size() == 8);
  const std::vector<std::string> order{"training_imbalance", "eval_asymmetry",
                                       "attack_overlap",     "score_separation",
                                       "gender_leakage",     "leakage_localisation",
                                       "threshold_bias",     "objective_bias"};
  for (std::size_t i = 0; i < order.size(); ++i) CHECK(report.checks[i].id == order[i]);

  SUBCASE("without embeddings the probe checks report their gap") {
    Dataset stripped = ds;
    stripped.embeddings.clear();
    stripped.head.reset();
    const auto rep = diagnose_all(stripped);
    CHECK(rep.checks[4].status == CheckStatus::Weak);
    CHECK(rep.checks[4].statistic_text == "no embeddings provided");
    CHECK(rep.checks[5].status == CheckStatus::Weak);
  }
  SUBCASE("eval-only data degrades the split-bound checks") {
    Dataset eval_only = ds;
    std::erase_if(eval_only.trials, [](const Trial& t) { return t.split != Split::Eval; });
    std::erase_if(eval_only.embeddings, [&](const EmbeddingRecord& r) {
      return r.utt_id.rfind("eval-", 0) != 0;
    });
    const auto rep = diagnose_all(eval_only);
    CHECK(rep.checks[0].status == CheckStatus::Weak);
    CHECK(rep.checks[0].evidence.find("check failed [MissingSplit]") != std::string::npos);
    CHECK(rep.checks[6].status == CheckStatus::Weak);
    CHECK(rep.checks[7].evidence.find("pooled threshold from eval (no dev split)") !=
          std::string::npos);
  }
}

TEST_CASE("diagnosis recommendations route each source to its mitigations") {
  auto recommendation_for = [](const DiagnosisReport& rep,
                               const std::string& source) -> const Recommendation* {
    for (const auto& r : rep.recommendations)
      if (r.source == source) return &r;
    return nullptr;
  };

  SUBCASE("localised leakage brings in suppression and adversarial training") {
    ScenarioConfig cfg = preset("localised-leak");
    cfg.n_per_cell = 1000;
    const auto rep = diagnose_all(generate(cfg).first);
    CHECK(rep.any_confirmed);
    const auto* rec = recommendation_for(rep, "gender_leakage");
    REQUIRE(rec != nullptr);
    CHECK(rec->strategies == std::vector<std::string>{"s3", "sgfs", "gnea"});
  }
  SUBCASE("diffuse leakage warns that suppression will not transfer") {
    ScenarioConfig cfg = preset("diffuse-leak");
    cfg.n_per_cell = 1000;
    const auto rep = diagnose_all(generate(cfg).first);
    const auto* rec = recommendation_for(rep, "gender_leakage");
    REQUIRE(rec != nullptr);
    CHECK(rec->strategies.empty());
    CHECK(rec->note.find("diffuse") != std::string::npos);
  }
  SUBCASE("threshold bias maps to per-gender calibration") {
    ScenarioConfig cfg = preset("threshold-biased");
    cfg.n_per_cell = 4000;
    const auto rep = diagnose_all(generate(cfg).first);
    const auto* rec = recommendation_for(rep, "threshold_bias");
    REQUIRE(rec != nullptr);
    CHECK(rec->strategies == std::vector<std::string>{"tc"});
  }
  SUBCASE("training imbalance maps to loss reweighting") {
    ScenarioConfig cfg;
    cfg.n_per_cell = 500;
    cfg.train_spoof_ratio_f = 3.0;
    const auto rep = diagnose_all(generate(cfg).first);
    const auto* rec = recommendation_for(rep, "training_imbalance");
    REQUIRE(rec != nullptr);
    CHECK(rec->strategies == std::vector<std::string>{"s1"});
  }
  SUBCASE("protocol defects route to protocol redesign, not model fixes") {
    ScenarioConfig attacks = preset("attack-disjoint");
    attacks.n_per_cell = 250;
    const auto rep_a = diagnose_all(generate(attacks).first);
    const auto* rec_a = recommendation_for(rep_a, "attack_overlap");
    REQUIRE(rec_a != nullptr);
    CHECK(rec_a->strategies == std::vector<std::string>{"protocol-redesign"});

    ScenarioConfig asym = preset("eval-asymmetric");
    asym.n_per_cell = 2000;
    const auto rep_e = diagnose_all(generate(asym).first);
    const auto* rec_e = recommendation_for(rep_e, "eval_asymmetry");
    REQUIRE(rec_e != nullptr);
    CHECK(rec_e->strategies == std::vector<std::string>{"protocol-redesign"});
  }
  SUBCASE("a clean scenario recommends nothing") {
    ScenarioConfig cfg = preset("balanced-clean");
    cfg.n_per_cell = 4000;
    const auto rep = diagnose_all(generate(cfg).first);
    CHECK(!rep.any_confirmed);
    CHECK(rep.recommendations.empty());
  }
}
