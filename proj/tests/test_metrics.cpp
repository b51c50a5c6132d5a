#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "fairgate/metrics.hpp"
#include "fairgate/rng.hpp"
#include "fairgate/types.hpp"
#include "helpers.hpp"

using namespace fairgate;
using testutil::error_code_of;
using testutil::make_trial;

namespace {

bool has_flag(const FairnessReport& rep, const std::string& flag) {
  for (const auto& f : rep.flags)
    if (f == flag) return true;
  return false;
}

std::vector<Trial> mixed_trials(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Trial> trials;
  for (std::size_t i = 0; i < n; ++i) {
    const Label label = (i % 2 == 0) ? Label::Bonafide : Label::Spoof;
    const Gender gender = (i % 4 < 2) ? Gender::F : Gender::M;
    const double mean = (label == Label::Bonafide) ? 1.5 : 0.0;
    const double shift = (gender == Gender::F) ? 0.3 : 0.0;
    trials.push_back(
        make_trial("u" + std::to_string(i), mean + shift + rng.normal(), label, gender));
  }
  return trials;
}

}  // namespace

TEST_CASE("equal error rate on hand-checkable score sets") {
  SUBCASE("perfect separation") {
    const auto r = eer({1.0, 2.0, 3.0}, {-1.0, 0.0});
    CHECK(r.eer == 0.0);
    CHECK(r.threshold == 0.5);
  }
  SUBCASE("identical distributions sit at one half") {
    const auto r = eer({0.0, 1.0}, {0.0, 1.0});
    CHECK(r.eer == 0.5);
    CHECK(r.threshold == 0.5);
  }
  SUBCASE("anti-correlated scorer reaches one") {
    const auto r = eer({0.0}, {1.0});
    CHECK(r.eer == 1.0);
  }
  SUBCASE("ties resolve to the smallest threshold") {
    // |FAR-FRR| = 1/3 at both interior candidates 0.5 and 1.5.
    const auto r = eer({0.0, 1.0, 2.0}, {0.0, 1.0, 2.0});
    CHECK(r.threshold == 0.5);
    CHECK(r.eer == 0.5);
  }
  SUBCASE("empty classes are rejected") {
    CHECK(error_code_of([] { eer({}, {1.0}); }) == Errc::EmptyClass);
    CHECK(error_code_of([] { eer({1.0}, {}); }) == Errc::EmptyClass);
  }
}

TEST_CASE("equal error rate equals the exhaustive recount on random instances") {
  Rng rng(101);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t nb = 1 + rng.below(50);
    const std::size_t ns = 1 + rng.below(50);
    std::vector<double> bona(nb), spoof(ns);
    const bool lattice = (rep % 2 == 0);  // coarse grids force duplicate scores
    for (auto& s : bona)
      s = lattice ? std::round(rng.uniform() * 8.0) / 2.0 : 1.0 + rng.normal();
    for (auto& s : spoof)
      s = lattice ? std::round(rng.uniform() * 8.0) / 2.0 : rng.normal();

    const auto fast = eer(bona, spoof);
    const auto brute = testutil::eer_exhaustive(bona, spoof);
    CHECK(fast.eer == brute.eer);
    CHECK(fast.threshold == brute.threshold);
  }
}

TEST_CASE("equal error rate is invariant under increasing score transforms") {
  Rng rng(55);
  std::vector<double> bona(400), spoof(300);
  for (auto& s : bona) s = 1.0 + rng.normal();
  for (auto& s : spoof) s = rng.normal();

  auto warp = [](double x) { return x * x * x + 2.0 * x; };  // strictly increasing
  std::vector<double> bona_w, spoof_w;
  for (const double s : bona) bona_w.push_back(warp(s));
  for (const double s : spoof) spoof_w.push_back(warp(s));

  const auto plain = eer(bona, spoof);
  const auto warped = eer(bona_w, spoof_w);
  CHECK(plain.eer == warped.eer);  // same count sequence, candidate grid shifts
}

TEST_CASE("group confusion on a crafted table") {
  std::vector<Trial> trials;
  trials.push_back(make_trial("a", 1.0, Label::Bonafide, Gender::F));
  trials.push_back(make_trial("b", -1.0, Label::Bonafide, Gender::F));
  trials.push_back(make_trial("c", -1.0, Label::Spoof, Gender::F));
  trials.push_back(make_trial("d", 1.0, Label::Spoof, Gender::M));
  trials.push_back(make_trial("e", -2.0, Label::Spoof, Gender::M));
  trials.push_back(make_trial("f", 3.0, Label::Bonafide, Gender::M));

  const auto c = confusion(trials, 0.0, 0.5);
  CHECK(c.tn_f == 1);
  CHECK(c.fp_f == 1);
  CHECK(c.tp_f == 1);
  CHECK(c.fn_f == 0);
  CHECK(c.tp_m == 1);
  CHECK(c.fn_m == 1);
  CHECK(c.tn_m == 1);
  CHECK(c.fp_m == 0);

  std::vector<Trial> only_m{make_trial("x", 0.0, Label::Bonafide, Gender::M)};
  CHECK(error_code_of([&] { confusion(only_m, 0.0, 0.0); }) == Errc::EmptyGroup);
}

TEST_CASE("fairness gaps on a fully hand-computed case") {
  std::vector<Trial> trials;
  for (const Gender g : {Gender::F, Gender::M}) {
    const std::string p = (g == Gender::F) ? "f" : "m";
    trials.push_back(make_trial(p + "1", 1.0, Label::Bonafide, g));
    trials.push_back(make_trial(p + "2", 5.0, Label::Bonafide, g));
    trials.push_back(make_trial(p + "3", 0.0, Label::Spoof, g));
    trials.push_back(make_trial(p + "4", 4.0, Label::Spoof, g));
  }

  // F at threshold 2: tp 1, fn 1, fp 1, tn 1. M at threshold 6: everything is
  // called spoof: tp 2, fn 0, fp 2, tn 0.
  const auto rep = fairness_report(trials, 2.0, 6.0);
  CHECK(rep.d_fpr == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(rep.spd == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(rep.eop == doctest::Approx(-0.5).epsilon(1e-15));  // FPR conditioning by default
  CHECK(rep.ppd == doctest::Approx(0.0).scale(1.0));       // both precisions are 1/2
  CHECK(std::isinf(rep.ted));
  CHECK(rep.ted < 0.0);  // te_f = 1, te_m = 2/0 = inf
  CHECK(has_flag(rep, "te_m_undefined"));
  CHECK(!has_flag(rep, "te_f_undefined"));
  // Same scores in both groups: identical per-gender EER, zero gap.
  CHECK(rep.eer_gap == 0.0);

  const auto tpr = fairness_report(trials, 2.0, 6.0, EopVariant::TruePositive);
  CHECK(tpr.eop == doctest::Approx(-0.5).epsilon(1e-15));
}

TEST_CASE("fairness gaps are antisymmetric under a gender swap") {
  const auto trials = mixed_trials(600, 77);
  std::vector<Trial> swapped = trials;
  for (auto& t : swapped) t.gender = (t.gender == Gender::F) ? Gender::M : Gender::F;

  const auto a = fairness_report(trials, 0.8, 0.6);
  const auto b = fairness_report(swapped, 0.6, 0.8);
  CHECK(b.eer_f == a.eer_m);
  CHECK(b.eer_m == a.eer_f);
  CHECK(b.eer_gap == -a.eer_gap);
  CHECK(b.d_fpr == -a.d_fpr);
  CHECK(b.spd == -a.spd);
  CHECK(b.eop == -a.eop);
  CHECK(b.ppd == -a.ppd);
  CHECK(b.ted == -a.ted);
}

TEST_CASE("degenerate cells flag instead of crashing") {
  std::vector<Trial> trials;
  trials.push_back(make_trial("f1", 0.0, Label::Bonafide, Gender::F));
  trials.push_back(make_trial("f2", 1.0, Label::Bonafide, Gender::F));
  trials.push_back(make_trial("f3", 2.0, Label::Spoof, Gender::F));
  trials.push_back(make_trial("f4", 3.0, Label::Spoof, Gender::F));
  trials.push_back(make_trial("m1", 1.0, Label::Bonafide, Gender::M));
  trials.push_back(make_trial("m2", 5.0, Label::Bonafide, Gender::M));
  trials.push_back(make_trial("m3", 0.0, Label::Spoof, Gender::M));
  trials.push_back(make_trial("m4", 4.0, Label::Spoof, Gender::M));

  SUBCASE("no positive predictions leaves precision undefined") {
    const auto rep = fairness_report(trials, -1.0, 2.0);
    CHECK(has_flag(rep, "ppv_f_undefined"));
    CHECK(std::isnan(rep.ppd));
  }
  SUBCASE("no false negatives leaves the error ratio infinite") {
    const auto rep = fairness_report(trials, 10.0, 2.0);
    CHECK(has_flag(rep, "te_f_undefined"));
    CHECK(std::isinf(rep.ted));
    CHECK(rep.ted > 0.0);
  }
  SUBCASE("perfect separation leaves the error ratio indeterminate") {
    // Swap F labels so the groups separate perfectly around 1.5.
    auto perfect = trials;
    perfect[0].label = Label::Spoof;
    perfect[1].label = Label::Spoof;
    perfect[0].attack_id = "A01";
    perfect[1].attack_id = "A01";
    perfect[2].label = Label::Bonafide;
    perfect[3].label = Label::Bonafide;
    perfect[2].attack_id.reset();
    perfect[3].attack_id.reset();
    const auto rep = fairness_report(perfect, 1.5, 2.0);
    CHECK(has_flag(rep, "te_f_undefined"));
    CHECK(std::isnan(rep.ted));
  }
  SUBCASE("missing label inside a gender is an error") {
    std::vector<Trial> missing{trials[0], trials[1], trials[4], trials[5], trials[6]};
    CHECK(error_code_of([&] { fairness_report(missing, 0.0, 0.0); }) ==
          Errc::MissingLabelInGroup);
  }
}

TEST_CASE("score summary moments, shared bins and degenerate ranges") {
  SUBCASE("crafted cells") {
    std::vector<Trial> trials;
    trials.push_back(make_trial("a", 0.0, Label::Bonafide, Gender::F));
    trials.push_back(make_trial("b", 1.0, Label::Bonafide, Gender::F));
    trials.push_back(make_trial("c", 2.0, Label::Bonafide, Gender::F));
    trials.push_back(make_trial("d", 4.0, Label::Spoof, Gender::M));

    const auto s = score_summary(trials, 20);
    CHECK(s.lo == 0.0);
    CHECK(s.hi == 4.0);
    CHECK(s.bins == 20);
    CHECK(s.cell[0][0].n == 3);
    CHECK(s.cell[0][0].mean == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.cell[0][0].stddev == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
    long mass = 0;
    for (const long c : s.cell[0][0].histogram) mass += c;
    CHECK(mass == 3);
    CHECK(s.cell[1][0].n == 0);  // no male bonafide
    CHECK(s.cell[1][1].n == 1);
  }
  SUBCASE("constant scores widen the range instead of collapsing") {
    std::vector<Trial> trials;
    trials.push_back(make_trial("a", 1.0, Label::Bonafide, Gender::F));
    trials.push_back(make_trial("b", 1.0, Label::Bonafide, Gender::M));
    const auto s = score_summary(trials, 40);
    CHECK(s.lo == 0.5);
    CHECK(s.hi == 1.5);
    CHECK(s.cell[0][0].histogram[20] == 1);
    CHECK(s.cell[0][0].stddev == 0.0);
  }
}

TEST_CASE("selectors filter by label, gender and split") {
  std::vector<Trial> trials;
  trials.push_back(make_trial("a", 1.0, Label::Bonafide, Gender::F, Split::Train));
  trials.push_back(make_trial("b", 2.0, Label::Spoof, Gender::F, Split::Eval));
  trials.push_back(make_trial("c", 3.0, Label::Spoof, Gender::M, Split::Eval));

  CHECK(scores_of(trials, Label::Spoof) == std::vector<double>{2.0, 3.0});
  CHECK(scores_of(trials, Label::Spoof, Gender::F) == std::vector<double>{2.0});
  CHECK(trials_of_split(trials, Split::Eval).size() == 2);
  CHECK(trials_of_split(trials, Split::Dev).empty());
}
