#include "doctest.h"

#include <map>
#include <random>

#include "mframes/errors.hpp"
#include "mframes/metrics.hpp"

using namespace mframes;
using metrics::Prediction;

namespace {

const std::vector<std::string> kLabels = {"A", "B", "C"};

// brute-force confusion-matrix oracle for per-class F1
struct OracleScores {
  std::map<std::string, double> f1;
};

OracleScores f1_oracle(const std::vector<Prediction>& preds,
                       const std::vector<std::string>& labels) {
  OracleScores out;
  for (const std::string& label : labels) {
    int tp = 0, fp = 0, fn = 0;
    for (const Prediction& p : preds) {
      bool gold_is = p.gold == label;
      bool pred_is = p.pred.has_value() && *p.pred == label;
      if (gold_is && pred_is) ++tp;
      if (!gold_is && pred_is) ++fp;
      if (gold_is && !pred_is) ++fn;
    }
    double prec = tp + fp > 0 ? 100.0 * tp / (tp + fp) : 0.0;
    double rec = tp + fn > 0 ? 100.0 * tp / (tp + fn) : 0.0;
    out.f1[label] = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
  }
  return out;
}

}  // namespace

TEST_CASE("reference per-class arithmetic") {
  // F1 from P=31.82, R=70.00 is 43.75
  double p = 31.82, r = 70.00;
  CHECK(metrics::round2(2 * p * r / (p + r)) == doctest::Approx(43.75));
}

TEST_CASE("macro equals weighted under equal support") {
  // per-class scores with equal support 20 for 5 classes
  std::vector<double> f1s = {43.75, 17.39, 40.00, 50.00, 66.67};
  double macro = 0;
  for (double f : f1s) macro += f;
  macro /= 5.0;
  CHECK(metrics::round2(macro) == doctest::Approx(43.56));
}

TEST_CASE("perfect classifier scores 100 everywhere") {
  std::vector<Prediction> preds;
  for (const std::string& label : kLabels) {
    for (int i = 0; i < 4; ++i) preds.push_back({label, label});
  }
  auto rep = metrics::classification_report(preds, kLabels);
  CHECK(rep.accuracy == doctest::Approx(100.0));
  CHECK(rep.macro_avg.f1 == doctest::Approx(100.0));
  CHECK(rep.weighted_avg.f1 == doctest::Approx(100.0));
  for (const auto& c : rep.per_class) {
    CHECK(c.precision == doctest::Approx(100.0));
    CHECK(c.recall == doctest::Approx(100.0));
    CHECK(c.f1 == doctest::Approx(100.0));
  }
}

TEST_CASE("abstentions score as wrong and are counted") {
  std::vector<Prediction> preds = {
      {"A", "A"}, {"A", std::nullopt}, {"B", "B"}, {"C", "A"}};
  auto rep = metrics::classification_report(preds, kLabels);
  CHECK(rep.abstained == 1);
  CHECK(rep.accuracy == doctest::Approx(50.0));
  // abstention is a miss for A's recall but no false positive anywhere
  CHECK(rep.per_class[0].recall == doctest::Approx(50.0));
}

TEST_CASE("empty input is an error") {
  CHECK_THROWS_AS(metrics::classification_report({}, kLabels), DataError);
  CHECK_THROWS_AS(metrics::joint_report({}), DataError);
}

TEST_CASE("F1 matches the confusion-matrix oracle on random sequences") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Prediction> preds;
    std::size_t n = 1 + rng() % 30;
    for (std::size_t i = 0; i < n; ++i) {
      Prediction p;
      p.gold = kLabels[rng() % kLabels.size()];
      if (rng() % 5 != 0) p.pred = kLabels[rng() % kLabels.size()];
      preds.push_back(p);
    }
    auto rep = metrics::classification_report(preds, kLabels);
    auto oracle = f1_oracle(preds, kLabels);
    for (const auto& c : rep.per_class) {
      CHECK(c.f1 == doctest::Approx(metrics::round2(oracle.f1[c.label])));
    }
  }
}

TEST_CASE("accuracy consistency with per-class recalls (equal support)") {
  // 5 classes, support 20 each, recalls 70/10/55/35/50 -> accuracy 44.00
  std::vector<std::string> labels = {"c1", "c2", "c3", "c4", "c5"};
  std::vector<int> correct = {14, 2, 11, 7, 10};
  std::vector<Prediction> preds;
  for (std::size_t c = 0; c < labels.size(); ++c) {
    for (int i = 0; i < 20; ++i) {
      bool right = i < correct[c];
      preds.push_back({labels[c], right ? labels[c] : labels[(c + 1) % 5]});
    }
  }
  auto rep = metrics::classification_report(preds, labels);
  CHECK(rep.accuracy == doctest::Approx(44.00));
  CHECK(rep.per_class[0].recall == doctest::Approx(70.00));
  CHECK(rep.per_class[1].recall == doctest::Approx(10.00));
}

TEST_CASE("joint report percentages from the documented 10-fill fixture") {
  using entmatch::MatchKind;
  using entmatch::MatchOutcome;
  std::vector<metrics::JointOutcome> outcomes;
  // 5 matched with correct role
  for (int i = 0; i < 5; ++i)
    outcomes.push_back({MatchOutcome{MatchKind::Exact, 1.0, "g"}, true});
  // 1 matched with wrong role
  outcomes.push_back({MatchOutcome{MatchKind::Fuzzy, 0.8, "g"}, false});
  // 2 n/a
  for (int i = 0; i < 2; ++i)
    outcomes.push_back({MatchOutcome{MatchKind::NotApplicable}, std::nullopt});
  // 2 hallucinated
  for (int i = 0; i < 2; ++i)
    outcomes.push_back({MatchOutcome{MatchKind::Hallucination}, std::nullopt});
  auto rep = metrics::joint_report(outcomes, 12);
  CHECK(rep.pct_correct_entity == doctest::Approx(60.0));
  CHECK(rep.pct_hallucination == doctest::Approx(20.0));
  CHECK(rep.pct_correct_role == doctest::Approx(50.0));
  CHECK(rep.total_fills == 10);
  CHECK(rep.total_gold_entities == 12);
  CHECK(rep.pct_correct_role <= rep.pct_correct_entity);

  SUBCASE("adding a hallucination strictly increases its percentage") {
    auto more = outcomes;
    more.push_back({entmatch::MatchOutcome{MatchKind::Hallucination},
                    std::nullopt});
    auto rep2 = metrics::joint_report(more, 12);
    CHECK(rep2.pct_hallucination > rep.pct_hallucination);
  }
  SUBCASE("zero hallucinations") {
    std::vector<metrics::JointOutcome> clean(outcomes.begin(),
                                             outcomes.begin() + 8);
    auto rep3 = metrics::joint_report(clean, 12);
    CHECK(rep3.pct_hallucination == doctest::Approx(0.0));
  }
}
