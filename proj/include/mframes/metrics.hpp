#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mframes/entmatch.hpp"

namespace mframes::metrics {

/// Rounds a percentage to 2 decimals, half-up.
double round2(double pct);

struct ClassReport {
  std::string label;
  double precision = 0.0;  // percent
  double recall = 0.0;
  double f1 = 0.0;
  int support = 0;
};

struct EvalReport {
  std::vector<ClassReport> per_class;
  double accuracy = 0.0;
  ClassReport macro_avg;     // label = "Macro Average", support = total
  ClassReport weighted_avg;  // label = "Weighted Average"
  int total = 0;
  int abstained = 0;  // predictions with no parseable label
  std::string strategy;
  int shots = 0;

  std::string to_table() const;
  std::string to_csv() const;
  std::string to_json() const;
};

struct JointReport {
  double pct_correct_entity = 0.0;
  double pct_hallucination = 0.0;
  double pct_correct_role = 0.0;
  int total_fills = 0;        // denominator, recorded explicitly
  int total_gold_entities = 0;
  double gold_entity_recall = 0.0;  // secondary: matched golds / golds
  int shots = 0;

  std::string to_table() const;
  std::string to_json() const;
};

struct Prediction {
  std::string gold;
  std::optional<std::string> pred;  // nullopt = abstained, scored wrong
};

/// Multi-class one-vs-rest precision/recall/F1 over a closed label set.
/// `labels` fixes the class order of the report; every gold must be in it.
EvalReport classification_report(const std::vector<Prediction>& preds,
                                 const std::vector<std::string>& labels);

struct JointOutcome {
  entmatch::MatchOutcome match;
  std::optional<bool> role_correct;  // only meaningful for matched fills
};

JointReport joint_report(const std::vector<JointOutcome>& outcomes,
                         int total_gold_entities = 0);

}  // namespace mframes::metrics
