#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mframes/corpus.hpp"
#include "mframes/metrics.hpp"
#include "mframes/pipeline.hpp"

namespace mframes::runner {

enum class Task { MfOnePass, MfOvr, RoleOnePass, RoleTwoStep, Joint };

std::optional<Task> parse_task(std::string_view name);
std::string_view task_name(Task t);

/// k validity per task: 0-5 for MF tasks, 1-5 for role tasks, and
/// {1,3,5,7,10} for joint slot filling. Throws ConfigError otherwise.
void validate_shots(Task task, int k);

struct RunResult {
  std::optional<metrics::EvalReport> eval;
  std::optional<metrics::JointReport> joint;
  std::string traces;       // line-delimited JSON, one record per decision
  std::string predictions;  // line-delimited JSON, rescorable offline
  int failed_items = 0;     // items that raised a per-item error
};

/// Runs a task over every test item (role tasks: every item-entity pair)
/// and aggregates the report. Per-item all-abstained errors are recorded
/// as abstentions; transport errors propagate.
RunResult run_task(Task task, const corpus::Corpus& test,
                   const corpus::ShotSet& shots,
                   const pipeline::Pipeline& pipeline, int concurrency = 1);

/// Rescoring of stored prediction lines, without any generation.
metrics::EvalReport score_classification(const std::string& predictions_jsonl,
                                         const std::vector<std::string>& labels);
metrics::JointReport score_joint(const std::string& predictions_jsonl);

}  // namespace mframes::runner
