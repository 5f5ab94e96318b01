#include "mframes/runner.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "mframes/errors.hpp"
#include "mframes/text.hpp"

namespace mframes::runner {

namespace ty = mframes::taxonomy;
namespace cp = mframes::corpus;
namespace pl = mframes::pipeline;

std::optional<Task> parse_task(std::string_view name) {
  if (name == "mf-one-pass") return Task::MfOnePass;
  if (name == "mf-ovr") return Task::MfOvr;
  if (name == "role-one-pass") return Task::RoleOnePass;
  if (name == "role-two-step") return Task::RoleTwoStep;
  if (name == "joint") return Task::Joint;
  return std::nullopt;
}

std::string_view task_name(Task t) {
  switch (t) {
    case Task::MfOnePass: return "mf-one-pass";
    case Task::MfOvr: return "mf-ovr";
    case Task::RoleOnePass: return "role-one-pass";
    case Task::RoleTwoStep: return "role-two-step";
    case Task::Joint: return "joint";
  }
  return "unknown";
}

void validate_shots(Task task, int k) {
  switch (task) {
    case Task::MfOnePass:
    case Task::MfOvr:
      if (k < 0 || k > 5)
        throw ConfigError("MF tasks support 0 to 5 shots, got " +
                          std::to_string(k));
      return;
    case Task::RoleOnePass:
    case Task::RoleTwoStep:
      if (k < 1 || k > 5)
        throw ConfigError(
            "role tasks support 1 to 5 shots, got " + std::to_string(k) +
            " (zero-shot role prompting yields open-ended labels and is "
            "not supported)");
      return;
    case Task::Joint:
      if (k != 1 && k != 3 && k != 5 && k != 7 && k != 10)
        throw ConfigError(
            "joint slot filling supports 1, 3, 5, 7 or 10 shots, got " +
            std::to_string(k) +
            " (zero-shot role prompting yields open-ended labels and is "
            "not supported)");
      return;
  }
}

namespace {

std::vector<std::string> foundation_labels() {
  std::vector<std::string> out;
  for (ty::Foundation f : ty::all_foundations()) out.emplace_back(ty::name(f));
  return out;
}

std::vector<std::string> role_labels() {
  std::vector<std::string> out;
  for (ty::Role r : ty::all_roles()) out.emplace_back(ty::name(r));
  return out;
}

nlohmann::json votes_json(const pl::VoteSet& votes) {
  nlohmann::json j;
  j["total"] = votes.total;
  j["abstentions"] = votes.abstentions;
  nlohmann::json parsed = nlohmann::json::array();
  for (const pl::Vote& v : votes.parsed) {
    parsed.push_back(
        {{"label", v.label}, {"seed", v.seed}, {"sample", v.sample_index}});
  }
  j["parsed"] = parsed;
  return j;
}

nlohmann::json generations_json(const std::vector<client::Completion>& gens) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& g : gens) {
    arr.push_back({{"prompt_hash", g.prompt_hash},
                   {"seed", g.seed},
                   {"sample", g.sample_index},
                   {"text", g.text}});
  }
  return arr;
}

const char* match_kind_name(entmatch::MatchKind k) {
  switch (k) {
    case entmatch::MatchKind::Exact: return "exact";
    case entmatch::MatchKind::Fuzzy: return "fuzzy";
    case entmatch::MatchKind::NotApplicable: return "n/a";
    case entmatch::MatchKind::Hallucination: return "hallucination";
  }
  return "unknown";
}

entmatch::MatchKind parse_match_kind(const std::string& kind, int lineno) {
  if (kind == "exact") return entmatch::MatchKind::Exact;
  if (kind == "fuzzy") return entmatch::MatchKind::Fuzzy;
  if (kind == "n/a") return entmatch::MatchKind::NotApplicable;
  if (kind == "hallucination") return entmatch::MatchKind::Hallucination;
  throw DataError("predictions:" + std::to_string(lineno) +
                  ": unknown match kind: " + kind);
}

// One pipeline invocation: an item, plus an entity for role tasks.
struct WorkUnit {
  const cp::AnnotatedItem* item = nullptr;
  const cp::EntityAnnotation* entity = nullptr;
};

struct UnitOutcome {
  nlohmann::json trace;
  std::vector<std::string> pred_lines;
  std::optional<metrics::Prediction> prediction;
  std::vector<metrics::JointOutcome> joint_outcomes;
  bool failed = false;
};

UnitOutcome process_unit(Task task, const pl::Pipeline& pipeline,
                         const cp::ShotSet& shots, const WorkUnit& unit) {
  const cp::AnnotatedItem& item = *unit.item;
  UnitOutcome out;
  out.trace["task"] = task_name(task);
  out.trace["id"] = item.id;

  auto pred_line = [&](const std::string& gold,
                       const std::optional<std::string>& pred) {
    nlohmann::json rec = {{"id", item.id},
                          {"gold", gold},
                          {"pred", pred ? nlohmann::json(*pred)
                                        : nlohmann::json()}};
    if (unit.entity != nullptr) rec["entity"] = unit.entity->span;
    out.pred_lines.push_back(rec.dump());
  };

  switch (task) {
    case Task::MfOnePass: {
      std::string gold(ty::name(item.foundation));
      metrics::Prediction p{gold, std::nullopt};
      try {
        pl::MfOnePassResult r = pipeline.classify_mf_one_pass(item, shots);
        p.pred = std::string(ty::name(r.label));
        out.trace["prompt_hash"] = text::digest_hex(r.prompt.text);
        out.trace["generations"] = generations_json(r.generations);
        out.trace["votes"] = votes_json(r.votes);
        out.trace["decision"] = *p.pred;
      } catch (const AllAbstainedError& e) {
        out.trace["error"] = e.what();
        out.failed = true;
      }
      pred_line(gold, p.pred);
      out.prediction = std::move(p);
      break;
    }
    case Task::MfOvr: {
      std::string gold(ty::name(item.foundation));
      metrics::Prediction p{gold, std::nullopt};
      try {
        pl::MfOneVsAllResult r = pipeline.classify_mf_one_vs_all(item, shots);
        p.pred = std::string(ty::name(r.label));
        nlohmann::json conf;
        for (ty::Foundation f : ty::all_foundations()) {
          conf[std::string(ty::name(f))] =
              r.confidence[static_cast<std::size_t>(f)];
        }
        out.trace["confidence"] = conf;
        out.trace["tie"] = r.tie == pl::TieKind::None     ? "none"
                           : r.tie == pl::TieKind::TwoWay ? "two-way"
                                                          : "seeded";
        if (r.tiebreak_votes)
          out.trace["tiebreak_votes"] = votes_json(*r.tiebreak_votes);
        nlohmann::json runs = nlohmann::json::array();
        for (const pl::OneVsAllRun& run : r.runs) {
          runs.push_back(
              {{"foundation", std::string(ty::name(run.foundation))},
               {"prompt_hash", text::digest_hex(run.prompt.text)},
               {"matches", run.matches},
               {"generations", generations_json(run.generations)}});
        }
        out.trace["runs"] = runs;
        out.trace["decision"] = *p.pred;
      } catch (const AllAbstainedError& e) {
        out.trace["error"] = e.what();
        out.failed = true;
      }
      pred_line(gold, p.pred);
      out.prediction = std::move(p);
      break;
    }
    case Task::RoleOnePass:
    case Task::RoleTwoStep: {
      const cp::EntityAnnotation& ent = *unit.entity;
      out.trace["entity"] = ent.span;
      std::string gold(ty::name(ent.role));
      metrics::Prediction p{gold, std::nullopt};
      try {
        if (task == Task::RoleOnePass) {
          pl::RoleResult r = pipeline.classify_role_one_pass(
              item, ent.span, item.foundation, shots);
          p.pred = std::string(ty::name(r.label));
          out.trace["generations"] = generations_json(r.generations);
          out.trace["votes"] = votes_json(r.votes);
        } else {
          pl::TwoStepResult r = pipeline.classify_role_two_step(
              item, ent.span, item.foundation, shots);
          p.pred = std::string(ty::name(r.label));
          out.trace["generations"] = generations_json(r.generations);
          out.trace["sentiment_votes"] = votes_json(r.sentiment_votes);
          out.trace["negative_path"] = r.negative_path;
          if (r.role_votes) out.trace["role_votes"] = votes_json(*r.role_votes);
        }
        out.trace["decision"] = *p.pred;
      } catch (const AllAbstainedError& e) {
        out.trace["error"] = e.what();
        out.failed = true;
      }
      pred_line(gold, p.pred);
      out.prediction = std::move(p);
      break;
    }
    case Task::Joint: {
      try {
        pl::JointResult r =
            pipeline.run_joint_slotfill(item, item.foundation, shots);
        out.trace["generations"] = generations_json(r.generations);
        nlohmann::json fills = nlohmann::json::array();
        for (const pl::SlotOutcome& o : r.outcomes) {
          out.joint_outcomes.push_back({o.match, o.role_correct});
          nlohmann::json rec = {
              {"id", item.id},
              {"role", std::string(ty::name(o.role))},
              {"fill", o.fill},
              {"kind", match_kind_name(o.match.kind)},
              {"role_correct", o.role_correct
                                   ? nlohmann::json(*o.role_correct)
                                   : nlohmann::json()}};
          fills.push_back(rec);
          out.pred_lines.push_back(rec.dump());
        }
        out.trace["fills"] = fills;
      } catch (const AllAbstainedError& e) {
        out.trace["error"] = e.what();
        out.failed = true;
      }
      break;
    }
  }
  return out;
}

}  // namespace

RunResult run_task(Task task, const cp::Corpus& test, const cp::ShotSet& shots,
                   const pl::Pipeline& pipeline, int concurrency) {
  validate_shots(task, shots.k);
  bool role_task = task == Task::RoleOnePass || task == Task::RoleTwoStep;

  std::vector<WorkUnit> units;
  for (const cp::AnnotatedItem& item : test.items) {
    if (role_task) {
      for (const cp::EntityAnnotation& ent : item.entities)
        units.push_back({&item, &ent});
    } else {
      units.push_back({&item, nullptr});
    }
  }

  std::vector<UnitOutcome> outcomes(units.size());
  if (concurrency <= 1 || units.size() <= 1) {
    for (std::size_t i = 0; i < units.size(); ++i) {
      outcomes[i] = process_unit(task, pipeline, shots, units[i]);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= units.size()) return;
        try {
          outcomes[i] = process_unit(task, pipeline, shots, units[i]);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> threads;
    int n = std::min<int>(concurrency, static_cast<int>(units.size()));
    for (int t = 0; t < n; ++t) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  // assembly in corpus order regardless of completion order
  RunResult result;
  std::ostringstream traces;
  std::ostringstream preds;
  std::vector<metrics::Prediction> predictions;
  std::vector<metrics::JointOutcome> joint_outcomes;
  for (UnitOutcome& out : outcomes) {
    traces << out.trace.dump() << "\n";
    for (const std::string& line : out.pred_lines) preds << line << "\n";
    if (out.prediction) predictions.push_back(std::move(*out.prediction));
    for (auto& jo : out.joint_outcomes) joint_outcomes.push_back(jo);
    if (out.failed) ++result.failed_items;
  }

  if (task == Task::Joint) {
    if (joint_outcomes.empty())
      throw DataError("joint run produced no fills to score");
    int total_gold = 0;
    for (const cp::AnnotatedItem& item : test.items)
      total_gold += static_cast<int>(item.entities.size());
    metrics::JointReport rep = metrics::joint_report(joint_outcomes, total_gold);
    rep.shots = shots.k;
    result.joint = std::move(rep);
  } else {
    metrics::EvalReport rep = metrics::classification_report(
        predictions, role_task ? role_labels() : foundation_labels());
    rep.strategy = std::string(task_name(task));
    rep.shots = shots.k;
    result.eval = std::move(rep);
  }

  result.traces = traces.str();
  result.predictions = preds.str();
  return result;
}

metrics::EvalReport score_classification(
    const std::string& predictions_jsonl,
    const std::vector<std::string>& labels) {
  std::vector<metrics::Prediction> predictions;
  std::istringstream in(predictions_jsonl);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("predictions:" + std::to_string(lineno) + ": " +
                      e.what());
    }
    metrics::Prediction p;
    p.gold = rec.at("gold").get<std::string>();
    if (rec.contains("pred") && !rec.at("pred").is_null())
      p.pred = rec.at("pred").get<std::string>();
    predictions.push_back(std::move(p));
  }
  if (predictions.empty()) throw DataError("empty prediction file");
  return metrics::classification_report(predictions, labels);
}

metrics::JointReport score_joint(const std::string& predictions_jsonl) {
  std::vector<metrics::JointOutcome> outcomes;
  std::istringstream in(predictions_jsonl);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("predictions:" + std::to_string(lineno) + ": " +
                      e.what());
    }
    metrics::JointOutcome o;
    o.match.kind = parse_match_kind(rec.at("kind").get<std::string>(), lineno);
    if (rec.contains("role_correct") && !rec.at("role_correct").is_null())
      o.role_correct = rec.at("role_correct").get<bool>();
    outcomes.push_back(o);
  }
  if (outcomes.empty()) throw DataError("empty prediction file");
  return metrics::joint_report(outcomes);
}

}  // namespace mframes::runner
