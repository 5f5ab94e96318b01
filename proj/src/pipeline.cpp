#include "mframes/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <sstream>

#include "mframes/errors.hpp"
#include "mframes/text.hpp"

namespace mframes::pipeline {

namespace ty = mframes::taxonomy;
namespace cp = mframes::corpus;
namespace cl = mframes::client;
namespace pr = mframes::prompts;

AliasTable role_alias_table() {
  AliasTable table;
  for (ty::Role r : ty::all_roles()) {
    table[text::fold(ty::name(r))] = std::string(ty::name(r));
  }
  // prose variants
  table[text::fold("Entity target of care/harm")] =
      std::string(ty::name(ty::Role::TargetOfCareHarm));
  table[text::fold("Entity violating fairness")] =
      std::string(ty::name(ty::Role::EntityDoingCheating));
  table[text::fold("Entity doing degradation")] =
      std::string(ty::name(ty::Role::EntityCausingDegradation));
  return table;
}

namespace {

std::string first_nonempty_line(const std::string& s) {
  std::istringstream in(s);
  std::string line;
  while (std::getline(in, line)) {
    if (!text::fold(line).empty()) return line;
  }
  return "";
}

bool boundary_prefix(const std::string& haystack, const std::string& needle) {
  if (needle.empty() || haystack.size() < needle.size()) return false;
  if (haystack.compare(0, needle.size(), needle) != 0) return false;
  if (haystack.size() == needle.size()) return true;
  unsigned char next = static_cast<unsigned char>(haystack[needle.size()]);
  return !std::isalnum(next);
}

}  // namespace

std::optional<std::string> parse_label(
    const std::string& generation, const std::vector<std::string>& candidates,
    const AliasTable& aliases) {
  std::string line = text::fold(first_nonempty_line(generation));
  if (line.empty()) return std::nullopt;

  // (candidate, matched form length); the maximal span wins
  std::vector<std::pair<const std::string*, std::size_t>> matches;
  auto try_form = [&](const std::string& form, const std::string& candidate) {
    if (boundary_prefix(line, form)) {
      for (const std::string& c : candidates) {
        if (c == candidate) {
          matches.emplace_back(&c, form.size());
          return;
        }
      }
    }
  };
  for (const std::string& candidate : candidates) {
    try_form(text::fold(candidate), candidate);
  }
  for (const auto& [alias, canonical] : aliases) {
    try_form(alias, canonical);
  }
  if (matches.empty()) return std::nullopt;
  std::size_t longest = 0;
  for (const auto& [c, len] : matches) longest = std::max(longest, len);
  const std::string* winner = nullptr;
  for (const auto& [c, len] : matches) {
    if (len != longest) continue;
    if (winner != nullptr && *winner != *c) return std::nullopt;  // ambiguous
    winner = c;
  }
  return *winner;
}

VoteSet collect_votes(const std::vector<cl::Completion>& completions,
                      const std::vector<std::string>& candidates,
                      const AliasTable& aliases) {
  VoteSet votes;
  votes.total = static_cast<int>(completions.size());
  for (const cl::Completion& c : completions) {
    if (auto label = parse_label(c.text, candidates, aliases)) {
      votes.parsed.push_back({*label, c.seed, c.sample_index});
    } else {
      ++votes.abstentions;
    }
  }
  return votes;
}

std::string majority_vote(const VoteSet& votes) {
  if (votes.parsed.empty())
    throw AllAbstainedError("all " + std::to_string(votes.total) +
                            " generations abstained");
  // first-occurrence order doubles as the tie rule: votes arrive sorted by
  // (seed, sample_index)
  std::vector<std::pair<std::string, int>> counts;
  for (const Vote& v : votes.parsed) {
    auto it = std::find_if(counts.begin(), counts.end(),
                           [&](const auto& p) { return p.first == v.label; });
    if (it == counts.end()) {
      counts.emplace_back(v.label, 1);
    } else {
      ++it->second;
    }
  }
  const std::pair<std::string, int>* best = &counts.front();
  for (const auto& entry : counts) {
    if (entry.second > best->second) best = &entry;
  }
  return best->first;
}

Pipeline::Pipeline(const pr::PromptRenderer& renderer,
                   cl::CompletionClient& client, PipelineOptions options)
    : renderer_(renderer), client_(client), options_(std::move(options)) {
  options_.gen.validate();
}

void Pipeline::require_shots(const cp::ShotSet& shots, const char* task) const {
  if (shots.empty()) {
    throw ConfigError(std::string(task) +
                      ": zero-shot prompting is not supported for "
                      "role-bearing tasks; provide at least one shot per "
                      "class");
  }
}

namespace {

std::vector<std::string> foundation_candidates() {
  std::vector<std::string> out;
  for (ty::Foundation f : ty::all_foundations())
    out.emplace_back(ty::name(f));
  return out;
}

std::vector<std::string> role_candidates(std::span<const ty::Role> roles) {
  std::vector<std::string> out;
  for (ty::Role r : roles) out.emplace_back(ty::name(r));
  return out;
}

}  // namespace

MfOnePassResult Pipeline::classify_mf_one_pass(
    const cp::AnnotatedItem& item, const cp::ShotSet& shots) const {
  MfOnePassResult res;
  res.prompt = renderer_.render_mf_one_pass(shots, item);
  res.generations = cl::generate_all(client_, res.prompt, options_.gen);
  res.votes = collect_votes(res.generations, foundation_candidates());
  std::string winner = majority_vote(res.votes);
  res.label = *ty::parse_foundation(winner);
  return res;
}

MfOneVsAllResult Pipeline::classify_mf_one_vs_all(
    const cp::AnnotatedItem& item, const cp::ShotSet& shots) const {
  MfOneVsAllResult res;
  std::array<int, ty::kFoundationCount> match_counts{};
  for (ty::Foundation f : ty::all_foundations()) {
    OneVsAllRun run;
    run.foundation = f;
    run.prompt = renderer_.render_mf_one_vs_all(shots, item, f);
    run.generations = cl::generate_all(client_, run.prompt, options_.gen);
    std::vector<std::string> candidates = {std::string(ty::name(f)),
                                           pr::kOtherLabel};
    run.votes = collect_votes(run.generations, candidates);
    for (const Vote& v : run.votes.parsed) {
      if (v.label == ty::name(f)) ++run.matches;
    }
    // abstentions stay in the denominator: confidence is over all
    // generations of this foundation's run
    std::size_t fi = static_cast<std::size_t>(f);
    match_counts[fi] = run.matches;
    res.confidence[fi] =
        run.votes.total > 0
            ? static_cast<double>(run.matches) / run.votes.total
            : 0.0;
    res.runs.push_back(std::move(run));
  }

  int best = *std::max_element(match_counts.begin(), match_counts.end());
  std::vector<ty::Foundation> leaders;
  for (ty::Foundation f : ty::all_foundations()) {
    if (match_counts[static_cast<std::size_t>(f)] == best)
      leaders.push_back(f);
  }

  if (leaders.size() == 1) {
    res.label = leaders.front();
    return res;
  }
  if (leaders.size() == 2) {
    res.tie = TieKind::TwoWay;
    pr::PromptInstance tb =
        renderer_.render_mf_tiebreak(shots, item, leaders[0], leaders[1]);
    auto generations = cl::generate_all(client_, tb, options_.gen);
    std::vector<std::string> candidates = {std::string(ty::name(leaders[0])),
                                           std::string(ty::name(leaders[1]))};
    VoteSet votes = collect_votes(generations, candidates);
    std::string winner = majority_vote(votes);
    res.tiebreak_votes = std::move(votes);
    res.label = *ty::parse_foundation(winner);
    return res;
  }
  // three or more leaders: seeded uniform choice, stable per item
  res.tie = TieKind::Seeded;
  std::mt19937_64 rng(options_.tie_seed ^ text::fnv1a(item.id));
  res.label = leaders[static_cast<std::size_t>(rng() % leaders.size())];
  return res;
}

RoleResult Pipeline::classify_role_one_pass(const cp::AnnotatedItem& item,
                                            const std::string& entity_span,
                                            ty::Foundation f,
                                            const cp::ShotSet& shots) const {
  require_shots(shots, "role-one-pass");
  RoleResult res;
  res.prompt = renderer_.render_role_one_pass(shots, item, entity_span, f);
  res.generations = cl::generate_all(client_, res.prompt, options_.gen);
  res.votes = collect_votes(res.generations, role_candidates(ty::roles_of(f)),
                            role_alias_table());
  std::string winner = majority_vote(res.votes);
  res.label = *ty::parse_role(winner);
  return res;
}

TwoStepResult Pipeline::classify_role_two_step(
    const cp::AnnotatedItem& item, const std::string& entity_span,
    ty::Foundation f, const cp::ShotSet& shots) const {
  require_shots(shots, "role-two-step");
  TwoStepResult res;
  pr::PromptInstance step1 =
      renderer_.render_role_sentiment(shots, item, entity_span);
  auto gen1 = cl::generate_all(client_, step1, options_.gen);
  res.sentiment_votes = collect_votes(gen1, {"positive", "negative"});
  std::string sentiment = majority_vote(res.sentiment_votes);
  res.generations = gen1;
  if (sentiment == "negative") {
    res.negative_path = true;
    res.label = ty::negative_role_of(f);
    return res;
  }
  pr::PromptInstance step2 =
      renderer_.render_role_positive(shots, item, entity_span, f);
  auto gen2 = cl::generate_all(client_, step2, options_.gen);
  std::vector<ty::Role> positive = ty::positive_roles_of(f);
  std::vector<std::string> candidates;
  for (ty::Role r : positive) candidates.emplace_back(ty::name(r));
  VoteSet votes = collect_votes(gen2, candidates, role_alias_table());
  std::string winner = majority_vote(votes);
  res.role_votes = std::move(votes);
  res.label = *ty::parse_role(winner);
  res.generations.insert(res.generations.end(), gen2.begin(), gen2.end());
  return res;
}

SlotFillResult parse_slot_generation(const std::string& generation,
                                     ty::Foundation f) {
  SlotFillResult out;
  auto roles = ty::roles_of(f);
  AliasTable aliases = role_alias_table();

  std::istringstream in(generation);
  std::string line;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    std::string folded = text::fold(line);
    if (folded.empty()) continue;
    if (folded.rfind("tweet:", 0) == 0) break;  // next example starts
    std::size_t colon = line.find(':');
    std::optional<ty::Role> role;
    std::string value;
    if (colon != std::string::npos) {
      std::string head = text::fold(line.substr(0, colon));
      auto it = aliases.find(head);
      if (it != aliases.end()) role = ty::parse_role(it->second);
      if (role) value = line.substr(colon + 1);
    }
    if (!role && first_content_line) {
      // continuation of the prompt's dangling first slot
      role = roles.front();
      value = line;
    }
    first_content_line = false;
    if (!role || ty::foundation_of(*role) != f) {
      if (!out.unparsed_remainder.empty()) out.unparsed_remainder += "\n";
      out.unparsed_remainder += line;
      continue;
    }
    // trim
    std::size_t b = value.find_first_not_of(" \t");
    std::size_t e = value.find_last_not_of(" \t\r");
    value = b == std::string::npos ? "" : value.substr(b, e - b + 1);
    if (value.empty() || text::fold(value) == text::fold(pr::kEmptySlot))
      continue;
    // keep the first mention of a slot within one generation
    out.fills.emplace(*role, value);
  }
  return out;
}

JointResult Pipeline::run_joint_slotfill(const cp::AnnotatedItem& item,
                                         ty::Foundation f,
                                         const cp::ShotSet& shots) const {
  require_shots(shots, "joint-slotfill");
  JointResult res;
  res.prompt = renderer_.render_joint_slotfill(shots, item, f);
  res.generations = cl::generate_all(client_, res.prompt, options_.gen);

  bool any_parsed = false;
  // slot-wise majority across generations; votes keyed by normalized fill
  struct FillVotes {
    std::vector<std::pair<std::string, std::string>> order;  // norm -> raw
    std::map<std::string, int> counts;
  };
  std::map<ty::Role, FillVotes> per_slot;
  for (const cl::Completion& c : res.generations) {
    SlotFillResult parsed = parse_slot_generation(c.text, f);
    if (!parsed.fills.empty()) any_parsed = true;
    for (const auto& [role, raw] : parsed.fills) {
      std::string norm = entmatch::normalize(raw);
      if (norm.empty()) continue;
      FillVotes& fv = per_slot[role];
      if (fv.counts.find(norm) == fv.counts.end()) {
        fv.order.emplace_back(norm, raw);
      }
      ++fv.counts[norm];
    }
  }
  if (!any_parsed) {
    throw AllAbstainedError("joint slot filling: no parseable slot structure "
                            "in any generation for item " + item.id);
  }

  for (const auto& [role, fv] : per_slot) {
    const std::pair<std::string, std::string>* best = nullptr;
    int best_count = 0;
    for (const auto& entry : fv.order) {  // earliest-first tie rule
      int count = fv.counts.at(entry.first);
      if (count > best_count) {
        best = &entry;
        best_count = count;
      }
    }
    if (best != nullptr) res.slots.fills[role] = best->second;
  }

  std::vector<std::string> golds;
  for (const cp::EntityAnnotation& e : item.entities) golds.push_back(e.span);

  for (const auto& [role, fill] : res.slots.fills) {
    SlotOutcome outcome;
    outcome.role = role;
    outcome.fill = fill;
    outcome.match = entmatch::match_entity(fill, golds, item.text,
                                           options_.match_threshold);
    if (outcome.match.matched() && outcome.match.matched_gold) {
      bool correct = false;
      for (const cp::EntityAnnotation& e : item.entities) {
        if (e.span == *outcome.match.matched_gold && e.role == role)
          correct = true;
      }
      outcome.role_correct = correct;
    }
    res.outcomes.push_back(std::move(outcome));
  }
  return res;
}

}  // namespace mframes::pipeline
