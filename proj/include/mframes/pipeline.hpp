#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mframes/client.hpp"
#include "mframes/corpus.hpp"
#include "mframes/entmatch.hpp"
#include "mframes/prompts.hpp"
#include "mframes/taxonomy.hpp"

namespace mframes::pipeline {

struct Vote {
  std::string label;
  int seed = 0;
  int sample_index = 0;
};

/// Parsed labels from repeated generations, in (seed, sample) order.
struct VoteSet {
  std::vector<Vote> parsed;
  int abstentions = 0;
  int total = 0;
};

/// Alias table: folded alias string -> canonical label.
using AliasTable = std::map<std::string, std::string>;

/// Canonical role names plus the registered prose variants.
AliasTable role_alias_table();

/// Maps a generation to the unique candidate whose canonical or alias form
/// matches the first label-like token span; nullopt (abstain) when zero or
/// several distinct candidates match.
std::optional<std::string> parse_label(const std::string& generation,
                                       const std::vector<std::string>& candidates,
                                       const AliasTable& aliases = {});

/// Collects votes from completions; unparseable generations count as
/// abstentions.
VoteSet collect_votes(const std::vector<client::Completion>& completions,
                      const std::vector<std::string>& candidates,
                      const AliasTable& aliases = {});

/// Label with maximum multiplicity; ties break by earliest (seed, sample)
/// occurrence among the tied labels. Throws AllAbstainedError when no vote
/// parsed.
std::string majority_vote(const VoteSet& votes);

struct MfOnePassResult {
  taxonomy::Foundation label;
  VoteSet votes;
  prompts::PromptInstance prompt;
  std::vector<client::Completion> generations;
};

struct OneVsAllRun {
  taxonomy::Foundation foundation;
  VoteSet votes;
  int matches = 0;  // generations naming the foundation
  prompts::PromptInstance prompt;
  std::vector<client::Completion> generations;
};

enum class TieKind { None, TwoWay, Seeded };

struct MfOneVsAllResult {
  taxonomy::Foundation label;
  std::array<double, taxonomy::kFoundationCount> confidence{};
  std::vector<OneVsAllRun> runs;
  TieKind tie = TieKind::None;
  std::optional<VoteSet> tiebreak_votes;
};

struct RoleResult {
  taxonomy::Role label;
  VoteSet votes;
  prompts::PromptInstance prompt;
  std::vector<client::Completion> generations;
};

struct TwoStepResult {
  taxonomy::Role label;
  VoteSet sentiment_votes;
  std::optional<VoteSet> role_votes;  // absent on the negative path
  bool negative_path = false;
  std::vector<client::Completion> generations;  // both steps, concatenated
};

struct SlotFillResult {
  std::map<taxonomy::Role, std::string> fills;  // consolidated, non-empty
  std::string unparsed_remainder;
};

struct SlotOutcome {
  taxonomy::Role role;
  std::string fill;
  entmatch::MatchOutcome match;
  std::optional<bool> role_correct;  // set when the fill matched a gold
};

struct JointResult {
  SlotFillResult slots;
  std::vector<SlotOutcome> outcomes;
  prompts::PromptInstance prompt;
  std::vector<client::Completion> generations;
};

/// Per-generation slot parse, exposed for testing. Lines of the form
/// "<role>: <value>" are collected for roles of f; a first line with no
/// role prefix is read as the value of f's first role; parsing stops at
/// the next "Tweet:" line.
SlotFillResult parse_slot_generation(const std::string& generation,
                                     taxonomy::Foundation f);

struct PipelineOptions {
  client::GenerationConfig gen;
  std::uint64_t tie_seed = 0;
  double match_threshold = 0.6;
};

class Pipeline {
 public:
  Pipeline(const prompts::PromptRenderer& renderer,
           client::CompletionClient& client, PipelineOptions options = {});

  MfOnePassResult classify_mf_one_pass(const corpus::AnnotatedItem& item,
                                       const corpus::ShotSet& shots) const;

  MfOneVsAllResult classify_mf_one_vs_all(const corpus::AnnotatedItem& item,
                                          const corpus::ShotSet& shots) const;

  /// Role tasks reject empty shot sets: zero-shot role prompting yields
  /// open-ended generations that cannot be parsed to the closed label set.
  RoleResult classify_role_one_pass(const corpus::AnnotatedItem& item,
                                    const std::string& entity_span,
                                    taxonomy::Foundation f,
                                    const corpus::ShotSet& shots) const;

  TwoStepResult classify_role_two_step(const corpus::AnnotatedItem& item,
                                       const std::string& entity_span,
                                       taxonomy::Foundation f,
                                       const corpus::ShotSet& shots) const;

  JointResult run_joint_slotfill(const corpus::AnnotatedItem& item,
                                 taxonomy::Foundation f,
                                 const corpus::ShotSet& shots) const;

  const PipelineOptions& options() const { return options_; }

 private:
  void require_shots(const corpus::ShotSet& shots, const char* task) const;

  const prompts::PromptRenderer& renderer_;
  client::CompletionClient& client_;
  PipelineOptions options_;
};

}  // namespace mframes::pipeline
