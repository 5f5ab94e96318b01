#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mframes/corpus.hpp"
#include "mframes/taxonomy.hpp"

namespace mframes::prompts {

enum class Strategy {
  MfOnePass,
  MfOneVsAll,
  MfTieBreak,
  RoleOnePass,
  RoleSentiment,
  RolePositiveOnly,
  JointSlotFill,
};

std::string_view strategy_name(Strategy s);

struct PromptInstance {
  Strategy strategy;
  std::string text;
  std::vector<std::string> shot_ids;
  std::string target_id;
  std::string entity_span;  // role strategies only
  std::optional<taxonomy::Foundation> foundation;
  std::optional<taxonomy::Foundation> foundation2;  // tie-break only
  std::size_t token_estimate = 0;
};

/// Named prompt templates with `{definitions}`, `{examples}`, `{target}`,
/// `{entity}`, `{slots}` and `{foundation}` placeholders.
class TemplateSet {
 public:
  static TemplateSet defaults();
  /// Overrides defaults from <name>.txt files in a directory.
  static TemplateSet load(const std::string& dir);

  const std::string& get(const std::string& name) const;
  void set(std::string name, std::string text);
  /// fnv1a digest over all templates, for run manifests.
  std::string content_hash() const;

  static const std::vector<std::string>& names();

 private:
  std::map<std::string, std::string> templates_;
};

/// Label shown for non-matching shots in one-vs-all prompts.
inline constexpr const char* kOtherLabel = "Other";
/// Marker for an empty slot in joint slot-filling prompts.
inline constexpr const char* kEmptySlot = "N/A";

inline constexpr std::size_t kDefaultTokenBudget = 2048;

class PromptRenderer {
 public:
  PromptRenderer(taxonomy::DefinitionCatalog catalog,
                 TemplateSet templates = TemplateSet::defaults(),
                 std::size_t token_budget = kDefaultTokenBudget);

  PromptInstance render_mf_one_pass(const corpus::ShotSet& shots,
                                    const corpus::AnnotatedItem& target) const;

  PromptInstance render_mf_one_vs_all(const corpus::ShotSet& shots,
                                      const corpus::AnnotatedItem& target,
                                      taxonomy::Foundation f) const;

  PromptInstance render_mf_tiebreak(const corpus::ShotSet& shots,
                                    const corpus::AnnotatedItem& target,
                                    taxonomy::Foundation f1,
                                    taxonomy::Foundation f2) const;

  PromptInstance render_role_one_pass(const corpus::ShotSet& shots,
                                      const corpus::AnnotatedItem& target,
                                      const std::string& entity_span,
                                      taxonomy::Foundation f) const;

  PromptInstance render_role_sentiment(const corpus::ShotSet& shots,
                                       const corpus::AnnotatedItem& target,
                                       const std::string& entity_span) const;

  PromptInstance render_role_positive(const corpus::ShotSet& shots,
                                      const corpus::AnnotatedItem& target,
                                      const std::string& entity_span,
                                      taxonomy::Foundation f) const;

  PromptInstance render_joint_slotfill(const corpus::ShotSet& shots,
                                       const corpus::AnnotatedItem& target,
                                       taxonomy::Foundation f) const;

  const TemplateSet& templates() const { return templates_; }
  std::size_t token_budget() const { return token_budget_; }

 private:
  PromptInstance finish(PromptInstance inst) const;

  taxonomy::DefinitionCatalog catalog_;
  TemplateSet templates_;
  std::size_t token_budget_;
};

/// Shot items interleaved round-robin across classes in fixed label order,
/// then by shot index.
std::vector<const corpus::AnnotatedItem*> round_robin_shots(
    const corpus::ShotSet& shots);

}  // namespace mframes::prompts
