#include "mframes/prompts.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>

#include "mframes/errors.hpp"
#include "mframes/text.hpp"

namespace mframes::prompts {

namespace ty = mframes::taxonomy;
namespace cp = mframes::corpus;

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::MfOnePass: return "mf-one-pass";
    case Strategy::MfOneVsAll: return "mf-one-vs-all";
    case Strategy::MfTieBreak: return "mf-tiebreak";
    case Strategy::RoleOnePass: return "role-one-pass";
    case Strategy::RoleSentiment: return "role-sentiment";
    case Strategy::RolePositiveOnly: return "role-positive";
    case Strategy::JointSlotFill: return "joint-slotfill";
  }
  return "unknown";
}

namespace {

const std::map<std::string, std::string>& default_templates() {
  static const std::map<std::string, std::string> defaults = {
      {"mf_one_pass",
       "Identify the moral foundation expressed in each tweet. The possible "
       "moral foundations are:\n\n{definitions}\n\n{examples}Tweet: "
       "{target}\nMoral foundation:"},
      {"mf_one_vs_all",
       "Decide whether the tweet expresses the moral foundation "
       "{foundation}. Answer with {foundation} or Other.\n\n{definitions}\n\n"
       "{examples}Tweet: {target}\nMoral foundation:"},
      {"mf_tiebreak",
       "Identify which of the two moral foundations is expressed in each "
       "tweet.\n\n{definitions}\n\n{examples}Tweet: {target}\nMoral "
       "foundation:"},
      {"role_one_pass",
       "Identify the moral role of the entity mentioned in each tweet. The "
       "possible moral roles are:\n\n{definitions}\n\n{examples}Tweet: "
       "{target}\nEntity: {entity}\nMoral role:"},
      {"role_sentiment",
       "Identify whether the sentiment expressed towards the entity in each "
       "tweet is positive or negative.\n\n{examples}Tweet: {target}\nEntity: "
       "{entity}\nSentiment:"},
      {"role_positive",
       "Identify the moral role of the entity mentioned in each tweet. The "
       "possible moral roles are:\n\n{definitions}\n\n{examples}Tweet: "
       "{target}\nEntity: {entity}\nMoral role:"},
      {"joint_slotfill",
       "For each tweet, fill every moral role slot with an entity mentioned "
       "in the tweet, or N/A if no entity has that role. The moral roles "
       "are:\n\n{definitions}\n\n{examples}Tweet: {target}\n{slots}"},
  };
  return defaults;
}

std::string substitute(std::string tmpl,
                       const std::map<std::string, std::string>& vars) {
  for (const auto& [key, value] : vars) {
    std::string token = "{" + key + "}";
    std::size_t pos = 0;
    while ((pos = tmpl.find(token, pos)) != std::string::npos) {
      tmpl.replace(pos, token.size(), value);
      pos += value.size();
    }
  }
  return tmpl;
}

std::string foundation_definitions(const ty::DefinitionCatalog& catalog,
                                   std::span<const ty::Foundation> fs) {
  std::string out;
  for (ty::Foundation f : fs) {
    if (!out.empty()) out += "\n";
    out += std::string(ty::name(f)) + ": " + catalog.definition(f);
  }
  return out;
}

std::string role_definitions(const ty::DefinitionCatalog& catalog,
                             const std::vector<ty::Role>& roles) {
  std::string out;
  for (ty::Role r : roles) {
    if (!out.empty()) out += "\n";
    out += std::string(ty::name(r)) + ": " + catalog.definition(r);
  }
  return out;
}

// First gold entity span for a role, or the empty-slot marker.
std::string slot_value(const cp::AnnotatedItem& item, ty::Role role) {
  for (const cp::EntityAnnotation& e : item.entities) {
    if (e.role == role) return e.span;
  }
  return kEmptySlot;
}

}  // namespace

TemplateSet TemplateSet::defaults() {
  TemplateSet ts;
  ts.templates_ = default_templates();
  return ts;
}

TemplateSet TemplateSet::load(const std::string& dir) {
  TemplateSet ts = defaults();
  for (const std::string& name : names()) {
    std::filesystem::path p = std::filesystem::path(dir) / (name + ".txt");
    if (!std::filesystem::exists(p)) continue;
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError("cannot open template file: " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string content = buf.str();
    // trailing newline from the file is not part of the template
    if (!content.empty() && content.back() == '\n') content.pop_back();
    ts.templates_[name] = content;
  }
  return ts;
}

const std::vector<std::string>& TemplateSet::names() {
  static const std::vector<std::string> n = {
      "mf_one_pass",   "mf_one_vs_all", "mf_tiebreak",    "role_one_pass",
      "role_sentiment", "role_positive", "joint_slotfill",
  };
  return n;
}

const std::string& TemplateSet::get(const std::string& name) const {
  auto it = templates_.find(name);
  if (it == templates_.end())
    throw ConfigError("unknown prompt template: " + name);
  return it->second;
}

void TemplateSet::set(std::string name, std::string text) {
  templates_[std::move(name)] = std::move(text);
}

std::string TemplateSet::content_hash() const {
  std::string all;
  for (const auto& [name, tmpl] : templates_) {
    all += name;
    all += '\0';
    all += tmpl;
    all += '\0';
  }
  return text::digest_hex(all);
}

std::vector<const cp::AnnotatedItem*> round_robin_shots(
    const cp::ShotSet& shots) {
  std::vector<const cp::AnnotatedItem*> out;
  std::size_t max_len = 0;
  for (const auto& cls : shots.by_class) max_len = std::max(max_len, cls.size());
  for (std::size_t i = 0; i < max_len; ++i) {
    for (const auto& cls : shots.by_class) {
      if (i < cls.size()) out.push_back(&cls[i]);
    }
  }
  return out;
}

PromptRenderer::PromptRenderer(ty::DefinitionCatalog catalog,
                               TemplateSet templates, std::size_t token_budget)
    : catalog_(std::move(catalog)),
      templates_(std::move(templates)),
      token_budget_(token_budget) {}

PromptInstance PromptRenderer::finish(PromptInstance inst) const {
  inst.token_estimate = text::token_estimate(inst.text);
  if (token_budget_ > 0 && inst.token_estimate > token_budget_) {
    throw ConfigError("prompt exceeds token budget: " +
                      std::to_string(inst.token_estimate) + " > " +
                      std::to_string(token_budget_) + " (" +
                      std::string(strategy_name(inst.strategy)) + ", target " +
                      inst.target_id + ")");
  }
  return inst;
}

PromptInstance PromptRenderer::render_mf_one_pass(
    const cp::ShotSet& shots, const cp::AnnotatedItem& target) const {
  if (target.text.empty()) throw DataError("target text is empty");
  PromptInstance inst;
  inst.strategy = Strategy::MfOnePass;
  inst.target_id = target.id;
  std::string examples;
  for (const cp::AnnotatedItem* shot : round_robin_shots(shots)) {
    examples += "Tweet: " + shot->text + "\nMoral foundation: " +
                std::string(ty::name(shot->foundation)) + "\n\n";
    inst.shot_ids.push_back(shot->id);
  }
  inst.text = substitute(
      templates_.get("mf_one_pass"),
      {{"definitions",
        foundation_definitions(catalog_, ty::all_foundations())},
       {"examples", examples},
       {"target", target.text}});
  return finish(std::move(inst));
}

PromptInstance PromptRenderer::render_mf_one_vs_all(
    const cp::ShotSet& shots, const cp::AnnotatedItem& target,
    ty::Foundation f) const {
  if (target.text.empty()) throw DataError("target text is empty");
  PromptInstance inst;
  inst.strategy = Strategy::MfOneVsAll;
  inst.target_id = target.id;
  inst.foundation = f;
  std::string examples;
  for (const cp::AnnotatedItem* shot : round_robin_shots(shots)) {
    std::string label =
        shot->foundation == f ? std::string(ty::name(f)) : kOtherLabel;
    examples += "Tweet: " + shot->text + "\nMoral foundation: " + label +
                "\n\n";
    inst.shot_ids.push_back(shot->id);
  }
  std::array<ty::Foundation, 1> only = {f};
  inst.text = substitute(templates_.get("mf_one_vs_all"),
                         {{"definitions",
                           foundation_definitions(catalog_, only)},
                          {"examples", examples},
                          {"target", target.text},
                          {"foundation", std::string(ty::name(f))}});
  return finish(std::move(inst));
}

PromptInstance PromptRenderer::render_mf_tiebreak(
    const cp::ShotSet& shots, const cp::AnnotatedItem& target,
    ty::Foundation f1, ty::Foundation f2) const {
  if (f1 == f2) throw ConfigError("tie-break needs two distinct foundations");
  if (target.text.empty()) throw DataError("target text is empty");
  // canonical order keeps symmetric inputs byte-identical
  if (static_cast<int>(f2) < static_cast<int>(f1)) std::swap(f1, f2);
  PromptInstance inst;
  inst.strategy = Strategy::MfTieBreak;
  inst.target_id = target.id;
  inst.foundation = f1;
  inst.foundation2 = f2;
  std::string examples;
  for (const cp::AnnotatedItem* shot : round_robin_shots(shots)) {
    if (shot->foundation != f1 && shot->foundation != f2) continue;
    examples += "Tweet: " + shot->text + "\nMoral foundation: " +
                std::string(ty::name(shot->foundation)) + "\n\n";
    inst.shot_ids.push_back(shot->id);
  }
  std::array<ty::Foundation, 2> pair = {f1, f2};
  inst.text = substitute(templates_.get("mf_tiebreak"),
                         {{"definitions",
                           foundation_definitions(catalog_, pair)},
                          {"examples", examples},
                          {"target", target.text}});
  return finish(std::move(inst));
}

PromptInstance PromptRenderer::render_role_one_pass(
    const cp::ShotSet& shots, const cp::AnnotatedItem& target,
    const std::string& entity_span, ty::Foundation f) const {
  if (target.text.empty()) throw DataError("target text is empty");
  if (entity_span.empty()) throw DataError("entity span is empty");
  PromptInstance inst;
  inst.strategy = Strategy::RoleOnePass;
  inst.target_id = target.id;
  inst.entity_span = entity_span;
  inst.foundation = f;
  std::string examples;
  // shots restricted to exemplars of foundation f; one block per entity pair
  for (const cp::AnnotatedItem& shot :
       shots.by_class[static_cast<std::size_t>(f)]) {
    for (const cp::EntityAnnotation& e : shot.entities) {
      examples += "Tweet: " + shot.text + "\nEntity: " + e.span +
                  "\nMoral role: " + std::string(ty::name(e.role)) + "\n\n";
    }
    inst.shot_ids.push_back(shot.id);
  }
  std::vector<ty::Role> roles(ty::roles_of(f).begin(), ty::roles_of(f).end());
  inst.text = substitute(templates_.get("role_one_pass"),
                         {{"definitions", role_definitions(catalog_, roles)},
                          {"examples", examples},
                          {"target", target.text},
                          {"entity", entity_span}});
  return finish(std::move(inst));
}

PromptInstance PromptRenderer::render_role_sentiment(
    const cp::ShotSet& shots, const cp::AnnotatedItem& target,
    const std::string& entity_span) const {
  if (target.text.empty()) throw DataError("target text is empty");
  if (entity_span.empty()) throw DataError("entity span is empty");
  PromptInstance inst;
  inst.strategy = Strategy::RoleSentiment;
  inst.target_id = target.id;
  inst.entity_span = entity_span;
  std::string examples;
  for (const cp::AnnotatedItem* shot : round_robin_shots(shots)) {
    for (const cp::EntityAnnotation& e : shot->entities) {
      std::string label =
          ty::role_polarity(e.role) == ty::Polarity::Negative ? "negative"
                                                              : "positive";
      examples += "Tweet: " + shot->text + "\nEntity: " + e.span +
                  "\nSentiment: " + label + "\n\n";
    }
    inst.shot_ids.push_back(shot->id);
  }
  inst.text = substitute(templates_.get("role_sentiment"),
                         {{"examples", examples},
                          {"target", target.text},
                          {"entity", entity_span}});
  return finish(std::move(inst));
}

PromptInstance PromptRenderer::render_role_positive(
    const cp::ShotSet& shots, const cp::AnnotatedItem& target,
    const std::string& entity_span, ty::Foundation f) const {
  if (target.text.empty()) throw DataError("target text is empty");
  if (entity_span.empty()) throw DataError("entity span is empty");
  PromptInstance inst;
  inst.strategy = Strategy::RolePositiveOnly;
  inst.target_id = target.id;
  inst.entity_span = entity_span;
  inst.foundation = f;
  std::string examples;
  for (const cp::AnnotatedItem& shot :
       shots.by_class[static_cast<std::size_t>(f)]) {
    bool used = false;
    for (const cp::EntityAnnotation& e : shot.entities) {
      if (ty::role_polarity(e.role) != ty::Polarity::Positive) continue;
      examples += "Tweet: " + shot.text + "\nEntity: " + e.span +
                  "\nMoral role: " + std::string(ty::name(e.role)) + "\n\n";
      used = true;
    }
    if (used) inst.shot_ids.push_back(shot.id);
  }
  inst.text = substitute(
      templates_.get("role_positive"),
      {{"definitions", role_definitions(catalog_, ty::positive_roles_of(f))},
       {"examples", examples},
       {"target", target.text},
       {"entity", entity_span}});
  return finish(std::move(inst));
}

PromptInstance PromptRenderer::render_joint_slotfill(
    const cp::ShotSet& shots, const cp::AnnotatedItem& target,
    ty::Foundation f) const {
  if (target.text.empty()) throw DataError("target text is empty");
  PromptInstance inst;
  inst.strategy = Strategy::JointSlotFill;
  inst.target_id = target.id;
  inst.foundation = f;
  auto roles = ty::roles_of(f);
  std::string examples;
  for (const cp::AnnotatedItem& shot :
       shots.by_class[static_cast<std::size_t>(f)]) {
    examples += "Tweet: " + shot.text + "\n";
    for (ty::Role r : roles) {
      examples +=
          std::string(ty::name(r)) + ": " + slot_value(shot, r) + "\n";
    }
    examples += "\n";
    inst.shot_ids.push_back(shot.id);
  }
  // the generation completes the first slot and continues with the rest
  std::string slots = std::string(ty::name(roles.front())) + ":";
  std::vector<ty::Role> role_vec(roles.begin(), roles.end());
  inst.text = substitute(templates_.get("joint_slotfill"),
                         {{"definitions", role_definitions(catalog_, role_vec)},
                          {"examples", examples},
                          {"target", target.text},
                          {"slots", slots}});
  return finish(std::move(inst));
}

}  // namespace mframes::prompts
