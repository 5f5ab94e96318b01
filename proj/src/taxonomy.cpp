#include "mframes/taxonomy.hpp"

#include <fstream>
#include <utility>

#include "json.hpp"
#include "mframes/errors.hpp"
#include "mframes/text.hpp"

namespace mframes::taxonomy {

namespace {

constexpr std::array<Foundation, kFoundationCount> kFoundations = {
    Foundation::CareHarm,         Foundation::FairnessCheating,
    Foundation::LoyaltyBetrayal,  Foundation::AuthoritySubversion,
    Foundation::PurityDegradation,
};

constexpr std::array<Role, kRoleCount> kRoles = {
    Role::TargetOfCareHarm,          Role::EntityCausingHarm,
    Role::EntityProvidingCare,       Role::TargetOfFairnessCheating,
    Role::EntityEnsuringFairness,    Role::EntityDoingCheating,
    Role::TargetOfLoyaltyBetrayal,   Role::EntityBeingLoyal,
    Role::EntityDoingBetrayal,       Role::JustifiedAuthority,
    Role::JustifiedAuthorityOver,    Role::FailingAuthority,
    Role::FailingAuthorityOver,      Role::TargetOfPurityDegradation,
    Role::EntityPreservingPurity,    Role::EntityCausingDegradation,
};

constexpr std::array<const char*, kFoundationCount> kFoundationNames = {
    "Care/Harm",
    "Fairness/Cheating",
    "Loyalty/Betrayal",
    "Authority/Subversion",
    "Purity/Degradation",
};

constexpr std::array<const char*, kRoleCount> kRoleNames = {
    "Target of care/harm",
    "Entity causing harm",
    "Entity providing care",
    "Target of fairness/cheating",
    "Entity ensuring fairness",
    "Entity doing cheating",
    "Target of loyalty/betrayal",
    "Entity being loyal",
    "Entity doing betrayal",
    "Justified authority",
    "Justified authority over",
    "Failing authority",
    "Failing authority over",
    "Target of purity/degradation",
    "Entity preserving purity",
    "Entity causing degradation",
};

struct FoundationSlice {
  int begin;
  int count;
};

constexpr std::array<FoundationSlice, kFoundationCount> kSlices = {{
    {0, 3},   // Care/Harm
    {3, 3},   // Fairness/Cheating
    {6, 3},   // Loyalty/Betrayal
    {9, 4},   // Authority/Subversion
    {13, 3},  // Purity/Degradation
}};

// Prose variants accepted when parsing generated text.
const std::vector<std::pair<const char*, Role>>& role_aliases() {
  static const std::vector<std::pair<const char*, Role>> aliases = {
      {"Entity target of care/harm", Role::TargetOfCareHarm},
      {"Entity violating fairness", Role::EntityDoingCheating},
      {"Entity doing degradation", Role::EntityCausingDegradation},
  };
  return aliases;
}

constexpr std::array<const char*, kFoundationCount> kFoundationDefs = {
    "Care for others, generosity, compassion, ability to feel pain of "
    "others, sensitivity to suffering of others, prohibiting actions that "
    "harm others.",
    "Fairness, justice, reciprocity, reciprocal altruism, rights, autonomy, "
    "equality, proportionality, prohibiting cheating.",
    "Group affiliation and solidarity, virtues of patriotism, "
    "self-sacrifice for the group, prohibiting betrayal of one's group.",
    "Fulfilling social roles, submitting to authority, respect for social "
    "hierarchy/traditions, leadership, prohibiting rebellion against "
    "authority.",
    "Associations with the sacred and holy, disgust, contamination, "
    "religious notions which guide how to live, prohibiting violating the "
    "sacred.",
};

constexpr std::array<const char*, kRoleCount> kRoleDefs = {
    "The entity that receives care or suffers harm.",
    "The entity that inflicts harm on others.",
    "The entity that provides care or protection to others.",
    "The entity that is treated fairly or is cheated.",
    "The entity that upholds fairness, justice, or equal rights.",
    "The entity that cheats, violates fairness, or denies rights.",
    "The entity that receives loyalty or is betrayed.",
    "The entity that shows loyalty or solidarity to its group.",
    "The entity that betrays its group or cause.",
    "The entity exercising legitimate authority or leadership.",
    "The entity over which legitimate authority is exercised.",
    "The entity failing to exercise its authority responsibly.",
    "The entity affected by a failing authority.",
    "The entity that is kept pure or is degraded.",
    "The entity that preserves purity or sanctity.",
    "The entity that causes degradation or violates the sacred.",
};

}  // namespace

std::span<const Foundation> all_foundations() { return kFoundations; }

std::span<const Role> all_roles() { return kRoles; }

std::string_view name(Foundation f) {
  return kFoundationNames[static_cast<std::size_t>(f)];
}

std::string_view name(Role r) {
  return kRoleNames[static_cast<std::size_t>(r)];
}

std::span<const Role> roles_of(Foundation f) {
  const auto& slice = kSlices[static_cast<std::size_t>(f)];
  return std::span<const Role>(kRoles).subspan(
      static_cast<std::size_t>(slice.begin),
      static_cast<std::size_t>(slice.count));
}

Foundation foundation_of(Role r) {
  int idx = static_cast<int>(r);
  for (std::size_t fi = 0; fi < kSlices.size(); ++fi) {
    const auto& slice = kSlices[fi];
    if (idx >= slice.begin && idx < slice.begin + slice.count) {
      return static_cast<Foundation>(fi);
    }
  }
  return Foundation::CareHarm;  // unreachable for valid enum values
}

Polarity role_polarity(Role r) {
  switch (r) {
    case Role::EntityCausingHarm:
    case Role::EntityDoingCheating:
    case Role::EntityDoingBetrayal:
    case Role::FailingAuthority:
    case Role::EntityCausingDegradation:
      return Polarity::Negative;
    default:
      return Polarity::Positive;
  }
}

Role negative_role_of(Foundation f) {
  for (Role r : roles_of(f)) {
    if (role_polarity(r) == Polarity::Negative) return r;
  }
  return Role::EntityCausingHarm;  // unreachable: every foundation has one
}

std::vector<Role> positive_roles_of(Foundation f) {
  std::vector<Role> out;
  for (Role r : roles_of(f)) {
    if (role_polarity(r) == Polarity::Positive) out.push_back(r);
  }
  return out;
}

std::optional<Foundation> parse_foundation(std::string_view s) {
  std::string folded = text::fold(s);
  for (Foundation f : kFoundations) {
    if (folded == text::fold(name(f))) return f;
  }
  return std::nullopt;
}

std::optional<Role> parse_role(std::string_view s) {
  std::string folded = text::fold(s);
  for (Role r : kRoles) {
    if (folded == text::fold(name(r))) return r;
  }
  for (const auto& [alias, r] : role_aliases()) {
    if (folded == text::fold(alias)) return r;
  }
  return std::nullopt;
}

DefinitionCatalog DefinitionCatalog::defaults() {
  DefinitionCatalog cat;
  for (std::size_t i = 0; i < kFoundationDefs.size(); ++i) {
    cat.foundation_defs_[i] = kFoundationDefs[i];
  }
  for (std::size_t i = 0; i < kRoleDefs.size(); ++i) {
    cat.role_defs_[i] = kRoleDefs[i];
  }
  return cat;
}

DefinitionCatalog DefinitionCatalog::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open definition catalog: " + path);
  DefinitionCatalog cat = defaults();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": malformed record: " + e.what());
    }
    if (!rec.contains("label") || !rec.contains("definition")) {
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": record needs `label` and `definition` fields");
    }
    std::string label = rec.at("label").get<std::string>();
    std::string definition = rec.at("definition").get<std::string>();
    if (definition.empty()) {
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": empty definition for label: " + label);
    }
    if (auto f = parse_foundation(label)) {
      cat.set_definition(*f, std::move(definition));
    } else if (auto r = parse_role(label)) {
      cat.set_definition(*r, std::move(definition));
    } else {
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": unknown label: " + label);
    }
  }
  return cat;
}

const std::string& DefinitionCatalog::definition(Foundation f) const {
  return foundation_defs_[static_cast<std::size_t>(f)];
}

const std::string& DefinitionCatalog::definition(Role r) const {
  return role_defs_[static_cast<std::size_t>(r)];
}

void DefinitionCatalog::set_definition(Foundation f, std::string text) {
  foundation_defs_[static_cast<std::size_t>(f)] = std::move(text);
}

void DefinitionCatalog::set_definition(Role r, std::string text) {
  role_defs_[static_cast<std::size_t>(r)] = std::move(text);
}

}  // namespace mframes::taxonomy
