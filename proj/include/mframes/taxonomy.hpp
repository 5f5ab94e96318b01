#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mframes::taxonomy {

/// The five moral foundations. Closed set; values double as indices.
enum class Foundation {
  CareHarm = 0,
  FairnessCheating,
  LoyaltyBetrayal,
  AuthoritySubversion,
  PurityDegradation,
};

inline constexpr int kFoundationCount = 5;

/// The sixteen moral roles, grouped by foundation (3/3/3/4/3).
enum class Role {
  TargetOfCareHarm = 0,
  EntityCausingHarm,
  EntityProvidingCare,
  TargetOfFairnessCheating,
  EntityEnsuringFairness,
  EntityDoingCheating,
  TargetOfLoyaltyBetrayal,
  EntityBeingLoyal,
  EntityDoingBetrayal,
  JustifiedAuthority,
  JustifiedAuthorityOver,
  FailingAuthority,
  FailingAuthorityOver,
  TargetOfPurityDegradation,
  EntityPreservingPurity,
  EntityCausingDegradation,
};

inline constexpr int kRoleCount = 16;

enum class Polarity { Positive, Negative };

std::span<const Foundation> all_foundations();
std::span<const Role> all_roles();

/// Canonical display string, e.g. "Care/Harm", "Entity causing harm".
std::string_view name(Foundation f);
std::string_view name(Role r);

/// Roles of a foundation in canonical order.
std::span<const Role> roles_of(Foundation f);

Foundation foundation_of(Role r);

Polarity role_polarity(Role r);

/// The unique negative-sentiment role of a foundation.
Role negative_role_of(Foundation f);

/// Positive-sentiment roles of a foundation, in canonical order.
std::vector<Role> positive_roles_of(Foundation f);

/// Parses a canonical name or registered alias. Matching is
/// case-insensitive and whitespace-collapsing.
std::optional<Foundation> parse_foundation(std::string_view s);
std::optional<Role> parse_role(std::string_view s);

/// Definition texts shown in prompts. All 5 foundations and all 16 roles
/// are always present and non-empty.
class DefinitionCatalog {
 public:
  /// Bundled default definitions.
  static DefinitionCatalog defaults();

  /// Loads a catalog from a line-delimited file of records with `label`
  /// and `definition` fields. Labels not covered by the file keep the
  /// bundled defaults. Throws on unknown labels or empty definitions.
  static DefinitionCatalog load(const std::string& path);

  const std::string& definition(Foundation f) const;
  const std::string& definition(Role r) const;

  void set_definition(Foundation f, std::string text);
  void set_definition(Role r, std::string text);

 private:
  std::array<std::string, kFoundationCount> foundation_defs_;
  std::array<std::string, kRoleCount> role_defs_;
};

}  // namespace mframes::taxonomy
