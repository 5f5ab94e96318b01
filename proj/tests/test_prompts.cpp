#include "doctest.h"

#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mframes/corpus.hpp"
#include "mframes/errors.hpp"
#include "mframes/prompts.hpp"

using namespace mframes;
namespace ty = mframes::taxonomy;

namespace {

const std::string kRoot = MFRAMES_SOURCE_DIR;

corpus::Split fixture_split() {
  static corpus::Corpus c = corpus::load_corpus(kRoot +
                                                "/data/fixture_corpus.jsonl");
  return corpus::sample_split(c, 3, 2, 11);
}

prompts::PromptRenderer default_renderer() {
  return prompts::PromptRenderer(ty::DefinitionCatalog::defaults());
}

// labels written after a given field prefix inside the shot blocks
std::vector<std::string> field_values(const std::string& text,
                                      const std::string& field) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  std::string prefix = field + ": ";
  while (std::getline(in, line)) {
    if (line.rfind(prefix, 0) == 0) out.push_back(line.substr(prefix.size()));
  }
  return out;
}

}  // namespace

TEST_CASE("bundled template files reproduce the built-in defaults") {
  auto defaults = prompts::TemplateSet::defaults();
  auto loaded = prompts::TemplateSet::load(kRoot + "/templates");
  CHECK(loaded.content_hash() == defaults.content_hash());
  for (const auto& name : prompts::TemplateSet::names()) {
    CHECK(loaded.get(name) == defaults.get(name));
  }
}

TEST_CASE("round-robin interleaves classes in label order") {
  corpus::Split s = fixture_split();
  corpus::ShotSet shots = corpus::select_shots(s.train, 2, 1);
  auto ordered = prompts::round_robin_shots(shots);
  REQUIRE(ordered.size() == 10);
  // first cycle covers all five classes in canonical order
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(ordered[i]->foundation == ty::all_foundations()[i]);
    CHECK(ordered[i + 5]->foundation == ty::all_foundations()[i]);
  }
  // second cycle repeats the class order with the next shot index
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(ordered[i]->id != ordered[i + 5]->id);
  }
}

TEST_CASE("one-pass foundation prompt shows all five labels, closed set") {
  corpus::Split s = fixture_split();
  corpus::ShotSet shots = corpus::select_shots(s.train, 1, 1);
  auto r = default_renderer();
  auto inst = r.render_mf_one_pass(shots, s.test.items[0]);

  CHECK(inst.strategy == prompts::Strategy::MfOnePass);
  CHECK(inst.shot_ids.size() == 5);
  CHECK(inst.text.find(s.test.items[0].text) != std::string::npos);
  // ends with the open completion cue
  CHECK(inst.text.rfind("Moral foundation:") == inst.text.size() - 17);

  std::set<std::string> legal;
  for (auto f : ty::all_foundations()) legal.insert(std::string(ty::name(f)));
  std::set<std::string> seen;
  for (const auto& v : field_values(inst.text, "Moral foundation")) {
    if (!v.empty()) seen.insert(v);
    CHECK(legal.count(v) == 1);
  }
  CHECK(seen == legal);  // every label is demonstrated
}

TEST_CASE("one-vs-all prompt labels are exactly {foundation, Other}") {
  corpus::Split s = fixture_split();
  corpus::ShotSet shots = corpus::select_shots(s.train, 2, 1);
  auto r = default_renderer();
  auto f = ty::Foundation::LoyaltyBetrayal;
  auto inst = r.render_mf_one_vs_all(shots, s.test.items[0], f);

  std::set<std::string> seen;
  for (const auto& v : field_values(inst.text, "Moral foundation")) {
    if (!v.empty()) seen.insert(v);
  }
  CHECK(seen ==
        std::set<std::string>{std::string(ty::name(f)), prompts::kOtherLabel});
  // definitions show only the candidate foundation
  CHECK(inst.text.find("Care/Harm:") == std::string::npos);
}

TEST_CASE("tie-break prompt restricts shots and is argument-order invariant") {
  corpus::Split s = fixture_split();
  corpus::ShotSet shots = corpus::select_shots(s.train, 2, 1);
  auto r = default_renderer();
  auto f1 = ty::Foundation::CareHarm;
  auto f2 = ty::Foundation::PurityDegradation;
  auto a = r.render_mf_tiebreak(shots, s.test.items[0], f1, f2);
  auto b = r.render_mf_tiebreak(shots, s.test.items[0], f2, f1);
  CHECK(a.text == b.text);
  CHECK(a.shot_ids.size() == 4);  // 2 shots from each candidate class

  std::set<std::string> legal = {std::string(ty::name(f1)),
                                 std::string(ty::name(f2))};
  for (const auto& v : field_values(a.text, "Moral foundation")) {
    if (!v.empty()) CHECK(legal.count(v) == 1);
  }
  CHECK_THROWS_AS(r.render_mf_tiebreak(shots, s.test.items[0], f1, f1),
                  ConfigError);
}

TEST_CASE("role one-pass shows only the foundation's roles") {
  corpus::Split s = fixture_split();
  corpus::ShotSet shots = corpus::select_shots(s.train, 3, 1);
  auto r = default_renderer();
  auto f = ty::Foundation::AuthoritySubversion;
  auto inst =
      r.render_role_one_pass(shots, s.test.items[0], "the senate", f);

  CHECK(inst.entity_span == "the senate");
  CHECK(inst.text.find("Entity: the senate") != std::string::npos);
  std::set<std::string> legal;
  for (auto role : ty::roles_of(f)) legal.insert(std::string(ty::name(role)));
  for (const auto& v : field_values(inst.text, "Moral role")) {
    if (!v.empty()) CHECK(legal.count(v) == 1);
  }
  // no cross-foundation role leaks into the definitions
  CHECK(inst.text.find("Entity causing harm") == std::string::npos);
}

TEST_CASE("sentiment prompt labels are positive/negative only") {
  corpus::Split s = fixture_split();
  corpus::ShotSet shots = corpus::select_shots(s.train, 2, 1);
  auto r = default_renderer();
  auto inst = r.render_role_sentiment(shots, s.test.items[0], "congress");
  std::set<std::string> seen;
  for (const auto& v : field_values(inst.text, "Sentiment")) {
    if (!v.empty()) seen.insert(v);
  }
  CHECK(seen == std::set<std::string>{"positive", "negative"});
}

TEST_CASE("positive-only prompt excludes negative roles") {
  corpus::Split s = fixture_split();
  corpus::ShotSet shots = corpus::select_shots(s.train, 3, 1);
  auto r = default_renderer();
  for (auto f : ty::all_foundations()) {
    auto inst = r.render_role_positive(shots, s.test.items[0], "congress", f);
    // no definition line for the negative role; the colon guards against
    // the "Failing authority" / "Failing authority over" prefix collision
    std::string negative(ty::name(ty::negative_role_of(f)));
    CHECK(inst.text.find(negative + ":") == std::string::npos);
    std::set<std::string> legal;
    for (auto role : ty::positive_roles_of(f))
      legal.insert(std::string(ty::name(role)));
    for (const auto& v : field_values(inst.text, "Moral role")) {
      if (!v.empty()) CHECK(legal.count(v) == 1);
    }
  }
}

TEST_CASE("joint slot-fill prompt: one line per role, dangling first slot") {
  corpus::Split s = fixture_split();
  corpus::ShotSet shots = corpus::select_shots(s.train, 2, 1);
  auto r = default_renderer();
  auto f = ty::Foundation::FairnessCheating;
  auto inst = r.render_joint_slotfill(shots, s.test.items[0], f);

  auto roles = ty::roles_of(f);
  // every shot block carries one line per role, so each role name appears
  // at least shots-many times plus once in the definitions
  for (auto role : roles) {
    std::string needle = std::string(ty::name(role)) + ":";
    std::size_t count = 0, pos = 0;
    while ((pos = inst.text.find(needle, pos)) != std::string::npos) {
      ++count;
      pos += needle.size();
    }
    CHECK(count >= 3);
  }
  // the prompt ends with the first role's empty slot to complete
  std::string tail = std::string(ty::name(roles.front())) + ":";
  CHECK(inst.text.rfind(tail) == inst.text.size() - tail.size());
  CHECK(inst.text.find(prompts::kEmptySlot) != std::string::npos);
}

TEST_CASE("token budget is enforced") {
  corpus::Split s = fixture_split();
  corpus::ShotSet shots = corpus::select_shots(s.train, 3, 1);
  prompts::PromptRenderer tight(ty::DefinitionCatalog::defaults(),
                                prompts::TemplateSet::defaults(), 50);
  CHECK_THROWS_AS(tight.render_mf_one_pass(shots, s.test.items[0]),
                  ConfigError);
  // generous budget renders fine and records the estimate
  auto inst = default_renderer().render_mf_one_pass(shots, s.test.items[0]);
  CHECK(inst.token_estimate > 0);
  CHECK(inst.token_estimate <= prompts::kDefaultTokenBudget);
}

TEST_CASE("template overrides change the rendered text") {
  corpus::Split s = fixture_split();
  corpus::ShotSet shots = corpus::select_shots(s.train, 1, 1);
  auto ts = prompts::TemplateSet::defaults();
  ts.set("mf_one_pass", "CUSTOM {target}\nMoral foundation:");
  prompts::PromptRenderer r(ty::DefinitionCatalog::defaults(), ts);
  auto inst = r.render_mf_one_pass(shots, s.test.items[0]);
  CHECK(inst.text.rfind("CUSTOM ", 0) == 0);
  CHECK_THROWS_AS(ts.get("nope"), ConfigError);
}
