#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <set>

#include "mframes/corpus.hpp"
#include "mframes/errors.hpp"

using namespace mframes;
namespace ty = mframes::taxonomy;

namespace {

const std::string kFixture =
    std::string(MFRAMES_SOURCE_DIR) + "/data/fixture_corpus.jsonl";

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& content) {
    path = std::string(std::tmpnam(nullptr)) + ".jsonl";
    std::ofstream out(path, std::ios::binary);
    out << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

int entity_pair_count(const std::vector<corpus::AnnotatedItem>& items) {
  int n = 0;
  for (const auto& item : items) n += static_cast<int>(item.entities.size());
  return n;
}

}  // namespace

TEST_CASE("well-formed file loads all items") {
  TempFile f(
      R"({"id":"a","text":"x helps y","foundation":"Care/Harm","entities":[{"span":"x","role":"Entity providing care"}]})"
      "\n"
      R"({"id":"b","text":"z cheats","foundation":"Fairness/Cheating","entities":[{"span":"z","role":"Entity doing cheating"}]})"
      "\n"
      R"({"id":"c","text":"plain","foundation":"Loyalty/Betrayal","entities":[]})"
      "\n");
  corpus::Corpus c = corpus::load_corpus(f.path);
  CHECK(c.items.size() == 3);
  CHECK(c.items[0].id == "a");
  CHECK(c.items[1].foundation == ty::Foundation::FairnessCheating);
  CHECK(!c.content_hash.empty());
}

TEST_CASE("role/foundation mismatch is rejected") {
  TempFile f(
      R"({"id":"a","text":"x","foundation":"Fairness/Cheating","entities":[{"span":"x","role":"Entity causing harm"}]})"
      "\n");
  CHECK_THROWS_WITH_AS(corpus::load_corpus(f.path),
                       doctest::Contains("mismatch"), DataError);
}

TEST_CASE("duplicate ids are rejected, naming the id") {
  TempFile f(
      R"({"id":"dup","text":"x","foundation":"Care/Harm","entities":[]})"
      "\n"
      R"({"id":"dup","text":"y","foundation":"Care/Harm","entities":[]})"
      "\n");
  CHECK_THROWS_WITH_AS(corpus::load_corpus(f.path), doctest::Contains("dup"),
                       DataError);
}

TEST_CASE("malformed record reports the line number") {
  TempFile f(
      R"({"id":"a","text":"x","foundation":"Care/Harm","entities":[]})"
      "\nnot json\n");
  CHECK_THROWS_WITH_AS(corpus::load_corpus(f.path), doctest::Contains(":2:"),
                       DataError);
}

TEST_CASE("unknown label is rejected") {
  TempFile f(
      R"({"id":"a","text":"x","foundation":"Freedom/Oppression","entities":[]})"
      "\n");
  CHECK_THROWS_AS(corpus::load_corpus(f.path), DataError);
}

TEST_CASE("sample_split balance, disjointness and determinism") {
  corpus::Corpus c = corpus::load_corpus(kFixture);
  corpus::Split s1 = corpus::sample_split(c, 2, 3, 17);
  corpus::Split s2 = corpus::sample_split(c, 2, 3, 17);

  CHECK(s1.test.items.size() == 15);
  for (auto f : ty::all_foundations()) {
    CHECK(s1.train.by_class[static_cast<std::size_t>(f)].size() == 2);
  }
  // disjoint by id
  std::set<std::string> train_ids;
  for (const auto* item : s1.train.flattened()) train_ids.insert(item->id);
  for (const auto& item : s1.test.items)
    CHECK(train_ids.count(item.id) == 0);
  // deterministic
  CHECK(corpus::split_manifest(s1) == corpus::split_manifest(s2));
  // different seed, different split (overwhelmingly likely)
  corpus::Split s3 = corpus::sample_split(c, 2, 3, 18);
  CHECK(corpus::split_manifest(s1) != corpus::split_manifest(s3));
}

TEST_CASE("entity-pair counts computed by brute-force sum over the split") {
  corpus::Corpus c = corpus::load_corpus(kFixture);
  corpus::Split s = corpus::sample_split(c, 2, 3, 5);
  int train_pairs = 0;
  for (const auto* item : s.train.flattened())
    train_pairs += static_cast<int>(item->entities.size());
  int test_pairs = entity_pair_count(s.test.items);
  // fixture has 46 entity pairs in total; the split partitions them
  CHECK(train_pairs + test_pairs == entity_pair_count(c.items));
  CHECK(train_pairs > 0);
  CHECK(test_pairs > 0);
}

TEST_CASE("insufficient items names the class") {
  corpus::Corpus c = corpus::load_corpus(kFixture);
  CHECK_THROWS_WITH_AS(corpus::sample_split(c, 10, 20, 1),
                       doctest::Contains("Care/Harm"), DataError);
}

TEST_CASE("select_shots: k per class, empty case, prefix property") {
  corpus::Corpus c = corpus::load_corpus(kFixture);
  corpus::Split s = corpus::sample_split(c, 4, 1, 9);

  corpus::ShotSet zero = corpus::select_shots(s.train, 0, 3);
  CHECK(zero.empty());
  CHECK(zero.flattened().empty());

  corpus::ShotSet three = corpus::select_shots(s.train, 3, 3);
  CHECK(three.flattened().size() == 15);

  // prefix property: k-shot selection is a prefix of (k+1)-shot
  corpus::ShotSet two = corpus::select_shots(s.train, 2, 3);
  for (auto f : ty::all_foundations()) {
    auto fi = static_cast<std::size_t>(f);
    REQUIRE(two.by_class[fi].size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(two.by_class[fi][i].id == three.by_class[fi][i].id);
    }
  }

  CHECK_THROWS_AS(corpus::select_shots(s.train, 5, 3), DataError);
}
