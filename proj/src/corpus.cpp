#include "mframes/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mframes/errors.hpp"
#include "mframes/text.hpp"

namespace mframes::corpus {

namespace ty = mframes::taxonomy;

const AnnotatedItem* Corpus::find(const std::string& id) const {
  for (const AnnotatedItem& item : items) {
    if (item.id == id) return &item;
  }
  return nullptr;
}

std::vector<const AnnotatedItem*> ShotSet::flattened() const {
  std::vector<const AnnotatedItem*> out;
  for (const auto& cls : by_class) {
    for (const AnnotatedItem& item : cls) out.push_back(&item);
  }
  return out;
}

bool ShotSet::empty() const {
  for (const auto& cls : by_class) {
    if (!cls.empty()) return false;
  }
  return true;
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string raw = buf.str();

  Corpus corpus;
  corpus.source_path = path;
  corpus.content_hash = text::digest_hex(raw);

  std::istringstream lines(raw);
  std::string line;
  int lineno = 0;
  std::set<std::string> seen_ids;
  while (std::getline(lines, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fail = [&](const std::string& msg) -> DataError {
      return DataError(path + ":" + std::to_string(lineno) + ": " + msg);
    };
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw fail(std::string("malformed record: ") + e.what());
    }
    AnnotatedItem item;
    try {
      item.id = rec.at("id").get<std::string>();
      item.text = rec.at("text").get<std::string>();
      std::string fs = rec.at("foundation").get<std::string>();
      auto f = ty::parse_foundation(fs);
      if (!f) throw fail("unknown foundation label: " + fs);
      item.foundation = *f;
      for (const auto& ent : rec.at("entities")) {
        EntityAnnotation ea;
        ea.span = ent.at("span").get<std::string>();
        if (ea.span.empty()) throw fail("empty entity span in item " + item.id);
        std::string rs = ent.at("role").get<std::string>();
        auto r = ty::parse_role(rs);
        if (!r) throw fail("unknown role label: " + rs);
        ea.role = *r;
        if (ty::foundation_of(*r) != item.foundation) {
          throw fail("role/foundation mismatch in item " + item.id + ": role " +
                     std::string(ty::name(*r)) + " does not belong to " +
                     std::string(ty::name(item.foundation)));
        }
        item.entities.push_back(std::move(ea));
      }
    } catch (const nlohmann::json::exception& e) {
      throw fail(std::string("malformed record: ") + e.what());
    }
    if (!seen_ids.insert(item.id).second)
      throw fail("duplicate id: " + item.id);
    corpus.items.push_back(std::move(item));
  }
  return corpus;
}

namespace {

// Pinned Fisher-Yates over mt19937_64; std::shuffle's sequence is not
// specified by the standard, this one replicates across platforms.
void shuffle_pinned(std::vector<std::size_t>& idx, std::mt19937_64& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
}

std::vector<std::size_t> class_permutation(std::size_t n, std::uint64_t seed,
                                           ty::Foundation f) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 rng(seed ^ text::fnv1a(ty::name(f)));
  shuffle_pinned(idx, rng);
  return idx;
}

}  // namespace

Split sample_split(const Corpus& corpus, int train_per_class,
                   int test_per_class, std::uint64_t seed) {
  std::array<std::vector<const AnnotatedItem*>, ty::kFoundationCount> grouped;
  for (const AnnotatedItem& item : corpus.items) {
    grouped[static_cast<std::size_t>(item.foundation)].push_back(&item);
  }
  Split split;
  split.train.k = train_per_class;
  split.train.seed = seed;
  split.test.source_path = corpus.source_path;
  split.test.content_hash = corpus.content_hash;
  for (ty::Foundation f : ty::all_foundations()) {
    auto& cls = grouped[static_cast<std::size_t>(f)];
    int needed = train_per_class + test_per_class;
    if (static_cast<int>(cls.size()) < needed) {
      throw DataError("insufficient items for class " +
                      std::string(ty::name(f)) + ": have " +
                      std::to_string(cls.size()) + ", need " +
                      std::to_string(needed));
    }
    auto idx = class_permutation(cls.size(), seed, f);
    for (int i = 0; i < train_per_class; ++i) {
      split.train.by_class[static_cast<std::size_t>(f)].push_back(
          *cls[idx[static_cast<std::size_t>(i)]]);
    }
    for (int i = 0; i < test_per_class; ++i) {
      split.test.items.push_back(
          *cls[idx[static_cast<std::size_t>(train_per_class + i)]]);
    }
  }
  return split;
}

ShotSet select_shots(const ShotSet& train, int k, std::uint64_t seed) {
  ShotSet out;
  out.k = k;
  out.seed = seed;
  if (k == 0) return out;
  for (ty::Foundation f : ty::all_foundations()) {
    const auto& cls = train.by_class[static_cast<std::size_t>(f)];
    if (k > static_cast<int>(cls.size())) {
      throw DataError("k=" + std::to_string(k) +
                      " exceeds available shots for class " +
                      std::string(ty::name(f)) + " (" +
                      std::to_string(cls.size()) + ")");
    }
    // fixed permutation per (seed, class); taking a prefix gives the
    // k-subset-of-(k+1) property
    auto idx = class_permutation(cls.size(), seed, f);
    for (int i = 0; i < k; ++i) {
      out.by_class[static_cast<std::size_t>(f)].push_back(
          cls[idx[static_cast<std::size_t>(i)]]);
    }
  }
  return out;
}

std::string split_manifest(const Split& split) {
  nlohmann::json j;
  j["seed"] = split.train.seed;
  j["corpus_hash"] = split.test.content_hash;
  j["train"] = nlohmann::json::object();
  for (ty::Foundation f : ty::all_foundations()) {
    nlohmann::json ids = nlohmann::json::array();
    for (const AnnotatedItem& item :
         split.train.by_class[static_cast<std::size_t>(f)]) {
      ids.push_back(item.id);
    }
    j["train"][std::string(ty::name(f))] = ids;
  }
  nlohmann::json test_ids = nlohmann::json::array();
  for (const AnnotatedItem& item : split.test.items) test_ids.push_back(item.id);
  j["test"] = test_ids;
  return j.dump(2) + "\n";
}

}  // namespace mframes::corpus
