#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mframes/taxonomy.hpp"

namespace mframes::corpus {

struct EntityAnnotation {
  std::string span;
  taxonomy::Role role;
};

struct AnnotatedItem {
  std::string id;
  std::string text;
  taxonomy::Foundation foundation;
  std::vector<EntityAnnotation> entities;
};

struct Corpus {
  std::vector<AnnotatedItem> items;
  std::string source_path;
  std::string content_hash;  // fnv1a hex of the raw file bytes

  const AnnotatedItem* find(const std::string& id) const;
};

/// Few-shot exemplars: k items per foundation, grouped by class.
struct ShotSet {
  int k = 0;
  std::uint64_t seed = 0;
  // class order follows taxonomy::all_foundations()
  std::array<std::vector<AnnotatedItem>, taxonomy::kFoundationCount> by_class;

  std::vector<const AnnotatedItem*> flattened() const;  // class-major
  bool empty() const;
};

/// Loads and validates a line-delimited corpus file. Each line is a record
/// with `id`, `text`, `foundation` and `entities` (list of {span, role}).
Corpus load_corpus(const std::string& path);

struct Split {
  ShotSet train;
  Corpus test;
};

/// Class-balanced, seed-deterministic disjoint train/test split.
/// Per class, items are permuted by a pinned Fisher-Yates shuffle driven by
/// mt19937_64 seeded with seed ^ fnv1a(class name); the first
/// train_per_class go to train, the next test_per_class to test.
Split sample_split(const Corpus& corpus, int train_per_class,
                   int test_per_class, std::uint64_t seed);

/// Draws k shots per class from a training ShotSet. Deterministic under
/// seed, with the prefix property: the k-shot selection is a prefix of the
/// (k+1)-shot selection for the same seed.
ShotSet select_shots(const ShotSet& train, int k, std::uint64_t seed);

/// Serializes a split as id lists for audit (JSON).
std::string split_manifest(const Split& split);

}  // namespace mframes::corpus
