#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mframes::entmatch {

enum class MatchKind { Exact, Fuzzy, NotApplicable, Hallucination };

struct MatchOutcome {
  MatchKind kind;
  double score = 0.0;  // similarity for Fuzzy; 1.0 for Exact
  std::optional<std::string> matched_gold;

  bool matched() const {
    return kind == MatchKind::Exact || kind == MatchKind::Fuzzy;
  }
};

/// Lowercases, collapses whitespace, strips surrounding punctuation and a
/// leading article ("the", "a", "an"). Idempotent.
std::string normalize(std::string_view s);

/// 1 - levenshtein(a, b) / max(|a|, |b|), on already-normalized non-empty
/// strings. Throws std::invalid_argument on empty input.
double similarity(std::string_view a, std::string_view b);

/// Resolves a predicted entity string against the gold spans of a tweet.
/// Checks run in fixed order: containment in the tweet text, exact
/// normalized match, fuzzy match at or above the threshold, then N/A.
/// Score ties across golds break by longest gold, then lexicographic.
MatchOutcome match_entity(std::string_view pred,
                          const std::vector<std::string>& golds,
                          std::string_view tweet_text,
                          double threshold = 0.6);

}  // namespace mframes::entmatch
