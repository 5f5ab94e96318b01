#include "mframes/entmatch.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

#include "mframes/text.hpp"

namespace mframes::entmatch {

namespace {

bool strip_leading_article(std::string& s) {
  for (std::string_view article : {"the ", "an ", "a "}) {
    if (s.size() > article.size() &&
        s.compare(0, article.size(), article) == 0) {
      s.erase(0, article.size());
      return true;
    }
  }
  return false;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

std::string normalize(std::string_view s) {
  std::string out = text::fold(s);
  // iterate to a fixpoint so normalize(normalize(s)) == normalize(s)
  for (;;) {
    std::string before = out;
    std::size_t begin = 0;
    std::size_t end = out.size();
    while (begin < end && std::ispunct(static_cast<unsigned char>(out[begin])))
      ++begin;
    while (end > begin &&
           std::ispunct(static_cast<unsigned char>(out[end - 1])))
      --end;
    out = out.substr(begin, end - begin);
    strip_leading_article(out);
    while (!out.empty() && out.front() == ' ') out.erase(out.begin());
    while (!out.empty() && out.back() == ' ') out.pop_back();
    if (out == before) break;
  }
  return out;
}

double similarity(std::string_view a, std::string_view b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("similarity: empty input");
  std::size_t dist = levenshtein(a, b);
  std::size_t denom = std::max(a.size(), b.size());
  return 1.0 - static_cast<double>(dist) / static_cast<double>(denom);
}

MatchOutcome match_entity(std::string_view pred,
                          const std::vector<std::string>& golds,
                          std::string_view tweet_text, double threshold) {
  std::string p = normalize(pred);
  std::string tweet = normalize(tweet_text);
  if (p.empty()) return {MatchKind::NotApplicable, 0.0, std::nullopt};
  if (tweet.find(p) == std::string::npos) {
    return {MatchKind::Hallucination, 0.0, std::nullopt};
  }
  for (const std::string& gold : golds) {
    if (normalize(gold) == p) return {MatchKind::Exact, 1.0, gold};
  }
  const std::string* best = nullptr;
  double best_score = 0.0;
  for (const std::string& gold : golds) {
    std::string g = normalize(gold);
    if (g.empty()) continue;
    double score = similarity(p, g);
    if (score < threshold) continue;
    bool better = best == nullptr || score > best_score ||
                  (score == best_score &&
                   (gold.size() > best->size() ||
                    (gold.size() == best->size() && gold < *best)));
    if (better) {
      best = &gold;
      best_score = score;
    }
  }
  if (best != nullptr) return {MatchKind::Fuzzy, best_score, *best};
  return {MatchKind::NotApplicable, 0.0, std::nullopt};
}

}  // namespace mframes::entmatch
