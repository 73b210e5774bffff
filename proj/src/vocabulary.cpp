#include "rumor/vocabulary.hpp"

#include <algorithm>
#include <map>

#include "rumor/errors.hpp"
#include "rumor/text.hpp"

namespace rumor {

Vocabulary::Vocabulary()
    : tokens_{std::string(kPadToken), std::string(kUnkToken)}, index_{{tokens_[0], kPad}, {tokens_[1], kUnk}} {}

Vocabulary Vocabulary::build(std::span<const Event> corpus, std::size_t min_count) {
  if (corpus.empty()) throw ConfigError("cannot build a vocabulary from an empty corpus");
  std::map<std::string, std::size_t> counts;
  for (const Event& e : corpus)
    for (const Tweet& t : e.tweets)
      for (auto& token : tokenize(t.text)) ++counts[std::move(token)];

  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [token, n] : counts)
    if (n >= std::max<std::size_t>(min_count, 1)) kept.emplace_back(token, n);
  // counts is already lexicographic, so a stable sort on frequency suffices.
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

  std::vector<std::string> tokens{std::string(kPadToken), std::string(kUnkToken)};
  for (auto& [token, n] : kept) tokens.push_back(std::move(token));
  return from_tokens(std::move(tokens));
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < 2 || tokens[kPad] != kPadToken || tokens[kUnk] != kUnkToken) {
    throw FormatError("vocabulary must start with the reserved <pad> and <unk> entries");
  }
  Vocabulary v;
  v.tokens_ = std::move(tokens);
  v.index_.clear();
  v.index_.reserve(v.tokens_.size());
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
    if (!v.index_.emplace(v.tokens_[i], i).second) throw FormatError("duplicate vocabulary token " + v.tokens_[i]);
  }
  return v;
}

std::size_t Vocabulary::index_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end() || it->second == kPad) return kUnk;
  return it->second;
}

std::vector<std::size_t> Vocabulary::encode(std::string_view text) const {
  std::vector<std::size_t> out;
  for (const auto& token : tokenize(text)) out.push_back(index_of(token));
  return out;
}

void index_corpus(std::span<Event> corpus, const Vocabulary& vocab) {
  for (Event& e : corpus)
    for (Tweet& t : e.tweets) t.tokens = vocab.encode(t.text);
}

}  // namespace rumor
