#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rumor/corpus.hpp"

namespace rumor {

/// Token <-> index map. Index 0 is padding and index 1 stands for every
/// token outside the vocabulary; corpus tokens start at 2.
class Vocabulary {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;
  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocabulary();

  /// Tokens seen at least min_count times, ordered by descending frequency
  /// and then lexicographically.
  static Vocabulary build(std::span<const Event> corpus, std::size_t min_count = 1);

  /// Rebuilds from a full index-ordered token list (as stored in checkpoints).
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  std::size_t index_of(std::string_view token) const;
  bool contains(std::string_view token) const { return index_.contains(std::string(token)); }
  const std::string& token(std::size_t index) const { return tokens_.at(index); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::vector<std::size_t> encode(std::string_view text) const;

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Fills Tweet::tokens for every tweet of the corpus.
void index_corpus(std::span<Event> corpus, const Vocabulary& vocab);

}  // namespace rumor
