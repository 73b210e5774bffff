#pragma once

#include <string>
#include <vector>

#include "rumor/corpus.hpp"
#include "rumor/ops.hpp"

namespace rumor {

/// Author slot of a padded tweet row; resolves to the zero user row.
inline const std::string kNullAuthor;

inline constexpr std::size_t kMinTweetRows = 3;

struct Interval {
  std::vector<std::size_t> word_indices;  // exactly p entries, PAD-filled
  Mask word_mask;                         // prefix of ones over the real tokens
  std::vector<std::string> tweet_user_ids;  // q entries, kNullAuthor past tweet_count
  std::size_t tweet_count = 0;
};

struct IntervalizedEvent {
  std::string event_id;
  Label label = Label::kNonRumor;
  std::vector<Interval> intervals;  // exactly k
  std::size_t q = kMinTweetRows;    // tweet rows per interval matrix
};

/// Sizes of k contiguous chunks covering n items, differing by at most one;
/// the first n mod k chunks are the larger ones.
std::vector<std::size_t> chunk_sizes(std::size_t n, std::size_t k);

/// Splits a tokenized, chronologically sorted event into k intervals of
/// concatenated tweet tokens, each padded or truncated to exactly p words.
/// q = max(q_min, ceil(N / k)), q_min >= 3.
IntervalizedEvent split_into_intervals(const Event& event, std::size_t k, std::size_t p,
                                       std::size_t q_min = kMinTweetRows);

}  // namespace rumor
