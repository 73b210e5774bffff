#include "rumor/intervals.hpp"

#include <algorithm>

#include "rumor/errors.hpp"
#include "rumor/vocabulary.hpp"

namespace rumor {

std::vector<std::size_t> chunk_sizes(std::size_t n, std::size_t k) {
  std::vector<std::size_t> sizes(k, n / k);
  for (std::size_t i = 0; i < n % k; ++i) ++sizes[i];
  return sizes;
}

IntervalizedEvent split_into_intervals(const Event& event, std::size_t k, std::size_t p, std::size_t q_min) {
  if (k == 0 || p == 0) throw ConfigError("interval count and words per interval must be positive");
  if (q_min < kMinTweetRows) throw ConfigError("q_min must be at least 3");
  const std::size_t n = event.tweets.size();
  IntervalizedEvent out;
  out.event_id = event.event_id;
  out.label = event.label;
  out.q = std::max(q_min, (n + k - 1) / k);

  std::size_t next = 0;
  for (std::size_t size : chunk_sizes(n, k)) {
    Interval interval;
    interval.word_indices.reserve(p);
    for (std::size_t t = next; t < next + size; ++t) {
      const Tweet& tweet = event.tweets[t];
      for (std::size_t idx : tweet.tokens) {
        if (interval.word_indices.size() == p) break;
        interval.word_indices.push_back(idx);
      }
      interval.tweet_user_ids.push_back(tweet.user_id);
    }
    interval.word_mask.assign(interval.word_indices.size(), 1);
    interval.word_indices.resize(p, Vocabulary::kPad);
    interval.word_mask.resize(p, 0);
    interval.tweet_count = size;
    interval.tweet_user_ids.resize(out.q, kNullAuthor);
    out.intervals.push_back(std::move(interval));
    next += size;
  }
  return out;
}

}  // namespace rumor
