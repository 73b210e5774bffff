#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace rumor {

enum class Label : int { kNonRumor = 0, kRumor = 1 };

inline int to_int(Label label) { return static_cast<int>(label); }

struct Tweet {
  std::string tweet_id;
  std::int64_t timestamp = 0;  // epoch seconds
  std::string user_id;
  std::string text;
  std::vector<std::size_t> tokens;  // vocabulary indices, filled by index_corpus()

  bool operator==(const Tweet&) const = default;
};

struct Event {
  std::string event_id;
  Label label = Label::kNonRumor;
  std::vector<Tweet> tweets;  // ascending by (timestamp, tweet_id)

  bool operator==(const Event&) const = default;
};

/// Restores the chronological order: timestamp, then tweet_id.
void sort_tweets(Event& event);

/// One JSON object per line:
///   {"event_id": str, "label": 0|1,
///    "tweets": [{"tweet_id": str, "timestamp": int, "user_id": str, "text": str}, ...]}
/// Blank lines are skipped. Errors name the offending line.
std::vector<Event> parse_corpus(std::istream& in);
std::vector<Event> load_corpus(const std::filesystem::path& path);

/// Writes the same format with keys in the order above; loading and saving a
/// file written by this function reproduces it byte for byte.
void write_corpus(std::ostream& out, std::span<const Event> events);
void save_corpus(const std::filesystem::path& path, std::span<const Event> events);

struct StatsReport {
  std::size_t unique_users = 0;
  std::size_t tweets = 0;
  std::size_t events = 0;
  std::size_t rumor_events = 0;
  std::size_t nonrumor_events = 0;
  double avg_posts = 0.0;
  std::size_t max_posts = 0;
  std::size_t min_posts = 0;
};

StatsReport corpus_stats(std::span<const Event> events);
std::string format_stats(const StatsReport& report);
std::string stats_to_json(const StatsReport& report);

}  // namespace rumor
