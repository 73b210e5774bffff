#include "rumor/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "rumor/errors.hpp"

namespace rumor {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

const json& require(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw FormatError("line " + std::to_string(line) + ": missing \"" + key + "\"");
  return *it;
}

std::string require_string(const json& obj, const char* key, std::size_t line) {
  const json& v = require(obj, key, line);
  if (!v.is_string()) throw FormatError("line " + std::to_string(line) + ": \"" + key + "\" must be a string");
  return v.get<std::string>();
}

Event parse_event(const std::string& text, std::size_t line) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError("line " + std::to_string(line) + ": malformed JSON (" + e.what() + ")");
  }
  if (!obj.is_object()) throw FormatError("line " + std::to_string(line) + ": expected a JSON object");

  Event event;
  event.event_id = require_string(obj, "event_id", line);
  if (event.event_id.empty()) throw FormatError("line " + std::to_string(line) + ": empty event_id");
  const json& label = require(obj, "label", line);
  if (!label.is_number_integer() || (label.get<std::int64_t>() != 0 && label.get<std::int64_t>() != 1)) {
    throw FormatError("line " + std::to_string(line) + ": label must be 0 or 1");
  }
  event.label = label.get<int>() == 1 ? Label::kRumor : Label::kNonRumor;

  const json& tweets = require(obj, "tweets", line);
  if (!tweets.is_array() || tweets.empty()) {
    throw FormatError("line " + std::to_string(line) + ": \"tweets\" must be a non-empty array");
  }
  for (const json& t : tweets) {
    if (!t.is_object()) throw FormatError("line " + std::to_string(line) + ": tweet must be an object");
    Tweet tweet;
    tweet.tweet_id = require_string(t, "tweet_id", line);
    const json& ts = require(t, "timestamp", line);
    if (!ts.is_number_integer() || ts.get<std::int64_t>() < 0) {
      throw FormatError("line " + std::to_string(line) + ": timestamp must be a non-negative integer");
    }
    tweet.timestamp = ts.get<std::int64_t>();
    tweet.user_id = require_string(t, "user_id", line);
    if (tweet.user_id.empty()) throw FormatError("line " + std::to_string(line) + ": empty user_id");
    tweet.text = require_string(t, "text", line);
    event.tweets.push_back(std::move(tweet));
  }
  sort_tweets(event);
  return event;
}

}  // namespace

void sort_tweets(Event& event) {
  std::stable_sort(event.tweets.begin(), event.tweets.end(), [](const Tweet& a, const Tweet& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.tweet_id < b.tweet_id;
  });
}

std::vector<Event> parse_corpus(std::istream& in) {
  std::vector<Event> events;
  std::unordered_set<std::string> seen;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    Event event = parse_event(text, line);
    if (!seen.insert(event.event_id).second) {
      throw FormatError("line " + std::to_string(line) + ": duplicate event_id \"" + event.event_id + "\"");
    }
    events.push_back(std::move(event));
  }
  return events;
}

std::vector<Event> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus " + path.string());
  return parse_corpus(in);
}

void write_corpus(std::ostream& out, std::span<const Event> events) {
  for (const Event& event : events) {
    ordered_json obj;
    obj["event_id"] = event.event_id;
    obj["label"] = to_int(event.label);
    ordered_json tweets = ordered_json::array();
    for (const Tweet& t : event.tweets) {
      ordered_json tj;
      tj["tweet_id"] = t.tweet_id;
      tj["timestamp"] = t.timestamp;
      tj["user_id"] = t.user_id;
      tj["text"] = t.text;
      tweets.push_back(std::move(tj));
    }
    obj["tweets"] = std::move(tweets);
    out << obj.dump() << '\n';
  }
}

void save_corpus(const std::filesystem::path& path, std::span<const Event> events) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write corpus " + path.string());
  write_corpus(out, events);
  if (!out) throw IoError("failed writing corpus " + path.string());
}

StatsReport corpus_stats(std::span<const Event> events) {
  StatsReport r;
  std::unordered_set<std::string> users;
  r.events = events.size();
  for (const Event& e : events) {
    (e.label == Label::kRumor ? r.rumor_events : r.nonrumor_events) += 1;
    r.tweets += e.tweets.size();
    r.max_posts = std::max(r.max_posts, e.tweets.size());
    r.min_posts = r.min_posts == 0 ? e.tweets.size() : std::min(r.min_posts, e.tweets.size());
    for (const Tweet& t : e.tweets) users.insert(t.user_id);
  }
  r.unique_users = users.size();
  r.avg_posts = r.events ? static_cast<double>(r.tweets) / static_cast<double>(r.events) : 0.0;
  return r;
}

namespace {

const char* const kRowNames[] = {
    "No. of unique users",     "No. of tweets",          "No. of events",          "No. of rumor events",
    "No. of non-rumor events", "Avg no. of posts/event", "Max no. of posts/event", "Min no. of posts/event"};

}  // namespace

std::string format_stats(const StatsReport& r) {
  std::ostringstream avg;
  avg << std::fixed << std::setprecision(2) << r.avg_posts;
  const std::string values[] = {std::to_string(r.unique_users),   std::to_string(r.tweets),
                                std::to_string(r.events),         std::to_string(r.rumor_events),
                                std::to_string(r.nonrumor_events), avg.str(),
                                std::to_string(r.max_posts),      std::to_string(r.min_posts)};
  std::ostringstream out;
  out << std::left << std::setw(26) << "Statistics" << "Value\n";
  for (std::size_t i = 0; i < 8; ++i) out << std::left << std::setw(26) << kRowNames[i] << values[i] << '\n';
  return out.str();
}

std::string stats_to_json(const StatsReport& r) {
  ordered_json obj;
  obj[kRowNames[0]] = r.unique_users;
  obj[kRowNames[1]] = r.tweets;
  obj[kRowNames[2]] = r.events;
  obj[kRowNames[3]] = r.rumor_events;
  obj[kRowNames[4]] = r.nonrumor_events;
  obj[kRowNames[5]] = r.avg_posts;
  obj[kRowNames[6]] = r.max_posts;
  obj[kRowNames[7]] = r.min_posts;
  return obj.dump(2);
}

}  // namespace rumor
