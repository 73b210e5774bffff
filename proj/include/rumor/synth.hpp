#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rumor/corpus.hpp"

namespace rumor {

enum class SignalMode { kLexical, kAuthor, kMixed, kNone };

SignalMode parse_signal_mode(const std::string& name);
std::string to_string(SignalMode mode);

struct SynthSpec {
  std::size_t events = 200;
  std::size_t min_tweets = 10;
  std::size_t max_tweets = 30;
  std::size_t vocab_size = 200;
  std::size_t signal_tokens = 5;
  std::size_t min_words = 4;
  std::size_t max_words = 8;
  std::size_t rumor_authors = 20;
  std::size_t background_authors = 200;
  SignalMode mode = SignalMode::kLexical;
  double strength = 0.8;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SynthManifest {
  std::vector<std::string> signal_tokens;
  std::vector<std::string> rumor_authors;
};

struct SynthCorpus {
  std::vector<Event> events;
  SynthManifest manifest;
};

/// Labels are balanced (floor(n/2) rumor events) and shuffled. Words are
/// drawn uniformly from the non-signal vocabulary for every event. Lexical
/// signal: each rumor-event tweet gets one signal token in a random slot with
/// probability `strength`. Author signal: each rumor-event tweet is posted by
/// a rumor-pool author with probability `strength`; all other tweets come
/// from the background pool. Text and authors use separate random streams,
/// so in author mode the text of an event does not depend on its label.
SynthCorpus generate(const SynthSpec& spec);

std::string manifest_to_json(const SynthManifest& manifest, const SynthSpec& spec);
void save_manifest(const SynthManifest& manifest, const SynthSpec& spec, const std::filesystem::path& path);

}  // namespace rumor
