#include "rumor/synth.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "rumor/errors.hpp"
#include "rumor/rng.hpp"

namespace rumor {

SignalMode parse_signal_mode(const std::string& name) {
  if (name == "lexical") return SignalMode::kLexical;
  if (name == "author") return SignalMode::kAuthor;
  if (name == "mixed") return SignalMode::kMixed;
  if (name == "none") return SignalMode::kNone;
  throw ConfigError("unknown signal mode \"" + name + "\" (lexical, author, mixed, none)");
}

std::string to_string(SignalMode mode) {
  switch (mode) {
    case SignalMode::kLexical: return "lexical";
    case SignalMode::kAuthor: return "author";
    case SignalMode::kMixed: return "mixed";
    case SignalMode::kNone: return "none";
  }
  return "none";
}

void SynthSpec::validate() const {
  if (events == 0) throw ConfigError("events must be positive");
  if (min_tweets == 0 || min_tweets > max_tweets) throw ConfigError("tweet range must satisfy 1 <= min <= max");
  if (min_words == 0 || min_words > max_words) throw ConfigError("word range must satisfy 1 <= min <= max");
  if (vocab_size <= signal_tokens) {
    throw ConfigError("vocabulary of " + std::to_string(vocab_size) + " cannot hold " +
                      std::to_string(signal_tokens) + " signal tokens plus background words");
  }
  const bool lexical = mode == SignalMode::kLexical || mode == SignalMode::kMixed;
  const bool author = mode == SignalMode::kAuthor || mode == SignalMode::kMixed;
  if (lexical && signal_tokens == 0) throw ConfigError("lexical signal needs at least one signal token");
  if (author && rumor_authors == 0) throw ConfigError("author signal needs a rumor author pool");
  if (background_authors == 0) throw ConfigError("background author pool must be non-empty");
  if (!(strength >= 0.0 && strength <= 1.0)) throw ConfigError("strength must be in [0, 1]");
}

namespace {

enum Stream : std::uint64_t { kLabels = 1, kVocab = 2, kText = 3, kAuthors = 4, kSignal = 5, kTime = 6 };

std::string padded(const std::string& prefix, std::size_t i, std::size_t n) {
  std::ostringstream s;
  s << prefix << std::setw(static_cast<int>(std::to_string(n > 0 ? n - 1 : 0).size())) << std::setfill('0') << i;
  return s.str();
}

template <typename T>
const T& pick(const std::vector<T>& items, SeededRng& rng) {
  return items[rng.below(items.size())];
}

}  // namespace

SynthCorpus generate(const SynthSpec& spec) {
  spec.validate();
  const bool lexical = spec.mode == SignalMode::kLexical || spec.mode == SignalMode::kMixed;
  const bool author = spec.mode == SignalMode::kAuthor || spec.mode == SignalMode::kMixed;

  SeededRng label_rng(SeededRng::derive(spec.seed, kLabels));
  SeededRng vocab_rng(SeededRng::derive(spec.seed, kVocab));
  SeededRng text_rng(SeededRng::derive(spec.seed, kText));
  SeededRng author_rng(SeededRng::derive(spec.seed, kAuthors));
  SeededRng signal_rng(SeededRng::derive(spec.seed, kSignal));
  SeededRng time_rng(SeededRng::derive(spec.seed, kTime));

  std::vector<std::string> words(spec.vocab_size);
  for (std::size_t i = 0; i < words.size(); ++i) words[i] = "w" + std::to_string(i);
  vocab_rng.shuffle(std::span<std::string>(words));
  SynthManifest manifest;
  const std::vector<std::string> signal(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(spec.signal_tokens));
  if (lexical) manifest.signal_tokens = signal;
  const std::vector<std::string> background(words.begin() + static_cast<std::ptrdiff_t>(spec.signal_tokens),
                                            words.end());

  const std::size_t pool = spec.rumor_authors + spec.background_authors;
  std::vector<std::string> users(pool);
  for (std::size_t i = 0; i < pool; ++i) users[i] = padded("user", i, pool);
  vocab_rng.shuffle(std::span<std::string>(users));
  if (author)
    manifest.rumor_authors.assign(users.begin(), users.begin() + static_cast<std::ptrdiff_t>(spec.rumor_authors));
  const std::vector<std::string> background_users(users.begin() + static_cast<std::ptrdiff_t>(spec.rumor_authors),
                                                  users.end());

  std::vector<Label> labels(spec.events, Label::kNonRumor);
  std::fill_n(labels.begin(), spec.events / 2, Label::kRumor);
  label_rng.shuffle(std::span<Label>(labels));

  SynthCorpus out;
  out.manifest = manifest;
  std::int64_t clock = 1'500'000'000;
  for (std::size_t e = 0; e < spec.events; ++e) {
    Event event{padded("event", e, spec.events), labels[e], {}};
    const bool rumor = labels[e] == Label::kRumor;
    const std::size_t n = spec.min_tweets + text_rng.below(spec.max_tweets - spec.min_tweets + 1);
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t len = spec.min_words + text_rng.below(spec.max_words - spec.min_words + 1);
      std::vector<std::string> tokens(len);
      for (auto& w : tokens) w = pick(background, text_rng);
      if (lexical && rumor && signal_rng.bernoulli(spec.strength))
        tokens[signal_rng.below(len)] = pick(signal, signal_rng);

      std::string user;
      if (author && rumor && author_rng.bernoulli(spec.strength)) user = pick(manifest.rumor_authors, author_rng);
      else user = pick(background_users, author_rng);

      std::string text;
      for (const auto& w : tokens) text += (text.empty() ? "" : " ") + w;
      clock += 1 + static_cast<std::int64_t>(time_rng.below(600));
      event.tweets.push_back({event.event_id + "-" + std::to_string(t), clock, user, text, {}});
    }
    clock += 86'400;
    out.events.push_back(std::move(event));
  }
  return out;
}

std::string manifest_to_json(const SynthManifest& manifest, const SynthSpec& spec) {
  nlohmann::ordered_json j;
  j["mode"] = to_string(spec.mode);
  j["strength"] = spec.strength;
  j["seed"] = spec.seed;
  j["signal_tokens"] = manifest.signal_tokens;
  j["rumor_authors"] = manifest.rumor_authors;
  return j.dump(2);
}

void save_manifest(const SynthManifest& manifest, const SynthSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << manifest_to_json(manifest, spec) << '\n';
  if (!out) throw IoError("failed writing manifest " + path.string());
}

}  // namespace rumor
