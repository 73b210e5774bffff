#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "rumor/errors.hpp"
#include "rumor/training.hpp"

namespace rumor {

ModelConfig GradcheckOptions::default_config() {
  ModelConfig c;
  c.k = 3;
  c.p = 6;
  c.word_dim = 8;
  c.hidden = 4;
  c.user_dim = 8;
  c.filters = 4;
  return c;
}

double GradcheckReport::max_error() const {
  double m = 0.0;
  for (const auto& g : groups) m = std::max(m, g.max_relative_error);
  return m;
}

namespace {

// A random event with 2k+1 tweets of 1-3 words from the whole vocabulary
// (UNK included), posted by known authors and one unknown author.
IntervalizedEvent random_event(const ModelConfig& config, std::size_t vocab_size,
                               std::span<const std::string> authors, SeededRng& rng) {
  Event event{"gradcheck", rng.bernoulli(0.5) ? Label::kRumor : Label::kNonRumor, {}};
  const std::size_t n = 2 * config.k + 1;
  for (std::size_t t = 0; t < n; ++t) {
    Tweet tweet{"t" + std::to_string(t), static_cast<std::int64_t>(t), "", "", {}};
    const std::size_t pick = rng.below(authors.size() + 1);
    tweet.user_id = pick < authors.size() ? authors[pick] : "stranger";
    const std::size_t words = 1 + rng.below(3);
    for (std::size_t w = 0; w < words; ++w) tweet.tokens.push_back(1 + rng.below(vocab_size - 1));
    event.tweets.push_back(std::move(tweet));
  }
  return split_into_intervals(event, config.k, config.p, config.q_min);
}

}  // namespace

GradcheckReport gradcheck(const GradcheckOptions& options) {
  const ModelConfig& config = options.config;
  config.validate();
  if (options.vocab_size < 3) throw ConfigError("gradcheck needs a vocabulary of at least 3 entries");
  SeededRng rng(options.seed);

  std::vector<std::string> tokens{std::string(Vocabulary::kPadToken), std::string(Vocabulary::kUnkToken)};
  for (std::size_t i = 2; i < options.vocab_size; ++i) tokens.push_back("w" + std::to_string(i));
  const std::vector<std::string> authors{"a0", "a1", "a2", "a3"};
  UserTable users = UserTable::init(authors, config.user_dim, rng);
  Model model = Model::init(config, Vocabulary::from_tokens(tokens), std::move(users), rng);
  auto params = model.parameters();
  if (options.zero_parameters)
    for (auto& p : params) std::fill(p.tensor.data().begin(), p.tensor.data().end(), 0.0);

  const IntervalizedEvent event = random_event(config, options.vocab_size, authors, rng);
  const std::uint64_t dropout_seed = SeededRng::derive(options.seed, 99);
  auto loss_of = [&](Tape& tape) {
    SeededRng dropout_rng(dropout_seed);  // same masks on every evaluation
    return bce_loss(tape, forward_event(tape, model, event, Mode::kTrain, dropout_rng), to_int(event.label));
  };

  GradcheckReport report;
  {
    Tape tape;
    Tensor loss = loss_of(tape);
    report.loss = loss.item();
    tape.backward(loss);
  }
  if (options.after_backward) options.after_backward(model);

  for (auto& p : params) {
    std::vector<double> analytic(p.tensor.size(), 0.0);
    if (p.tensor.has_grad()) std::copy(p.tensor.grad().begin(), p.tensor.grad().end(), analytic.begin());
    auto group = std::find_if(report.groups.begin(), report.groups.end(),
                              [&](const GradcheckGroup& g) { return g.group == p.group; });
    if (group == report.groups.end()) {
      report.groups.push_back({p.group, 0.0, 0});
      group = report.groups.end() - 1;
    }
    auto x = p.tensor.data();
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double saved = x[i];
      Tape off(false);
      x[i] = saved + options.step;
      const double up = loss_of(off).item();
      x[i] = saved - options.step;
      const double down = loss_of(off).item();
      x[i] = saved;
      const double numeric = (up - down) / (2.0 * options.step);
      const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), options.floor});
      group->max_relative_error = std::max(group->max_relative_error, std::abs(analytic[i] - numeric) / denom);
      ++group->checked;
    }
  }
  return report;
}

std::string format_gradcheck(const GradcheckReport& report) {
  std::ostringstream out;
  out << std::left << std::setw(16) << "group" << std::setw(14) << "max_rel_error" << "entries\n";
  for (const auto& g : report.groups) {
    out << std::setw(16) << g.group << std::setw(14) << std::scientific << std::setprecision(3)
        << g.max_relative_error << std::defaultfloat << g.checked << '\n';
  }
  return out.str();
}

}  // namespace rumor
