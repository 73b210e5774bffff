#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "rumor/config.hpp"
#include "rumor/corpus.hpp"
#include "rumor/errors.hpp"
#include "rumor/synth.hpp"
#include "rumor/text.hpp"
#include "rumor/training.hpp"
#include "rumor/user_table.hpp"

namespace rumor::cli {

namespace {

// Model and training options shared by train and cv. Only flags that were
// given on the command line override the config file.
struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, CLI::Option*>> options;
  CLI::Option* no_attention = nullptr;
  CLI::Option* no_user_context = nullptr;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "Flat key = value config file (flags take precedence)");
    const std::vector<std::pair<std::string, std::string>> keys{
        {"preset", "Preset: default or tiny"},
        {"seed", "Seed for initialization, dropout and shuffling"},
        {"k", "Intervals per event"},
        {"p", "Words per interval"},
        {"q-min", "Minimum tweet rows per interval matrix"},
        {"word-dim", "Word embedding width"},
        {"hidden", "LSTM hidden size H (user-dim follows as 2H unless given)"},
        {"user-dim", "User embedding width D = 2H"},
        {"filters", "Number of convolution filters"},
        {"dropout", "Dropout rate in [0, 1)"},
        {"rho", "Adadelta decay"},
        {"eps", "Adadelta epsilon"},
        {"max-epochs", "Epoch cap"},
        {"shuffle-seed", "Seed for event order and folds"},
        {"min-improvement", "Convergence threshold on epoch-mean loss"},
        {"patience", "Epochs below the threshold before stopping"},
        {"min-count", "Vocabulary frequency cutoff"},
    };
    for (const auto& [flag, help] : keys) {
      auto* opt = app->add_option("--" + flag, values[flag], help);
      options.emplace_back(flag, opt);
    }
    no_attention = app->add_flag("--no-attention", "Replace LSTM + attention by mean word embeddings");
    no_user_context = app->add_flag("--no-user-context", "Zero the user-embedding half of interval matrices");
  }

  void add_folds(CLI::App* app) {
    options.emplace_back("folds", app->add_option("--folds", values["folds"], "Cross-validation folds"));
  }

  TrainConfig resolve() const {
    ConfigValues file;
    if (!config_file.empty()) file = read_config_file(config_file);
    ConfigValues flags;
    for (const auto& [flag, opt] : options) {
      if (opt->count() == 0) continue;
      std::string key = flag;
      std::replace(key.begin(), key.end(), '-', '_');
      flags[key] = values.at(flag);
    }
    if (no_attention->count()) flags["no_attention"] = "true";
    if (no_user_context->count()) flags["no_user_context"] = "true";
    return parse_config(file, flags);
  }
};

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("failed writing " + path);
}

std::string format_metrics(const MetricsReport& r) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4);
  s << "accuracy   " << r.accuracy << "\n";
  s << "rumor      P " << r.rumor.precision << "  R " << r.rumor.recall << "  F1 " << r.rumor.f1 << "\n";
  s << "non-rumor  P " << r.nonrumor.precision << "  R " << r.nonrumor.recall << "  F1 " << r.nonrumor.f1 << "\n";
  s << "confusion  tp " << r.confusion.tp << "  fp " << r.confusion.fp << "  fn " << r.confusion.fn << "  tn "
    << r.confusion.tn << "\n";
  return s.str();
}

// One JSON object per line: {"user_id": "...", "posts": ["text", ...]}
struct RawHistory {
  std::string user_id;
  std::vector<std::string> posts;
};

std::vector<RawHistory> load_histories(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open histories " + path);
  std::vector<RawHistory> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      out.push_back({j.at("user_id").get<std::string>(), j.at("posts").get<std::vector<std::string>>()});
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("line " + std::to_string(number) + ": " + e.what());
    }
    if (out.back().user_id.empty()) throw FormatError("line " + std::to_string(number) + ": empty user_id");
  }
  return out;
}

int cmd_stats(const std::string& corpus, bool json, std::ostream& out) {
  auto stats = corpus_stats(load_corpus(corpus));
  out << (json ? stats_to_json(stats) + "\n" : format_stats(stats));
  return kOk;
}

int cmd_synth(const SynthSpec& spec, const std::string& corpus_out, const std::string& manifest_out,
              std::ostream& out) {
  auto corpus = generate(spec);
  save_corpus(corpus_out, corpus.events);
  save_manifest(corpus.manifest, spec, manifest_out);
  out << "wrote " << corpus.events.size() << " events to " << corpus_out << " and manifest to " << manifest_out
      << "\n";
  return kOk;
}

struct PretrainArgs {
  std::string histories, corpus, out;
  std::size_t dim = 100, epochs = 5, negatives = 5;
  std::uint64_t seed = 1;
};

int cmd_pretrain(const PretrainArgs& a, std::ostream& out) {
  auto raw = load_histories(a.histories);
  std::vector<std::string> ids;
  std::vector<Event> as_corpus;
  for (const auto& h : raw) {
    if (std::find(ids.begin(), ids.end(), h.user_id) == ids.end()) ids.push_back(h.user_id);
    Event e{"history:" + h.user_id, Label::kNonRumor, {}};
    for (const auto& text : h.posts) e.tweets.push_back({"", 0, h.user_id, text, {}});
    as_corpus.push_back(std::move(e));
  }
  if (!a.corpus.empty()) {
    for (const Event& e : load_corpus(a.corpus))
      for (const Tweet& t : e.tweets)
        if (std::find(ids.begin(), ids.end(), t.user_id) == ids.end()) ids.push_back(t.user_id);
  }
  if (as_corpus.empty()) throw ConfigError("histories file has no users");

  Vocabulary vocab = Vocabulary::build(as_corpus, 1);
  SeededRng rng(a.seed);
  UserTable table = UserTable::init(ids, a.dim, rng);
  Tensor words({vocab.size(), a.dim});
  fill_uniform(words, rng);
  std::vector<UserHistory> histories;
  for (const auto& h : raw) {
    UserHistory u{h.user_id, {}};
    for (const auto& text : h.posts) u.documents.push_back(vocab.encode(text));
    histories.push_back(std::move(u));
  }
  PretrainOptions options;
  options.epochs = a.epochs;
  options.negatives = a.negatives;
  auto report = pretrain_users(table, histories, words, options, rng);
  save_user_table(table, a.out);
  for (std::size_t e = 0; e < report.epoch_loss.size(); ++e)
    out << "epoch " << e + 1 << " loss " << std::setprecision(6) << report.epoch_loss[e] << "\n";
  for (const auto& u : report.skipped_users) out << "skipped " << u << " (empty history)\n";
  out << "wrote " << table.user_count() << " users to " << a.out << "\n";
  return kOk;
}

struct TrainArgs {
  std::string corpus, users, ckpt, curve;
};

int cmd_train(const TrainArgs& a, const TrainConfig& config, std::ostream& out) {
  auto corpus = load_corpus(a.corpus);
  std::optional<UserTable> users;
  if (!a.users.empty()) users = load_user_table(a.users);
  Model model = build_model(config, corpus, std::move(users));
  auto events = prepare_events(model, corpus);
  auto result = train(model, events, config);
  if (!a.curve.empty()) save_curve_csv(result.curve, a.curve);
  save_checkpoint(model, a.ckpt);
  out << "trained " << result.curve.size() << " epochs"
      << (result.converged ? " (converged)" : "") << " on " << events.size() << " events\n";
  if (!result.curve.empty()) {
    out << "final train loss " << std::setprecision(6) << result.curve.back().train_loss << ", accuracy "
        << result.curve.back().train_accuracy << "\n";
  }
  out << "wrote checkpoint " << a.ckpt << "\n";
  return kOk;
}

int cmd_evaluate(const std::string& ckpt, const std::string& corpus, const std::string& json, std::ostream& out) {
  Model model = load_checkpoint(ckpt);
  auto events = prepare_events(model, load_corpus(corpus));
  if (events.empty()) throw ConfigError("corpus has no events");
  auto report = evaluate(model, events);
  out << format_metrics(report);
  if (!json.empty()) write_text_file(json, metrics_to_json(report) + "\n");
  return kOk;
}

int cmd_predict(const std::string& ckpt, const std::string& event_file, std::ostream& out) {
  Model model = load_checkpoint(ckpt);
  auto events = prepare_events(model, load_corpus(event_file));
  out << std::setprecision(6);
  for (const auto& p : predict(model, events)) {
    out << p.event_id << "\t" << p.probability << "\t" << (p.label == Label::kRumor ? "rumor" : "non-rumor")
        << "\n";
  }
  return kOk;
}

int cmd_cv(const std::string& corpus_path, const TrainConfig& config, const std::string& users_path,
           const std::string& json, std::ostream& out) {
  auto corpus = load_corpus(corpus_path);
  std::optional<UserTable> users;
  if (!users_path.empty()) users = load_user_table(users_path);
  auto report = cross_validate(corpus, config, users);
  for (std::size_t f = 0; f < report.folds.size(); ++f)
    out << "fold " << f + 1 << "\n" << format_metrics(report.folds[f]);
  out << "mean over " << report.folds.size() << " folds\n" << format_metrics(report.mean);
  if (!json.empty()) {
    auto j = nlohmann::ordered_json::object();
    j["folds"] = nlohmann::ordered_json::array();
    for (const auto& r : report.folds) j["folds"].push_back(nlohmann::ordered_json::parse(metrics_to_json(r)));
    j["mean"] = nlohmann::ordered_json::parse(metrics_to_json(report.mean));
    write_text_file(json, j.dump(2) + "\n");
  }
  return kOk;
}

int cmd_gradcheck(std::uint64_t seed, const std::string& preset, std::ostream& out) {
  GradcheckOptions options;
  options.seed = seed;
  if (preset == "tiny") options.config = ModelConfig::tiny();
  else if (!preset.empty() && preset != "default") throw ConfigError("unknown preset \"" + preset + "\"");
  auto report = gradcheck(options);
  out << format_gradcheck(report);
  const bool ok = report.max_error() < 1e-4;
  out << (ok ? "PASS" : "FAIL") << " max relative error " << std::scientific << std::setprecision(3)
      << report.max_error() << " (threshold 1e-4)\n";
  return ok ? kOk : kInvalid;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Event-level rumor detection: attention-based bi-LSTM + CNN with author context", "rumor"};
  app.require_subcommand(1);

  std::string corpus, json_path, ckpt, users_path;
  bool stats_json = false;

  auto* stats = app.add_subcommand("stats", "Corpus statistics");
  stats->add_option("--corpus", corpus, "Corpus JSONL")->required();
  stats->add_flag("--json", stats_json, "Print JSON instead of a table");

  SynthSpec spec;
  std::string mode = "lexical", synth_out, manifest_out = "manifest.json";
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with a planted signal");
  synth->add_option("--out", synth_out, "Output corpus JSONL")->required();
  synth->add_option("--manifest", manifest_out, "Output manifest JSON")->capture_default_str();
  synth->add_option("--events", spec.events, "Number of events")->capture_default_str();
  synth->add_option("--min-tweets", spec.min_tweets, "Fewest tweets per event")->capture_default_str();
  synth->add_option("--max-tweets", spec.max_tweets, "Most tweets per event")->capture_default_str();
  synth->add_option("--vocab", spec.vocab_size, "Vocabulary size")->capture_default_str();
  synth->add_option("--signal-tokens", spec.signal_tokens, "Size of the signal token set")->capture_default_str();
  synth->add_option("--min-words", spec.min_words, "Fewest words per tweet")->capture_default_str();
  synth->add_option("--max-words", spec.max_words, "Most words per tweet")->capture_default_str();
  synth->add_option("--rumor-authors", spec.rumor_authors, "Rumor author pool size")->capture_default_str();
  synth->add_option("--background-authors", spec.background_authors, "Background author pool size")
      ->capture_default_str();
  synth->add_option("--mode", mode, "Signal: lexical, author, mixed or none")->capture_default_str();
  synth->add_option("--strength", spec.strength, "Signal probability per rumor tweet")->capture_default_str();
  synth->add_option("--seed", spec.seed, "Random seed")->capture_default_str();

  PretrainArgs pre;
  auto* pretrain = app.add_subcommand("pretrain-users", "Pretrain user embeddings from author histories");
  pretrain->add_option("--histories", pre.histories, "JSONL of {\"user_id\", \"posts\": [text, ...]}")->required();
  pretrain->add_option("--corpus", pre.corpus, "Also add every author of this corpus (random rows)");
  pretrain->add_option("--out", pre.out, "Output user table")->required();
  pretrain->add_option("--dim", pre.dim, "Embedding width D")->capture_default_str();
  pretrain->add_option("--epochs", pre.epochs, "Passes over the histories")->capture_default_str();
  pretrain->add_option("--negatives", pre.negatives, "Negative samples per word")->capture_default_str();
  pretrain->add_option("--seed", pre.seed, "Random seed")->capture_default_str();

  TrainArgs tr;
  ConfigFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write a checkpoint");
  train_cmd->add_option("--corpus", tr.corpus, "Training corpus JSONL")->required();
  train_cmd->add_option("--users", tr.users, "Pretrained user table");
  train_cmd->add_option("--out-ckpt", tr.ckpt, "Output checkpoint")->required();
  train_cmd->add_option("--curve", tr.curve, "Output learning curve CSV");
  train_flags.attach(train_cmd);

  auto* eval = app.add_subcommand("evaluate", "Metrics of a checkpoint on a labeled corpus");
  eval->add_option("--ckpt", ckpt, "Checkpoint")->required();
  eval->add_option("--corpus", corpus, "Labeled corpus JSONL")->required();
  eval->add_option("--json", json_path, "Also write metrics JSON here");

  std::string event_file;
  auto* pred = app.add_subcommand("predict", "Rumor probability for events");
  pred->add_option("--ckpt", ckpt, "Checkpoint")->required();
  pred->add_option("--event", event_file, "JSONL file with the event(s)")->required();

  ConfigFlags cv_flags;
  auto* cv = app.add_subcommand("cv", "Stratified k-fold cross-validation");
  cv->add_option("--corpus", corpus, "Corpus JSONL")->required();
  cv->add_option("--users", users_path, "Pretrained user table");
  cv->add_option("--json", json_path, "Also write per-fold and mean metrics JSON here");
  cv_flags.attach(cv);
  cv_flags.add_folds(cv);

  std::uint64_t gc_seed = 1;
  std::string gc_preset;
  auto* gc = app.add_subcommand("gradcheck", "Compare backprop against finite differences");
  gc->add_option("--seed", gc_seed, "Random seed")->capture_default_str();
  gc->add_option("--preset", gc_preset, "default (tiny check model) or tiny");

  if (args.empty()) {
    err << app.help();
    return kInvalid;
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    err << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kInvalid;
  }

  try {
    if (stats->parsed()) return cmd_stats(corpus, stats_json, out);
    if (synth->parsed()) {
      spec.mode = parse_signal_mode(mode);
      return cmd_synth(spec, synth_out, manifest_out, out);
    }
    if (pretrain->parsed()) return cmd_pretrain(pre, out);
    if (train_cmd->parsed()) return cmd_train(tr, train_flags.resolve(), out);
    if (eval->parsed()) return cmd_evaluate(ckpt, corpus, json_path, out);
    if (pred->parsed()) return cmd_predict(ckpt, event_file, out);
    if (cv->parsed()) return cmd_cv(corpus, cv_flags.resolve(), users_path, json_path, out);
    if (gc->parsed()) return cmd_gradcheck(gc_seed, gc_preset, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInvalid;
  }
  return kInvalid;
}

}  // namespace rumor::cli
