#include "rumor/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "rumor/errors.hpp"

namespace rumor {

ModelConfig ModelConfig::tiny() {
  ModelConfig c;
  c.k = 5;
  c.p = 60;
  c.word_dim = 16;
  c.hidden = 8;
  c.user_dim = 16;
  c.filters = 8;
  return c;
}

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(k, "k");
  positive(p, "p");
  positive(word_dim, "word_dim");
  positive(hidden, "hidden");
  positive(user_dim, "user_dim");
  positive(filters, "filters");
  if (k < 3) throw ConfigError("k must be at least 3 for the 3x3 convolution");
  if (q_min < 3) throw ConfigError("q_min must be at least 3 for the 3x3 convolution");
  if (user_dim != 2 * hidden) {
    throw ConfigError("user_dim (" + std::to_string(user_dim) + ") must equal 2 * hidden (" +
                      std::to_string(2 * hidden) + ")");
  }
  if (no_attention && word_dim != user_dim) {
    throw ConfigError("no_attention needs word_dim == user_dim so mean word vectors fill the interval half");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");
  if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("rho must be in (0, 1)");
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
}

void TrainConfig::validate() const {
  model.validate();
  if (!(holdout > 0.0 && holdout < 1.0)) throw ConfigError("holdout must be in (0, 1)");
  if (folds < 2) throw ConfigError("folds must be at least 2");
  if (patience == 0) throw ConfigError("patience must be positive");
  if (!(min_improvement >= 0.0)) throw ConfigError("min_improvement must be non-negative");
  if (min_count == 0) throw ConfigError("min_count must be positive");
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ConfigError("invalid value for " + key + ": \"" + text + "\"");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "1" || text == "true") return true;
  if (text == "0" || text == "false") return false;
  throw ConfigError("invalid value for " + key + ": \"" + text + "\" (expected true or false)");
}

using Setter = std::function<void(TrainConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> s;
    auto size = [](std::size_t ModelConfig::*field) {
      return [field](TrainConfig& c, const std::string& k, const std::string& v) {
        c.model.*field = parse_number<std::size_t>(k, v);
      };
    };
    auto real = [](double ModelConfig::*field) {
      return [field](TrainConfig& c, const std::string& k, const std::string& v) {
        c.model.*field = parse_number<double>(k, v);
      };
    };
    s["k"] = size(&ModelConfig::k);
    s["p"] = size(&ModelConfig::p);
    s["q_min"] = size(&ModelConfig::q_min);
    s["word_dim"] = size(&ModelConfig::word_dim);
    s["hidden"] = size(&ModelConfig::hidden);
    s["user_dim"] = size(&ModelConfig::user_dim);
    s["filters"] = size(&ModelConfig::filters);
    s["max_epochs"] = size(&ModelConfig::max_epochs);
    s["dropout"] = real(&ModelConfig::dropout);
    s["rho"] = real(&ModelConfig::rho);
    s["eps"] = real(&ModelConfig::eps);
    s["no_attention"] = [](TrainConfig& c, const std::string& k, const std::string& v) {
      c.model.no_attention = parse_bool(k, v);
    };
    s["no_user_context"] = [](TrainConfig& c, const std::string& k, const std::string& v) {
      c.model.no_user_context = parse_bool(k, v);
    };
    s["seed"] = [](TrainConfig& c, const std::string& k, const std::string& v) {
      c.model.seed = parse_number<std::uint64_t>(k, v);
    };
    s["shuffle_seed"] = [](TrainConfig& c, const std::string& k, const std::string& v) {
      c.shuffle_seed = parse_number<std::uint64_t>(k, v);
    };
    s["min_improvement"] = [](TrainConfig& c, const std::string& k, const std::string& v) {
      c.min_improvement = parse_number<double>(k, v);
    };
    s["patience"] = [](TrainConfig& c, const std::string& k, const std::string& v) {
      c.patience = parse_number<std::size_t>(k, v);
    };
    s["holdout"] = [](TrainConfig& c, const std::string& k, const std::string& v) {
      c.holdout = parse_number<double>(k, v);
    };
    s["folds"] = [](TrainConfig& c, const std::string& k, const std::string& v) {
      c.folds = parse_number<std::size_t>(k, v);
    };
    s["min_count"] = [](TrainConfig& c, const std::string& k, const std::string& v) {
      c.min_count = parse_number<std::size_t>(k, v);
    };
    return s;
  }();
  return table;
}

}  // namespace

ConfigValues read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  ConfigValues values;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(number) + ": expected key = value");
    }
    values[trim(std::string_view(t).substr(0, eq))] = trim(std::string_view(t).substr(eq + 1));
  }
  return values;
}

TrainConfig parse_config(const ConfigValues& file_values, const ConfigValues& flags) {
  TrainConfig config;
  std::string preset;
  for (const ConfigValues* layer : {&file_values, &flags})
    if (auto it = layer->find("preset"); it != layer->end()) preset = it->second;
  if (preset == "tiny") config.model = ModelConfig::tiny();
  else if (!preset.empty() && preset != "default") throw ConfigError("unknown preset \"" + preset + "\"");

  bool user_dim_set = false, hidden_set = false, shuffle_set = false;
  for (const ConfigValues* layer : {&file_values, &flags}) {
    for (const auto& [key, value] : *layer) {
      if (key == "preset") continue;
      auto it = setters().find(key);
      if (it == setters().end()) throw ConfigError("unknown config key \"" + key + "\"");
      it->second(config, key, value);
      user_dim_set |= key == "user_dim";
      hidden_set |= key == "hidden";
      shuffle_set |= key == "shuffle_seed";
    }
  }
  if (hidden_set && !user_dim_set) config.model.user_dim = 2 * config.model.hidden;
  if (!shuffle_set) config.shuffle_seed = config.model.seed;
  config.validate();
  return config;
}

std::string format_config(const TrainConfig& c) {
  std::ostringstream out;
  out.precision(17);
  const ModelConfig& m = c.model;
  out << "k = " << m.k << "\np = " << m.p << "\nq_min = " << m.q_min << "\nword_dim = " << m.word_dim
      << "\nhidden = " << m.hidden << "\nuser_dim = " << m.user_dim << "\nfilters = " << m.filters
      << "\ndropout = " << m.dropout << "\nrho = " << m.rho << "\neps = " << m.eps
      << "\nno_attention = " << (m.no_attention ? "true" : "false")
      << "\nno_user_context = " << (m.no_user_context ? "true" : "false") << "\nseed = " << m.seed
      << "\nmax_epochs = " << m.max_epochs << "\nshuffle_seed = " << c.shuffle_seed
      << "\nmin_improvement = " << c.min_improvement << "\npatience = " << c.patience
      << "\nholdout = " << c.holdout << "\nfolds = " << c.folds << "\nmin_count = " << c.min_count << "\n";
  return out.str();
}

}  // namespace rumor
