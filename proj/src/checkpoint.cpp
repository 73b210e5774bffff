#include <fstream>

#include "binary_io.hpp"
#include "json.hpp"
#include "rumor/errors.hpp"
#include "rumor/training.hpp"

namespace rumor {

namespace {

constexpr std::string_view kMagic = "RUMCKP01";
constexpr int kVersion = 1;

nlohmann::ordered_json config_to_json(const ModelConfig& c) {
  nlohmann::ordered_json j;
  j["k"] = c.k;
  j["p"] = c.p;
  j["q_min"] = c.q_min;
  j["word_dim"] = c.word_dim;
  j["hidden"] = c.hidden;
  j["user_dim"] = c.user_dim;
  j["filters"] = c.filters;
  j["dropout"] = c.dropout;
  j["rho"] = c.rho;
  j["eps"] = c.eps;
  j["no_attention"] = c.no_attention;
  j["no_user_context"] = c.no_user_context;
  j["seed"] = c.seed;
  j["max_epochs"] = c.max_epochs;
  return j;
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.k = j.at("k").get<std::size_t>();
  c.p = j.at("p").get<std::size_t>();
  c.q_min = j.at("q_min").get<std::size_t>();
  c.word_dim = j.at("word_dim").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.user_dim = j.at("user_dim").get<std::size_t>();
  c.filters = j.at("filters").get<std::size_t>();
  c.dropout = j.at("dropout").get<double>();
  c.rho = j.at("rho").get<double>();
  c.eps = j.at("eps").get<double>();
  c.no_attention = j.at("no_attention").get<bool>();
  c.no_user_context = j.at("no_user_context").get<bool>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.max_epochs = j.at("max_epochs").get<std::size_t>();
  return c;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Model& model) {
  nlohmann::ordered_json header;
  header["version"] = kVersion;
  header["config"] = config_to_json(model.config);
  header["vocab"] = model.vocab.tokens();
  header["user_ids"] = model.users.user_ids();
  auto params = model.parameters();
  nlohmann::ordered_json tensors = nlohmann::ordered_json::array();
  for (const auto& p : params) tensors.push_back({{"name", p.name}, {"shape", p.tensor.shape()}});
  header["tensors"] = tensors;
  binary::write_header(out, kMagic, header.dump());
  for (const auto& p : params) binary::write_doubles(out, p.tensor.data());
}

Model read_checkpoint(std::istream& in) {
  binary::Reader reader(in);
  reader.expect_magic(kMagic, "checkpoint");
  ModelConfig config;
  std::vector<std::string> vocab_tokens, user_ids;
  std::vector<std::pair<std::string, Shape>> listed;
  try {
    const auto header = nlohmann::json::parse(reader.header());
    if (header.at("version").get<int>() != kVersion) {
      throw FormatError("unsupported checkpoint version " + header.at("version").dump());
    }
    config = config_from_json(header.at("config"));
    vocab_tokens = header.at("vocab").get<std::vector<std::string>>();
    user_ids = header.at("user_ids").get<std::vector<std::string>>();
    for (const auto& t : header.at("tensors")) listed.emplace_back(t.at("name"), t.at("shape").get<Shape>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("corrupt checkpoint header: ") + e.what());
  }
  try {
    config.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint config is invalid: ") + e.what());
  }

  // Shapes follow from config, vocabulary and user list; values come from the payload.
  SeededRng scratch(0);
  Model model = Model::init(config, Vocabulary::from_tokens(std::move(vocab_tokens)),
                            UserTable::init(user_ids, config.user_dim, scratch), scratch);
  auto params = model.parameters();
  if (listed.size() != params.size()) throw FormatError("checkpoint lists an unexpected number of tensors");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (listed[i].first != params[i].name || listed[i].second != params[i].tensor.shape()) {
      throw FormatError("checkpoint tensor " + listed[i].first + " " + shape_to_string(listed[i].second) +
                        " does not match the configured " + params[i].name + " " +
                        shape_to_string(params[i].tensor.shape()));
    }
  }
  for (auto& p : params) reader.doubles(p.tensor.data());
  reader.expect_end();
  return model;
}

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  write_checkpoint(out, model);
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace rumor
