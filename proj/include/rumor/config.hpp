#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace rumor {

struct ModelConfig {
  std::size_t k = 50;          // intervals per event
  std::size_t p = 2500;        // words per interval
  std::size_t q_min = 3;       // minimum tweet rows per interval matrix
  std::size_t word_dim = 100;  // Dw
  std::size_t hidden = 50;     // H
  std::size_t user_dim = 100;  // D, must equal 2H
  std::size_t filters = 32;    // M
  double dropout = 0.3;
  double rho = 0.95;
  double eps = 1e-6;
  bool no_attention = false;
  bool no_user_context = false;
  std::uint64_t seed = 1;
  std::size_t max_epochs = 250;

  /// Desk-scale preset.
  static ModelConfig tiny();

  /// Throws ConfigError on any inconsistency.
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

struct TrainConfig {
  ModelConfig model;
  std::uint64_t shuffle_seed = 1;
  double min_improvement = 1e-5;  // convergence: epoch-mean loss gain below this...
  std::size_t patience = 10;      // ...for this many consecutive epochs
  double holdout = 0.1;
  std::size_t folds = 5;
  std::size_t min_count = 1;      // vocabulary cutoff

  void validate() const;
};

using ConfigValues = std::map<std::string, std::string>;

/// Reads a flat `key = value` file. Blank lines and lines starting with '#'
/// are ignored.
ConfigValues read_config_file(const std::filesystem::path& path);

/// Builds a validated TrainConfig from defaults, then the preset (if any),
/// then file values, then explicit flags. Setting `hidden` without `user_dim`
/// derives user_dim = 2 * hidden. `seed` also sets `shuffle_seed` unless that
/// is given. Unknown keys are rejected.
TrainConfig parse_config(const ConfigValues& file_values, const ConfigValues& flags);

/// key=value lines in a fixed order; parse_config(read(...)) reproduces it.
std::string format_config(const TrainConfig& config);

}  // namespace rumor
