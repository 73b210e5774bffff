#pragma once

#include <stdexcept>
#include <string>

namespace rumor {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tensor shapes that do not line up.
struct DimensionError : Error {
  using Error::Error;
};

// Invalid hyperparameters or incompatible model widths.
struct ConfigError : Error {
  using Error::Error;
};

// Malformed input data (corpus lines, binary files).
struct FormatError : Error {
  using Error::Error;
};

// Files that cannot be opened, read or written.
struct IoError : Error {
  using Error::Error;
};

// Violated calling contract, e.g. backward() on a non-scalar.
struct ContractError : Error {
  using Error::Error;
};

struct TrainingError : Error {
  using Error::Error;
};

}  // namespace rumor
