#pragma once

#include <stdexcept>
#include <string>

namespace kglink {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed user input: bad file contents, bad names, bad query rows.
struct InputError : Error {
  using Error::Error;
};

// Incompatible tensor shapes fed to a kernel or tape primitive.
struct ShapeError : Error {
  using Error::Error;
};

// Non-finite values detected in checked mode, or a NaN loss during training.
struct NumericError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

// Query pair has no connecting path within the length bound.
struct EmptyGraphError : Error {
  using Error::Error;
};

// Checkpoint contents incompatible with the current config/vocabularies.
struct MismatchError : Error {
  using Error::Error;
};

}  // namespace kglink
