#pragma once

#include <stdexcept>
#include <string>

namespace aquarender {

// Root of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller broke an operation precondition (shape mismatch, wrong size).
class ContractError : public Error {
 public:
  using Error::Error;
};

// A model parameter is outside its admissible set.
class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

// Data does not carry enough information to determine the requested quantity.
class UnderConstrainedError : public Error {
 public:
  using Error::Error;
};

// Monocular depth is not identifiable for the given model.
class AmbiguityError : public Error {
 public:
  using Error::Error;
};

// Optimization produced a non-finite loss or parameter.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Unreadable, malformed or unsupported input files.
class DataError : public Error {
 public:
  using Error::Error;
};

// Bad run configuration. `key()` names the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& message)
      : Error(key.empty() ? message : "config key '" + key + "': " + message),
        key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace aquarender
