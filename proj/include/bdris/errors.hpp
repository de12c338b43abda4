#pragma once

#include <stdexcept>
#include <string>

namespace bdris {

/// Block dimensions of two operands do not agree.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An argument lies outside the domain of a function (negative distance,
/// coincident transceivers, too few samples, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid configuration. `path` names the offending field, e.g.
/// "system.m" or "experiment.sweep.values".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error(path.empty() ? what : path + ": " + what),
        path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// A computation produced a non-finite or otherwise unusable value.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sphere retraction hit W + dW = 0.
class DegenerateStepError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Line search found no step with sufficient decrease.
class LineSearchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  IoError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what) {}
};

}  // namespace bdris
