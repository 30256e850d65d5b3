#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace leakmap {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration. Carries every violation found, not just the first.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// A numerical routine failed (non-convergence, non-finite input, broken invariant).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Filesystem or format failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace leakmap
