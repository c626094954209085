#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mzv {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An index whose last part is 1 was passed where an admissible one is required.
class NotAdmissibleError : public Error {
 public:
  using Error::Error;
};

/// Input violates a documented precondition (infeasible parameters, a <= -1, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A nested sum whose tail does not decay.
class DivergentSpecError : public Error {
 public:
  using Error::Error;
};

/// A malformed or unreadable configuration file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed textual input. `position()` is the 0-based offset of the offending character.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace mzv
