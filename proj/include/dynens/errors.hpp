#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dynens {

// Invalid arguments are reported with std::invalid_argument throughout.
// The types below cover the failure modes callers need to tell apart.

/// Raised when a loss or gradient becomes non-finite during training.
class TrainingDiverged : public std::runtime_error {
 public:
  explicit TrainingDiverged(const std::string& what, std::ptrdiff_t cycle = -1)
      : std::runtime_error(what), cycle_(cycle) {}

  /// Training cycle that diverged, or -1 when not running inside a cycle loop.
  std::ptrdiff_t cycle() const noexcept { return cycle_; }

 private:
  std::ptrdiff_t cycle_;
};

class InvalidConfiguration : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidState : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Dynamic snapshot training ran out of cycles before filling the ensemble.
class CannotFillEnsemble : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input. line() is 1-based; 0 means the whole file.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line == 0 ? what
                                     : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace dynens
