#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rmc {

/// Caller passed something outside an operation's domain (unknown state,
/// event not in the alphabet, mismatched lengths, ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed text input. `line()` is 1-based, 0 when not line-oriented.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// A projection whose quotient transition function is not deterministic or
/// whose final blocks are not absorbing.
class ProjectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Domain configuration problem; the message starts with the field path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested computation exceeds a configured size budget.
class BudgetError : public std::runtime_error {
 public:
  BudgetError(const std::string& what, double estimate)
      : std::runtime_error(what), estimate_(estimate) {}
  double estimate() const { return estimate_; }

 private:
  double estimate_;
};

}  // namespace rmc
