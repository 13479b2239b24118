#pragma once

#include <stdexcept>
#include <string>

namespace nlheat {

/// Base of every error raised by the library. Messages start with the name
/// of the operation that raised them, e.g. "build_basis: N must be >= 1".
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or violated precondition (CLI exit status 1).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file or config text; carries the 1-based line number.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, int line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Floating-point failure: NaN, overflow refusal, non-convergence (exit 2).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be inverted failed its conditioning gate. `value` is
/// the offending eigenvalue (or eigenvalue ratio) that tripped the gate.
class ConditioningError : public NumericError {
 public:
  ConditioningError(const std::string& what, double value)
      : NumericError(what), value_(value) {}
  double value() const { return value_; }

 private:
  double value_;
};

}  // namespace nlheat
