#pragma once

#include <stdexcept>
#include <string>

namespace blockarrival {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the 1-based line number of the offending row.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Input parsed but violates a structural invariant (empty chain, height gap, ...).
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of a mathematical function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Arithmetic breakdown: zero durations, degenerate regressions, non-finite values.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Caller supplied an invalid tuning parameter.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Violated operation precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Requested intensity mass is not available before the end of the domain.
class RangeError : public Error {
 public:
  using Error::Error;
};

}  // namespace blockarrival
