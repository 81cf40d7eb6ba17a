#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pass {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: sizes, rates, configuration, malformed files.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed text input; carries the 1-based line number.
class ParseError : public InvalidArgument {
 public:
  ParseError(const std::string& message, std::size_t line)
      : InvalidArgument(message + " at line " + std::to_string(line)), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Non-finite values or breakdown of a numerical procedure.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Scores carry no split signal (all identical or all in one histogram bin).
class DegenerateDistribution : public NumericalError {
 public:
  DegenerateDistribution() : NumericalError("degenerate score distribution") {}
};

}  // namespace pass
