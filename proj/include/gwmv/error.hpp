#pragma once

#include <stdexcept>
#include <string>

namespace gwmv {

// Bad arguments or malformed data. Maps to exit code 2 in the CLI.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input file could not be parsed. Carries the 1-based line number when known.
class ParseError : public InvalidInput {
 public:
  ParseError(const std::string& what, long line = 0)
      : InvalidInput(line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

// An optimizer or solver failed (divergence, degenerate statistics, ...).
// Maps to exit code 1 in the CLI.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gwmv
