#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gnrrm {

// Runtime failure (exit code 1 at the command line).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user input: bad arguments, inconsistent files, unusable configuration
// (exit code 2 at the command line).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. Carries the 1-based line number when one applies.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : ValidationError(line ? source + ":" + std::to_string(line) + ": " + what : source + ": " + what), line_(line) {}
  explicit ParseError(const std::string& what) : ValidationError(what) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_ = 0;
};

}  // namespace gnrrm
