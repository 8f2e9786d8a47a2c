#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace trajexit {

/// Malformed or out-of-range input: bad schema, bad coordinates, bad config.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input error attributed to a specific (1-based) line of a text source.
class ParseError : public InputError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Inputs parse fine but do not cover each other in time.
class CoverageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace trajexit
