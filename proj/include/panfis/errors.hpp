#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace panfis {

/// Caller violated a precondition (bad dimensions, empty input, invalid config).
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A numeric invariant broke at runtime (non-SPD matrix, non-finite value).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed text input; carries the 1-based line number when known.
struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line(line) {}
  std::size_t line;
};

/// Malformed or incompatible model file.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace panfis
