#pragma once

#include <stdexcept>
#include <string>

namespace rankkit {

// Bad input: violated precondition, malformed record, out-of-range value.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Network-level failure that survived the retry budget.
struct TransportError : std::runtime_error {
  explicit TransportError(const std::string& msg) : std::runtime_error(msg) {}
};

// A remote endpoint answered, but the answer could not be interpreted.
// Carries the raw response so failed calls stay auditable.
struct ResponseParseError : std::runtime_error {
  ResponseParseError(const std::string& msg, std::string raw)
      : std::runtime_error(msg), raw_response(std::move(raw)) {}
  std::string raw_response;
};

}  // namespace rankkit
