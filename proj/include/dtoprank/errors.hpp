#pragma once

#include <stdexcept>
#include <string>

namespace dtoprank {

// Bad parameters, malformed input lines, unknown config keys.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Inconsistent data exchanged between monitors and the collector
// (mismatched window length, mixed window ids).
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Random topology generation gave up (e.g. could not draw a connected graph).
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dtoprank
