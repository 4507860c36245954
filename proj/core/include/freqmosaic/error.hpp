#pragma once

#include <stdexcept>
#include <string>

namespace freqmosaic {

// Precondition failure at an API boundary (bad shapes, odd sizes, ...).
class ContractViolation : public std::invalid_argument {
 public:
  explicit ContractViolation(const std::string& what) : std::invalid_argument(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Checkpoint framing or CRC mismatch.
class CorruptCheckpoint : public std::runtime_error {
 public:
  explicit CorruptCheckpoint(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

}  // namespace freqmosaic
