#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace smelab {

/// Operand shapes disagree (coefficient vectors of different length etc).
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Divergence, non-PSD covariance, singular systems. Maps to CLI exit code 3.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrajectoryError : NumericalError {
  TrajectoryError(const std::string& what, std::size_t step, std::uint64_t stream = 0)
      : NumericalError(what), step(step), stream_id(stream) {}
  std::size_t step;
  std::uint64_t stream_id;
};

/// Malformed or inconsistent configuration. Maps to CLI exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedOperation : std::logic_error {
  using std::logic_error::logic_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require_same_dim(std::ptrdiff_t a, std::ptrdiff_t b, const char* where) {
  if (a != b) {
    throw DimensionError(std::string(where) + ": dimension mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

}  // namespace smelab
