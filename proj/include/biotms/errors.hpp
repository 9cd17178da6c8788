#pragma once

#include <stdexcept>
#include <string>

namespace biotms {

/// Bad input that the caller can fix (resolution, coefficient range, config).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Linear algebra failure: singular or indefinite system, factorization breakdown.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand sizes do not agree.
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace biotms
