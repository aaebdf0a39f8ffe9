#pragma once

#include <stdexcept>
#include <string>

namespace icc {

// Input data that cannot be used: unreadable files, malformed CSV cells,
// non-positive prices, zero-variance columns. Maps to CLI exit code 2.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure: singular clique covariance after shrinkage, a precision
// matrix that is not positive definite, a fit that cannot be repaired.
// Maps to CLI exit code 3.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace icc
