#pragma once

#include <stdexcept>
#include <string>

namespace gmentropy {

/// Caller violated a precondition (bad dimension, parameter outside its domain).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Inputs are valid in general but not for the requested method
/// (e.g. closed forms that need coincident covariances).
class UnsupportedConfiguration : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative or floating-point computation failed.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gmentropy
