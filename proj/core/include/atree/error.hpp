#pragma once

#include <stdexcept>
#include <string>

namespace atree {

/// Invalid input, configuration or model contents. Maps to CLI exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure while running a computation (I/O, solver trouble). Maps to exit code 3.
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or version-mismatched serialized model.
class ModelFormatError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace atree
