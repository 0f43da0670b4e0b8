#pragma once

#include <stdexcept>
#include <string>

namespace pdc {

// Bad input: malformed crystal file, out-of-range wavelength, invalid options.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Valid input for which the physics has no answer (no phase matching, optic axis, ...).
class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateDirectionError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

class TotalInternalReflectionError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

class NoPhaseMatchingError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

}  // namespace pdc
