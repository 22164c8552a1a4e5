#pragma once

#include <stdexcept>
#include <string>

namespace chainsurv {

// Caller broke a documented precondition (shape mismatch, missing grad, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A computation produced NaN/Inf or otherwise diverged.
class NumericFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: malformed files, invalid configuration, degenerate cohorts.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace chainsurv
