#pragma once

#include <stdexcept>
#include <string>

namespace qcec {

// Base of every error raised by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input outside the mathematical domain of an operation (inert prime,
// division by zero, a point not on the curve, ...).
class domain_error : public error {
 public:
  using error::error;
};

// Requested precision cannot be met with the available digits.
class precision_error : public error {
 public:
  using error::error;
};

// An iteration failed to stabilise.
class convergence_error : public error {
 public:
  using error::error;
};

// Manifest or fixture data rejected by validation.
class validation_error : public error {
 public:
  using error::error;
};

// Configuration the implementation deliberately does not handle.
class unsupported_error : public error {
 public:
  using error::error;
};

}  // namespace qcec
