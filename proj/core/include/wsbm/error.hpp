#pragma once

#include <stdexcept>
#include <string>

namespace wsbm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-domain input data (files, weights, label vectors).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Hyperparameters outside the region where the conjugate normalizer is finite.
class AdmissibilityError : public Error {
 public:
  using Error::Error;
};

/// Violated API precondition: dimension mismatch, invalid model configuration.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A valid configuration that a particular engine does not implement.
class UnsupportedConfiguration : public Error {
 public:
  using Error::Error;
};

}  // namespace wsbm
