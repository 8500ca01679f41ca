#pragma once

#include <stdexcept>
#include <string>

namespace chfam {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or violated precondition (bad grid size, θ out of range, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A field contained NaN or Inf.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Data does not decay below the configured threshold at the domain boundary
/// and the caller asked for strict checking.
class BoundaryDecayError : public Error {
 public:
  using Error::Error;
};

/// Too few usable nodes for a tail fit.
class InsufficientData : public Error {
 public:
  using Error::Error;
};

/// Malformed or incomplete experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace chfam
