#pragma once

#include <stdexcept>
#include <string>

namespace kcekqs {

// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDimension : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// A tensor dimension would exceed the configured size cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// Rejection sampler ran out of iterations.
class SamplingError : public Error {
 public:
  using Error::Error;
};

// Protocol/strategy/timing configuration that cannot be run.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Operation invoked in the wrong lifecycle phase.
class StateError : public Error {
 public:
  using Error::Error;
};

}  // namespace kcekqs
