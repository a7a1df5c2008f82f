#pragma once

#include <stdexcept>
#include <string>

namespace ctgp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (negative dt, tau out of range, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A 4x4 matrix does not have the structure of an se(3) element or an SE(3) pose.
class StructureError : public Error {
 public:
  using Error::Error;
};

/// Rotation logarithm requested at (or numerically at) angle pi.
class IllConditionedLog : public Error {
 public:
  using Error::Error;
};

/// The Gauss-Newton normal equations could not be factored (unfixed gauge or
/// unobservable state).
class SingularSystem : public Error {
 public:
  using Error::Error;
};

/// Configuration file could not be parsed or failed validation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File read/write failure or malformed data file.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ctgp
