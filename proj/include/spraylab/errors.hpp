#pragma once

#include <stdexcept>
#include <string>

namespace spraylab {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dimension or shape mismatch between an argument and what the operation expects.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A violated precondition on argument values (even exponent, point off the variety, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Matrix numerically singular (condition estimate above the configured limit).
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Stereographic inverse requested at the antipode of the base point.
class AntipodeError : public Error {
 public:
  using Error::Error;
};

/// Local inversion of a spray did not converge, or left the injectivity neighborhood.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// No regular value found for a degree computation.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

/// Two computations that must agree did not.
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

/// Requested object exceeds a size cap.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Homotopy needs more partition intervals than allowed.
class HomotopyTooWildError : public Error {
 public:
  using Error::Error;
};

/// Malformed command or configuration.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace spraylab
