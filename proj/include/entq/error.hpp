#pragma once

#include <stdexcept>
#include <string>

namespace entq {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on user-supplied data was violated (maps to CLI exit code 2).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Malformed moments/criterion/shots file. `field` names the offending key when known.
class SchemaError : public InvalidInput {
 public:
  SchemaError(const std::string& field, const std::string& what)
      : InvalidInput(field.empty() ? what : "field '" + field + "': " + what), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A bound computation touched a covariance/mean entry flagged as unmeasured.
class UnmeasuredMoment : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// Criterion cannot be evaluated (e.g. <B> = 0 or a zero mean spin).
class DegenerateCriterion : public Error {
 public:
  using Error::Error;
};

/// Dense eigensolver or iterative solver failed to converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Dimension guard tripped (total Hilbert space dimension too large).
class SizeError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace entq
