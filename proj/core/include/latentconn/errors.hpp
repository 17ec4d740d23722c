#pragma once

#include <stdexcept>
#include <string>

namespace latentconn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

/// Input violates a documented precondition (bad value, bad shape, bad file).
class ValidationError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "validation"; }
};

class ShapeError : public ValidationError {
public:
  using ValidationError::ValidationError;
  const char* kind() const noexcept override { return "shape"; }
};

/// A series (or sample) with zero variance where a correlation or a
/// t statistic needs a nonzero one.
class DegenerateSeriesError : public ValidationError {
public:
  using ValidationError::ValidationError;
  const char* kind() const noexcept override { return "degenerate"; }
};

class InsufficientDataError : public ValidationError {
public:
  using ValidationError::ValidationError;
  const char* kind() const noexcept override { return "insufficient-data"; }
};

class ParseError : public ValidationError {
public:
  using ValidationError::ValidationError;
  const char* kind() const noexcept override { return "parse"; }
};

class IoError : public ValidationError {
public:
  using ValidationError::ValidationError;
  const char* kind() const noexcept override { return "io"; }
};

/// API called out of order (e.g. backward without a forward cache).
class UsageError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "usage"; }
};

/// Non-finite loss, probability outside its domain, or a diverging
/// special-function evaluation.
class NumericError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "numeric"; }
};

}  // namespace latentconn
