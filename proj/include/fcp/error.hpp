#pragma once

#include <stdexcept>
#include <string>

namespace fcp {

/// Base of every failure the library reports.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Arguments outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Index beyond a configured table capacity.
class OutOfRange : public Error {
 public:
  using Error::Error;
};

/// Numerical failures: the CLI maps all of these to exit code 3.
class NumericError : public Error {
 public:
  using Error::Error;
};

class NonConvergent : public NumericError {
 public:
  using NumericError::NumericError;
};

class CancellationLoss : public NumericError {
 public:
  using NumericError::NumericError;
};

class QuadratureFailure : public NumericError {
 public:
  using NumericError::NumericError;
};

class TailCutoffUnreachable : public NumericError {
 public:
  using NumericError::NumericError;
};

class InvalidSpec : public DomainError {
 public:
  using DomainError::DomainError;
};

class InvalidProfile : public DomainError {
 public:
  using DomainError::DomainError;
};

class UnsupportedR : public DomainError {
 public:
  using DomainError::DomainError;
};

class DegenerateWeights : public DomainError {
 public:
  using DomainError::DomainError;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

}  // namespace detail
}  // namespace fcp
