#pragma once

#include <stdexcept>
#include <string>

namespace semiwkb {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user-facing parameters (bad kappa, delta, eps ladder, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Values outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

class DivisionGuardError : public DomainError {
 public:
  using DomainError::DomainError;
};

class UnsupportedConfiguration : public Error {
 public:
  using Error::Error;
};

// Precondition on the inputs of an operation was not met.
class ContractError : public Error {
 public:
  using Error::Error;
};

// The discretisation cannot resolve the requested computation.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

class CflViolation : public ResolutionError {
 public:
  using ResolutionError::ResolutionError;
};

}  // namespace semiwkb
