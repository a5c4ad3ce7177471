#pragma once

#include <stdexcept>
#include <string>

namespace ksfrac {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A requested discretization does not fit the memory/time budget.
class ResourceError : public Error {
 public:
  ResourceError(const std::string& what, double estimated_size)
      : Error(what), estimated_size_(estimated_size) {}
  double estimated_size() const { return estimated_size_; }

 private:
  double estimated_size_;
};

// A precondition on the arguments was violated (radius below resolution,
// level mismatch, exponent out of range, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

// An operation was asked for on the wrong fractal family.
class FamilyMismatch : public ContractError {
 public:
  using ContractError::ContractError;
};

// Parameter combination the library deliberately does not support
// (e.g. p = 1 harmonic extension on the gasket).
class Unsupported : public Error {
 public:
  using Error::Error;
};

// An iterative solver stopped before reaching its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace ksfrac
