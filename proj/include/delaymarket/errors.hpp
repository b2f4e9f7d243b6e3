#pragma once

#include <stdexcept>
#include <string>

namespace delaymarket {

/// Base of every error raised by the library. The CLI maps subclasses onto
/// exit codes: input/validation -> 1, solver -> 2, I/O -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or non-finite input data, config parse and schema errors.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Matrix dimensions inconsistent with each other or with the declared n, m.
class StructuralError : public InputError {
 public:
  using InputError::InputError;
};

/// The problem is well-formed but violates a modelling assumption.
class ValidationError : public InputError {
 public:
  using InputError::InputError;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

/// (R + B'PB) could not be factored at some step.
class IllPosedError : public SolverError {
 public:
  IllPosedError(const std::string& what, int step)
      : SolverError(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

class ConvergenceError : public SolverError {
 public:
  ConvergenceError(const std::string& what, double residual)
      : SolverError(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Exhaustive enumeration refused because the schedule space is too large.
class InstanceTooLargeError : public SolverError {
 public:
  InstanceTooLargeError(const std::string& what, double count)
      : SolverError(what), count_(count) {}
  double count() const { return count_; }

 private:
  double count_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace delaymarket
