#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nanofock {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or violated type invariant.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A configuration could not be parsed or resolved. `path` names the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& message)
      : Error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// The electrostatic softening reached or passed the buckling point.
class BucklingError : public Error {
 public:
  BucklingError(const std::string& message, double critical_quadratic)
      : Error(message), critical_quadratic_(critical_quadratic) {}
  /// |V_es,2| at the instability, N/m.
  double critical_quadratic() const noexcept { return critical_quadratic_; }

 private:
  double critical_quadratic_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Population tail did not decay inside the truncation.
class TruncationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The generator has more than one stationary state.
class DegeneracyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& message, std::vector<double> residual_history)
      : NumericalError(message), history_(std::move(residual_history)) {}
  const std::vector<double>& residual_history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

/// Adaptive integration hit its minimum step.
class StiffnessError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A generator would exceed the configured nonzero budget.
class MemoryGuardError : public Error {
 public:
  MemoryGuardError(const std::string& message, double estimate)
      : Error(message), estimate_(estimate) {}
  double estimated_nonzeros() const noexcept { return estimate_; }

 private:
  double estimate_;
};

/// An analysis precondition (for example resolvable sidebands) does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace nanofock
