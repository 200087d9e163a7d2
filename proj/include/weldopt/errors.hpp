#pragma once

#include <stdexcept>
#include <string>

namespace weldopt {

// Sample data that cannot define the requested fit or curve.
class InvalidData : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A constructed coefficient model that violates a physical invariant.
class InvalidModel : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// NaN or out-of-contract arguments to an evaluation routine.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Inconsistent or missing configuration (mesh alignment, durations, keys).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Nonlinear or linear solver failure.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual = 0.0, int step = -1)
      : std::runtime_error(what), residual_(residual), step_(step) {}

  double residual() const noexcept { return residual_; }
  int step() const noexcept { return step_; }

 private:
  double residual_;
  int step_;
};

}  // namespace weldopt
