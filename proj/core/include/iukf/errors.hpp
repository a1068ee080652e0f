#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace iukf {

// Base for every failure raised while running a filter or a bound recursion.
// A failing run in the Monte Carlo harness is excluded from aggregates using
// the step recorded here.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, std::optional<int> step = std::nullopt)
      : std::runtime_error(what), step_(step) {}

  std::optional<int> step() const { return step_; }

 private:
  std::optional<int> step_;
};

// Cholesky failed at every jitter level.
class FactorizationError : public NumericalError {
 public:
  FactorizationError(const std::string& what, Eigen::MatrixXd matrix)
      : NumericalError(what), matrix_(std::move(matrix)) {}

  const Eigen::MatrixXd& matrix() const { return matrix_; }

 private:
  Eigen::MatrixXd matrix_;
};

class SingularInnovationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Raised by scenario dynamics that leave their domain of validity
// (e.g. the reentry vehicle radius collapsing to zero).
class SimulationAbort : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Wraps a failure with the time index at which it happened.
class StepFailure : public NumericalError {
 public:
  StepFailure(const std::string& what, int step) : NumericalError(what, step) {}
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace iukf
