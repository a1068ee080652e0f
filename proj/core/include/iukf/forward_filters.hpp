#pragma once

#include <string_view>
#include <vector>

#include "iukf/linalg.hpp"
#include "iukf/statespace.hpp"

namespace iukf {

struct FilterState {
  Vector mean;         // xhat_k
  Matrix covariance;   // Sigma_k
  int step = 0;
};

// Intermediate quantities of one forward step, everything that does not
// depend on the new observation.
struct ForwardStepTrace {
  Vector predicted_mean;            // xhat_{k+1|k}
  Matrix predicted_covariance;      // Sigma_{k+1|k}
  Vector predicted_observation;     // yhat_{k+1|k}
  Matrix innovation_covariance;     // Sigma^y_{k+1}
  Matrix cross_covariance;          // Sigma^{xy}_{k+1}
  Matrix gain;                      // K_{k+1}
};

struct ForwardStep {
  FilterState state;
  ForwardStepTrace trace;
};

enum class ForwardKind { kUkf, kEkf };

std::string_view to_string(ForwardKind kind);
ForwardKind parse_forward_kind(std::string_view text);

// A forward filter as seen by whoever runs (or replicates) it.
struct ForwardFilterSpec {
  ForwardKind kind = ForwardKind::kUkf;
  double kappa = 1.0;   // ignored by the EKF
};

// Time update and gain of the unscented filter: sigma points around
// (mean, cov) through f, fresh sigma points around the prediction through h.
ForwardStepTrace ukf_trace(const NonlinearStateSpaceModel& model, const Vector& mean,
                           const Matrix& cov, double kappa);

// Linearized counterpart: F at mean, H at the predicted mean.
ForwardStepTrace ekf_trace(const NonlinearStateSpaceModel& model, const Vector& mean,
                           const Matrix& cov);

ForwardStepTrace forward_trace(const NonlinearStateSpaceModel& model, const ForwardFilterSpec& spec,
                               const Vector& mean, const Matrix& cov);

// Posterior mean xhat_{k+1|k} + K (y - yhat) for an observation y.
Vector updated_mean(const NonlinearStateSpaceModel& model, const ForwardStepTrace& trace,
                    const Vector& y);

// Posterior covariance Sigma_{k+1|k} - K Sigma^y Kᵀ, symmetrized.
Matrix updated_covariance(const ForwardStepTrace& trace);

ForwardStep ukf_step(const NonlinearStateSpaceModel& model, const FilterState& state,
                     const Vector& y_next, double kappa);

ForwardStep ekf_step(const NonlinearStateSpaceModel& model, const FilterState& state,
                     const Vector& y_next);

struct ForwardRun {
  FilterState initial;
  std::vector<ForwardStep> steps;   // steps[j] holds the estimate at time j+1

  // xhat_1 ... xhat_K
  std::vector<Vector> estimates() const;
};

// Folds the chosen step over y_1 ... y_K. Step failures are rethrown as
// StepFailure carrying the failing time index.
ForwardRun run_forward_filter(const NonlinearStateSpaceModel& model, const ForwardFilterSpec& spec,
                              const Vector& initial_mean, const Matrix& initial_cov,
                              const Trajectory& trajectory);

}  // namespace iukf
