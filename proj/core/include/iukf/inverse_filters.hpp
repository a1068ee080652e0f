#pragma once

#include <string_view>
#include <vector>

#include "iukf/forward_filters.hpp"
#include "iukf/linalg.hpp"
#include "iukf/statespace.hpp"
#include "iukf/unscented.hpp"

namespace iukf {

// The defender's estimate of the adversary's estimate.
struct InverseFilterState {
  Vector mean;                 // xhathat_k
  Matrix covariance;           // Sigma-bar_k
  Matrix forward_covariance;   // Sigma*_k, replica of the adversary's Sigma_k
  int step = 0;
};

// z_k = [xhat_kᵀ, v_{k+1}ᵀ]ᵀ with mean [xhathatᵀ, 0ᵀ]ᵀ and block-diagonal
// covariance diag(Sigma-bar_k, R).
struct AugmentedState {
  Vector mean;
  Matrix covariance;
};

AugmentedState augment(const InverseFilterState& state, const Matrix& measurement_noise);

// The inverse filter's state transition: one complete forward step of the
// assumed filter as a deterministic function of (xhat_k, Sigma_k, x_{k+1},
// v_{k+1}). The gain is recomputed from the inputs on every call.
Vector evaluate_transition(const NonlinearStateSpaceModel& model, const ForwardFilterSpec& assumed,
                           const Vector& xhat, const Matrix& sigma, const Vector& x_next,
                           const Vector& v);

// Unscented case of evaluate_transition.
Vector evaluate_ftilde(const NonlinearStateSpaceModel& model, const Vector& xhat,
                       const Matrix& sigma, const Vector& x_next, const Vector& v,
                       double kappa_fwd);

// Covariance-only forward step seeded at (anchor, Sigma*_k); never consumes
// an observation. Returns Sigma*_{k+1}.
Matrix replicate_forward_covariance(const NonlinearStateSpaceModel& model,
                                    const ForwardFilterSpec& assumed, const Vector& anchor,
                                    const Matrix& sigma_star);

Matrix update_sigma_star(const NonlinearStateSpaceModel& model, const Vector& anchor,
                         const Matrix& sigma_star, double kappa_fwd);

// Which estimate seeds the Sigma* recursion: xhathat_k (default) or xhathat_{k+1}.
enum class SigmaStarAnchor { kPrevious, kCurrent };

std::string_view to_string(SigmaStarAnchor anchor);
SigmaStarAnchor parse_anchor(std::string_view text);

enum class InverseKind { kIukf, kIekf };

std::string_view to_string(InverseKind kind);
InverseKind parse_inverse_kind(std::string_view text);

struct InverseFilterOptions {
  ForwardFilterSpec assumed_forward;   // forward filter the defender replicates
  double inverse_kappa = 1.0;          // kappa-bar, IUKF only
  SigmaStarAnchor anchor = SigmaStarAnchor::kPrevious;
};

// Time update of the IUKF: augmented sigma points pushed through the
// transition with the shared exogenous Sigma*_k and x_{k+1}.
struct InversePrediction {
  SigmaPointSet sigma_points;   // 2 n_z + 1 augmented points
  Matrix propagated;            // n_x x (2 n_z + 1)
  Vector mean;                  // xhathat_{k+1|k}
  Matrix covariance;            // Sigma-bar_{k+1|k}, no additive noise term
};

InversePrediction iukf_predict(const NonlinearStateSpaceModel& model,
                               const InverseFilterState& state, const Vector& x_next,
                               const InverseFilterOptions& options);

InverseFilterState iukf_step(const NonlinearStateSpaceModel& model,
                             const InverseFilterState& state, const Vector& x_next,
                             const Vector& a_next, const InverseFilterOptions& options);

InverseFilterState iukf_step(const NonlinearStateSpaceModel& model,
                             const InverseFilterState& state, const Vector& x_next,
                             const Vector& a_next, double kappa_fwd, double kappa_inv,
                             SigmaStarAnchor anchor = SigmaStarAnchor::kPrevious);

// Transition linearized at xhathat_k with the forward gain held fixed:
// Jacobian of xhat -> xhat_{k+1|k}(xhat) + K (h(x_{k+1}) - yhat(xhat)), the
// gain itself, and the transition noise covariance K R Kᵀ.
struct InverseLinearization {
  Matrix jacobian;
  Matrix gain;
  Matrix noise_covariance;
};

InverseLinearization linearize_fixed_gain(const NonlinearStateSpaceModel& model,
                                          const ForwardFilterSpec& assumed, const Vector& xhathat,
                                          const Matrix& sigma_star, const Vector& x_next);

// Jacobian of the full transition (gain recomputed) with respect to xhat at
// v = 0, by central differences with step 1e-5 (1 + |x_i|).
Matrix transition_jacobian(const NonlinearStateSpaceModel& model, const ForwardFilterSpec& assumed,
                           const Vector& xhathat, const Matrix& sigma_star, const Vector& x_next);

// EKF on the inverse system with the replicated forward gain as a parameter.
InverseFilterState iekf_step(const NonlinearStateSpaceModel& model,
                             const InverseFilterState& state, const Vector& x_next,
                             const Vector& a_next, const InverseFilterOptions& options);

InverseFilterState iekf_step(const NonlinearStateSpaceModel& model,
                             const InverseFilterState& state, const Vector& x_next,
                             const Vector& a_next);

struct InverseRun {
  InverseFilterState initial;
  std::vector<InverseFilterState> steps;   // steps[j] holds time j+1
  std::vector<Vector> errors;              // xhathat_k - xhat_k for k = 1..K
};

// Folds the inverse step over (x_k, a_k). Forward estimates are used only to
// record errors and never enter the recursion.
InverseRun run_inverse_filter(const NonlinearStateSpaceModel& model, InverseKind kind,
                              const InverseFilterOptions& options,
                              const InverseFilterState& initial, const Trajectory& trajectory,
                              const std::vector<Vector>& forward_estimates,
                              const std::vector<Vector>& defender_obs);

}  // namespace iukf
