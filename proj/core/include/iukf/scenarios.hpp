#pragma once

#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "iukf/linalg.hpp"
#include "iukf/random.hpp"
#include "iukf/statespace.hpp"

namespace iukf {

struct InitialConditions {
  Vector true_state;     // x_0
  Vector forward_mean;   // xhat_0, the adversary's initial estimate
  Vector inverse_mean;   // xhathat_0, the defender's initial estimate
};

struct ScenarioConfig {
  std::string name;
  Matrix forward_initial_covariance;   // Sigma_0 (also seeds Sigma*_0)
  Matrix inverse_initial_covariance;   // Sigma-bar_0
  double forward_kappa = 1.0;          // true kappa of the adversary's UKF
  double inverse_kappa = 1.0;          // kappa-bar
  double assumed_forward_kappa = 1.0;  // kappa the defender believes the adversary uses
  int horizon = 100;
  int runs = 100;
  // State components entering error and bound metrics; empty means all.
  std::vector<int> error_indices;
  // Draws x_0, xhat_0 and xhathat_0 for one run from the initial substream.
  std::function<InitialConditions(Rng&)> draw_initial;
};

struct Scenario {
  NonlinearStateSpaceModel model;
  ScenarioConfig config;
};

// ---------------------------------------------------------------------------
// FM demodulator, state [lambda, theta].

struct FmParameters {
  double sample_period = 2.0 * std::numbers::pi / 16.0;   // T
  double beta = 100.0;
  double process_variance = 0.01;       // var(w_k), enters through [1, -beta]ᵀ
  double measurement_variance = 1.0;    // R = r I_2
  double action_variance = 5.0;         // Sigma_eps
  // Entry (2,1) of the transition matrix: beta (e^{-T/beta} - 1) by default;
  // the literal alternative -beta e^{-T/beta} - 1 when set.
  bool literal_transition = false;
  double forward_initial_variance = 10.0;
  double inverse_initial_variance = 5.0;
  double forward_kappa = 1.0;
  double inverse_kappa = 1.0;
  double assumed_forward_kappa = 2.0;
  int horizon = 100;
  int runs = 500;
};

Matrix fm_transition_matrix(const FmParameters& p);

Scenario fm_demodulator_model(const FmParameters& p = {});

// ---------------------------------------------------------------------------
// Vehicle reentry tracked by range/bearing radar, state
// [x1, x2, x3, x4, x5] = [position, velocity, aerodynamic parameter].

struct ReentryParameters {
  double rho0 = 6374.0;          // radius at which the radar sits on the x1 axis
  double h0 = 13.406;
  double gm0 = 3.9860e5;
  double beta0 = -0.59783;
  double dt = 0.1;
  int substeps = 1;              // RK4 substeps per dt
  // Continuous-time noise intensities for x3, x4, x5; discrete Q = dt * q.
  double q_velocity = 2.4064e-5;
  double q_parameter = 1e-6;
  double range_sigma = 1e-3;
  double bearing_sigma = 0.17e-3;
  double action_variance = 3.0;
  std::vector<double> initial_state = {6500.4, 349.14, -1.8093, -6.7967, 0.6932};
  std::vector<double> forward_initial_mean = {6500.4, 349.14, -1.8093, -6.7967, 0.0};
  std::vector<double> forward_initial_variances = {1e-6, 1e-6, 1e-6, 1e-6, 1.0};
  std::vector<double> inverse_initial_variances = {1e-5, 1e-5, 1e-5, 1e-5, 1.0};
  double forward_kappa = 2.5;
  double inverse_kappa = 3.5;
  double assumed_forward_kappa = 2.5;
  int horizon = 2000;
  int runs = 100;
};

// Continuous drift of the reentry dynamics; throws SimulationAbort when the
// radius collapses.
Vector reentry_drift(const ReentryParameters& p, const Vector& x);

Scenario reentry_model(const ReentryParameters& p = {});

// ---------------------------------------------------------------------------
// Affine toy system used as a Kalman-filter oracle.

struct LinearParameters {
  Matrix transition;    // A
  Matrix observation;   // H
  Matrix action;        // G
  Matrix process_noise;
  Matrix measurement_noise;
  Matrix action_noise;
  Vector initial_state;          // used when random_initial is false
  Vector forward_initial_mean;
  // Draw x0 and xhathat0 from the filters' priors instead of fixing them.
  bool random_initial = true;
  Matrix forward_initial_covariance;
  Matrix inverse_initial_covariance;
  double forward_kappa = 1.0;
  double inverse_kappa = 2.0;
  double assumed_forward_kappa = 2.0;
  int horizon = 100;
  int runs = 200;
};

// A stable three-state default.
LinearParameters default_linear_parameters();

Scenario linear_toy_model(const LinearParameters& p);

}  // namespace iukf
