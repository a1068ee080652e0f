#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "iukf/linalg.hpp"
#include "iukf/random.hpp"

namespace iukf {

struct Dimensions {
  int state = 0;          // n_x
  int observation = 0;    // n_y, adversary's measurement
  int action = 0;         // n_a, defender's measurement of the adversary's action
};

// Difference of two observations; lets bearing-type channels wrap angles.
using ResidualMap = std::function<Vector(const Vector&, const Vector&)>;

struct ModelMaps {
  VectorMap transition;    // f
  VectorMap observation;   // h
  VectorMap action;        // g
  // Optional analytic Jacobians; empty entries fall back to central differences.
  JacobianMap transition_jacobian;
  JacobianMap observation_jacobian;
  JacobianMap action_jacobian;
  // Optional innovation residual for h; defaults to y - yhat.
  ResidualMap observation_residual;
};

struct NoiseCovariances {
  Matrix process;       // Q, p.s.d.
  Matrix measurement;   // R, p.d. for filtering (zero allowed for surrogates)
  Matrix action;        // Sigma_eps, likewise
};

// The three-layer system: x_{k+1} = f(x_k) + w_k, y_k = h(x_k) + v_k,
// a_k = g(xhat_k) + eps_k. Immutable after construction.
class NonlinearStateSpaceModel {
 public:
  NonlinearStateSpaceModel(Dimensions dims, ModelMaps maps, NoiseCovariances noise);

  const Dimensions& dims() const { return dims_; }
  const Matrix& process_noise() const { return noise_.process; }
  const Matrix& measurement_noise() const { return noise_.measurement; }
  const Matrix& action_noise() const { return noise_.action; }

  Vector transition(const Vector& x) const;
  Vector observe(const Vector& x) const;
  Vector act(const Vector& xhat) const;

  Matrix transition_jacobian(const Vector& x) const;
  Matrix observation_jacobian(const Vector& x) const;
  Matrix action_jacobian(const Vector& xhat) const;

  Vector observation_residual(const Vector& y, const Vector& yhat) const;

  // Sampling factors F with F Fᵀ = covariance (rank-deficient allowed).
  const Matrix& process_factor() const { return process_factor_; }
  const Matrix& measurement_factor() const { return measurement_factor_; }
  const Matrix& action_factor() const { return action_factor_; }

  // Same maps with different noise covariances; used by tests and by
  // large-noise surrogates.
  NonlinearStateSpaceModel with_noise(NoiseCovariances noise) const;

 private:
  Dimensions dims_;
  ModelMaps maps_;
  NoiseCovariances noise_;
  Matrix process_factor_;
  Matrix measurement_factor_;
  Matrix action_factor_;
};

struct Trajectory {
  std::vector<Vector> states;                   // x_0 ... x_K
  std::vector<Vector> observations;             // y_1 ... y_K (index j holds y_{j+1})
  std::vector<Vector> process_noise;            // w_0 ... w_{K-1}
  std::vector<Vector> measurement_noise;        // v_1 ... v_K (index j holds v_{j+1})

  int horizon() const { return static_cast<int>(observations.size()); }
};

// Simulates K = horizon steps using the process and measurement substreams of
// `seed` (run 0). Use the Rng overload to share a run's streams.
Trajectory simulate_trajectory(const NonlinearStateSpaceModel& model, const Vector& x0,
                               int horizon, std::uint64_t seed);
Trajectory simulate_trajectory(const NonlinearStateSpaceModel& model, const Vector& x0,
                               int horizon, Rng& process_rng, Rng& measurement_rng);

// One defender observation a = g(xhat) + eps drawn from the defender substream.
Vector simulate_defender_observation(const NonlinearStateSpaceModel& model, const Vector& xhat,
                                     std::uint64_t seed);

// eps_1 ... eps_K, drawn once per run so that every forward filter's action
// stream is perturbed by the identical noise sequence.
std::vector<Vector> sample_defender_noise(const NonlinearStateSpaceModel& model, int horizon,
                                          Rng& defender_rng);

// a_k = g(xhat_k) + eps_k for k = 1..K; estimates[j] and noise[j] pair with a_{j+1}.
std::vector<Vector> defender_observations(const NonlinearStateSpaceModel& model,
                                          const std::vector<Vector>& estimates,
                                          const std::vector<Vector>& noise);

}  // namespace iukf
