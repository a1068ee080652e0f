#include "iukf/statespace.hpp"

#include <algorithm>
#include <string>

#include "iukf/errors.hpp"

namespace iukf {
namespace {

void require_square(const Matrix& m, int n, const char* name) {
  if (m.rows() != n || m.cols() != n) {
    throw DimensionError(std::string(name) + " must be " + std::to_string(n) + "x" +
                         std::to_string(n) + ", got " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
  }
  if (!is_symmetric(m, 1e-10)) throw std::invalid_argument(std::string(name) + " must be symmetric");
}

void require_psd(const Matrix& m, const char* name) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(m), Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() < -1e-10 * scale) {
    throw std::invalid_argument(std::string(name) + " must be positive semidefinite");
  }
}

void require_dim(const Vector& v, int n, const char* what) {
  if (v.size() != n) {
    throw DimensionError(std::string(what) + " has dimension " + std::to_string(v.size()) +
                         ", expected " + std::to_string(n));
  }
}

}  // namespace

NonlinearStateSpaceModel::NonlinearStateSpaceModel(Dimensions dims, ModelMaps maps,
                                                   NoiseCovariances noise)
    : dims_(dims), maps_(std::move(maps)), noise_(std::move(noise)) {
  if (dims_.state <= 0 || dims_.observation <= 0 || dims_.action <= 0) {
    throw DimensionError("model dimensions must be positive");
  }
  if (!maps_.transition || !maps_.observation || !maps_.action) {
    throw std::invalid_argument("model requires transition, observation and action maps");
  }
  require_square(noise_.process, dims_.state, "process noise Q");
  require_square(noise_.measurement, dims_.observation, "measurement noise R");
  require_square(noise_.action, dims_.action, "action noise Sigma_eps");
  // R and Sigma_eps may be zero for noiseless surrogates; a singular innovation
  // covariance is reported by the filters that need to invert it.
  require_psd(noise_.process, "process noise Q");
  require_psd(noise_.measurement, "measurement noise R");
  require_psd(noise_.action, "action noise Sigma_eps");
  noise_.process = symmetrize(noise_.process);
  noise_.measurement = symmetrize(noise_.measurement);
  noise_.action = symmetrize(noise_.action);
  process_factor_ = psd_factor(noise_.process);
  measurement_factor_ = psd_factor(noise_.measurement);
  action_factor_ = psd_factor(noise_.action);
}

NonlinearStateSpaceModel NonlinearStateSpaceModel::with_noise(NoiseCovariances noise) const {
  return NonlinearStateSpaceModel(dims_, maps_, std::move(noise));
}

Vector NonlinearStateSpaceModel::transition(const Vector& x) const {
  require_dim(x, dims_.state, "state");
  return maps_.transition(x);
}

Vector NonlinearStateSpaceModel::observe(const Vector& x) const {
  require_dim(x, dims_.state, "state");
  return maps_.observation(x);
}

Vector NonlinearStateSpaceModel::act(const Vector& xhat) const {
  require_dim(xhat, dims_.state, "state estimate");
  return maps_.action(xhat);
}

Matrix NonlinearStateSpaceModel::transition_jacobian(const Vector& x) const {
  if (maps_.transition_jacobian) return maps_.transition_jacobian(x);
  return numerical_jacobian(maps_.transition, x);
}

Matrix NonlinearStateSpaceModel::observation_jacobian(const Vector& x) const {
  if (maps_.observation_jacobian) return maps_.observation_jacobian(x);
  return numerical_jacobian(maps_.observation, x);
}

Matrix NonlinearStateSpaceModel::action_jacobian(const Vector& xhat) const {
  if (maps_.action_jacobian) return maps_.action_jacobian(xhat);
  return numerical_jacobian(maps_.action, xhat);
}

Vector NonlinearStateSpaceModel::observation_residual(const Vector& y, const Vector& yhat) const {
  if (maps_.observation_residual) return maps_.observation_residual(y, yhat);
  return y - yhat;
}

Trajectory simulate_trajectory(const NonlinearStateSpaceModel& model, const Vector& x0,
                               int horizon, std::uint64_t seed) {
  Rng process = make_stream(seed, 0, Stream::kProcess);
  Rng measurement = make_stream(seed, 0, Stream::kMeasurement);
  return simulate_trajectory(model, x0, horizon, process, measurement);
}

Trajectory simulate_trajectory(const NonlinearStateSpaceModel& model, const Vector& x0,
                               int horizon, Rng& process_rng, Rng& measurement_rng) {
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  require_dim(x0, model.dims().state, "initial state");

  Trajectory traj;
  traj.states.reserve(horizon + 1);
  traj.observations.reserve(horizon);
  traj.process_noise.reserve(horizon);
  traj.measurement_noise.reserve(horizon);

  traj.states.push_back(x0);
  for (int k = 0; k < horizon; ++k) {
    Vector w = gaussian(process_rng, model.process_factor());
    Vector next = model.transition(traj.states.back()) + w;
    Vector v = gaussian(measurement_rng, model.measurement_factor());
    Vector y = model.observe(next) + v;
    traj.process_noise.push_back(std::move(w));
    traj.states.push_back(std::move(next));
    traj.measurement_noise.push_back(std::move(v));
    traj.observations.push_back(std::move(y));
  }
  return traj;
}

Vector simulate_defender_observation(const NonlinearStateSpaceModel& model, const Vector& xhat,
                                     std::uint64_t seed) {
  Rng rng = make_stream(seed, 0, Stream::kDefender);
  return model.act(xhat) + gaussian(rng, model.action_factor());
}

std::vector<Vector> sample_defender_noise(const NonlinearStateSpaceModel& model, int horizon,
                                          Rng& defender_rng) {
  std::vector<Vector> noise;
  noise.reserve(horizon);
  for (int k = 0; k < horizon; ++k) noise.push_back(gaussian(defender_rng, model.action_factor()));
  return noise;
}

std::vector<Vector> defender_observations(const NonlinearStateSpaceModel& model,
                                          const std::vector<Vector>& estimates,
                                          const std::vector<Vector>& noise) {
  if (estimates.size() > noise.size()) {
    throw DimensionError("fewer defender noise draws than estimates");
  }
  std::vector<Vector> actions;
  actions.reserve(estimates.size());
  for (std::size_t j = 0; j < estimates.size(); ++j) {
    actions.push_back(model.act(estimates[j]) + noise[j]);
  }
  return actions;
}

}  // namespace iukf
