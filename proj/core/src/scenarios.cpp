#include "iukf/scenarios.hpp"

#include <cmath>
#include <numbers>

#include "iukf/errors.hpp"

namespace iukf {
namespace {

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

// ---------------------------------------------------------------------------
// FM demodulator

Matrix fm_transition_matrix(const FmParameters& p) {
  const double decay = std::exp(-p.sample_period / p.beta);
  Matrix a(2, 2);
  a(0, 0) = decay;
  a(0, 1) = 0.0;
  a(1, 0) = p.literal_transition ? -p.beta * decay - 1.0 : p.beta * (decay - 1.0);
  a(1, 1) = 1.0;
  return a;
}

Scenario fm_demodulator_model(const FmParameters& p) {
  const Matrix a = fm_transition_matrix(p);
  const double amp = std::numbers::sqrt2;

  ModelMaps maps;
  maps.transition = [a](const Vector& x) { return Vector(a * x); };
  maps.transition_jacobian = [a](const Vector&) { return a; };
  maps.observation = [amp](const Vector& x) {
    Vector y(2);
    y << amp * std::sin(x(1)), amp * std::cos(x(1));
    return y;
  };
  maps.observation_jacobian = [amp](const Vector& x) {
    Matrix h(2, 2);
    h << 0.0, amp * std::cos(x(1)), 0.0, -amp * std::sin(x(1));
    return h;
  };
  maps.action = [](const Vector& x) {
    Vector out(1);
    out << x(0) * x(0);
    return out;
  };
  maps.action_jacobian = [](const Vector& x) {
    Matrix g(1, 2);
    g << 2.0 * x(0), 0.0;
    return g;
  };

  Vector noise_gain(2);
  noise_gain << 1.0, -p.beta;
  NoiseCovariances noise{p.process_variance * noise_gain * noise_gain.transpose(),
                         p.measurement_variance * Matrix::Identity(2, 2),
                         Matrix::Constant(1, 1, p.action_variance)};

  ScenarioConfig cfg;
  cfg.name = "fm";
  cfg.forward_initial_covariance = p.forward_initial_variance * Matrix::Identity(2, 2);
  cfg.inverse_initial_covariance = p.inverse_initial_variance * Matrix::Identity(2, 2);
  cfg.forward_kappa = p.forward_kappa;
  cfg.inverse_kappa = p.inverse_kappa;
  cfg.assumed_forward_kappa = p.assumed_forward_kappa;
  cfg.horizon = p.horizon;
  cfg.runs = p.runs;
  cfg.draw_initial = [](Rng& rng) {
    std::normal_distribution<double> lambda(0.0, 1.0);
    std::uniform_real_distribution<double> theta(-std::numbers::pi, std::numbers::pi);
    InitialConditions init;
    init.true_state = Vector(2);
    init.true_state << lambda(rng), theta(rng);
    init.forward_mean = Vector(2);
    init.forward_mean << lambda(rng), theta(rng);
    init.inverse_mean = init.true_state;
    return init;
  };

  return {NonlinearStateSpaceModel({2, 2, 1}, std::move(maps), std::move(noise)), std::move(cfg)};
}

// ---------------------------------------------------------------------------
// Vehicle reentry

Vector reentry_drift(const ReentryParameters& p, const Vector& x) {
  const double radius = std::hypot(x(0), x(1));
  if (!(radius > 1e-6) || !std::isfinite(radius)) {
    throw SimulationAbort("reentry: vehicle radius collapsed (rho = " + std::to_string(radius) +
                          ")");
  }
  const double speed = std::hypot(x(2), x(3));
  const double ballistic = p.beta0 * std::exp(x(4));
  const double drag = ballistic * std::exp((p.rho0 - radius) / p.h0) * speed;
  const double gravity = -p.gm0 / (radius * radius * radius);
  Vector dx(5);
  dx << x(2), x(3), drag * x(2) + gravity * x(0), drag * x(3) + gravity * x(1), 0.0;
  return dx;
}

Scenario reentry_model(const ReentryParameters& p) {
  if (p.substeps < 1) throw std::invalid_argument("reentry substeps must be >= 1");
  if (p.initial_state.size() != 5 || p.forward_initial_mean.size() != 5 ||
      p.forward_initial_variances.size() != 5 || p.inverse_initial_variances.size() != 5) {
    throw DimensionError("reentry initial vectors must have 5 entries");
  }

  ModelMaps maps;
  maps.transition = [p](const Vector& x0) {
    const double h = p.dt / p.substeps;
    Vector x = x0;
    for (int s = 0; s < p.substeps; ++s) {
      const Vector k1 = reentry_drift(p, x);
      const Vector k2 = reentry_drift(p, x + 0.5 * h * k1);
      const Vector k3 = reentry_drift(p, x + 0.5 * h * k2);
      const Vector k4 = reentry_drift(p, x + h * k3);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return x;
  };
  maps.observation = [p](const Vector& x) {
    const double dx = x(0) - p.rho0;
    Vector y(2);
    y << std::hypot(dx, x(1)), std::atan2(x(1), dx);
    return y;
  };
  maps.observation_jacobian = [p](const Vector& x) {
    const double dx = x(0) - p.rho0;
    const double r2 = dx * dx + x(1) * x(1);
    const double r = std::sqrt(r2);
    Matrix h = Matrix::Zero(2, 5);
    h(0, 0) = dx / r;
    h(0, 1) = x(1) / r;
    h(1, 0) = -x(1) / r2;
    h(1, 1) = dx / r2;
    return h;
  };
  maps.observation_residual = [](const Vector& y, const Vector& yhat) {
    Vector r = y - yhat;
    r(1) = wrap_angle(r(1));
    return r;
  };
  maps.action = [](const Vector& x) { return Vector(x.head(2)); };
  maps.action_jacobian = [](const Vector&) {
    Matrix g = Matrix::Zero(2, 5);
    g(0, 0) = 1.0;
    g(1, 1) = 1.0;
    return g;
  };

  Vector q = Vector::Zero(5);
  q(2) = p.q_velocity;
  q(3) = p.q_velocity;
  q(4) = p.q_parameter;
  Vector r(2);
  r << p.range_sigma * p.range_sigma, p.bearing_sigma * p.bearing_sigma;
  NoiseCovariances noise{Matrix((p.dt * q).asDiagonal()), Matrix(r.asDiagonal()),
                         p.action_variance * Matrix::Identity(2, 2)};

  ScenarioConfig cfg;
  cfg.name = "reentry";
  cfg.forward_initial_covariance = to_vector(p.forward_initial_variances).asDiagonal();
  cfg.inverse_initial_covariance = to_vector(p.inverse_initial_variances).asDiagonal();
  cfg.forward_kappa = p.forward_kappa;
  cfg.inverse_kappa = p.inverse_kappa;
  cfg.assumed_forward_kappa = p.assumed_forward_kappa;
  cfg.horizon = p.horizon;
  cfg.runs = p.runs;
  cfg.error_indices = {0, 1};
  const Vector x0 = to_vector(p.initial_state);
  const Vector xhat0 = to_vector(p.forward_initial_mean);
  cfg.draw_initial = [x0, xhat0](Rng&) { return InitialConditions{x0, xhat0, x0}; };

  return {NonlinearStateSpaceModel({5, 2, 2}, std::move(maps), std::move(noise)), std::move(cfg)};
}

// ---------------------------------------------------------------------------
// Linear toy system

LinearParameters default_linear_parameters() {
  LinearParameters p;
  p.transition = Matrix(3, 3);
  p.transition << 0.9, 0.2, 0.0,
                  0.0, 0.7, 0.1,
                  0.1, 0.0, 0.8;
  p.observation = Matrix(2, 3);
  p.observation << 1.0, 0.0, 0.0,
                   0.0, 1.0, 1.0;
  p.action = Matrix(1, 3);
  p.action << 1.0, 1.0, 1.0;
  p.process_noise = Matrix::Identity(3, 3);
  p.measurement_noise = 4.0 * Matrix::Identity(2, 2);
  p.action_noise = Matrix::Constant(1, 1, 9.0);
  p.initial_state = Vector::Ones(3);
  p.forward_initial_mean = Vector::Zero(3);
  p.forward_initial_covariance = 10.0 * Matrix::Identity(3, 3);
  p.inverse_initial_covariance = 15.0 * Matrix::Identity(3, 3);
  return p;
}

Scenario linear_toy_model(const LinearParameters& p) {
  const Eigen::Index n = p.transition.rows();
  if (p.transition.cols() != n || p.observation.cols() != n || p.action.cols() != n) {
    throw DimensionError("linear model matrices have inconsistent dimensions");
  }
  const Matrix a = p.transition;
  const Matrix h = p.observation;
  const Matrix g = p.action;
  ModelMaps maps;
  maps.transition = [a](const Vector& x) { return Vector(a * x); };
  maps.transition_jacobian = [a](const Vector&) { return a; };
  maps.observation = [h](const Vector& x) { return Vector(h * x); };
  maps.observation_jacobian = [h](const Vector&) { return h; };
  maps.action = [g](const Vector& x) { return Vector(g * x); };
  maps.action_jacobian = [g](const Vector&) { return g; };

  ScenarioConfig cfg;
  cfg.name = "linear";
  cfg.forward_initial_covariance =
      p.forward_initial_covariance.size() ? p.forward_initial_covariance : Matrix::Identity(n, n);
  cfg.inverse_initial_covariance =
      p.inverse_initial_covariance.size() ? p.inverse_initial_covariance : Matrix::Identity(n, n);
  cfg.forward_kappa = p.forward_kappa;
  cfg.inverse_kappa = p.inverse_kappa;
  cfg.assumed_forward_kappa = p.assumed_forward_kappa;
  cfg.horizon = p.horizon;
  cfg.runs = p.runs;
  const Vector x0 = p.initial_state.size() ? p.initial_state : Vector::Zero(n);
  const Vector xhat0 = p.forward_initial_mean.size() ? p.forward_initial_mean : Vector::Zero(n);
  if (p.random_initial) {
    // Priors consistent with the filters: x0 ~ N(xhat0, Sigma0) and
    // xhathat0 ~ N(xhat0, Sigma-bar0), so KF and IKF covariances are the true
    // error covariances from the first step on.
    const Matrix fwd_factor = psd_factor(cfg.forward_initial_covariance);
    const Matrix inv_factor = psd_factor(cfg.inverse_initial_covariance);
    cfg.draw_initial = [xhat0, fwd_factor, inv_factor](Rng& rng) {
      InitialConditions init;
      init.true_state = xhat0 + gaussian(rng, fwd_factor);
      init.forward_mean = xhat0;
      init.inverse_mean = xhat0 + gaussian(rng, inv_factor);
      return init;
    };
  } else {
    cfg.draw_initial = [x0, xhat0](Rng&) { return InitialConditions{x0, xhat0, x0}; };
  }

  Dimensions dims{static_cast<int>(n), static_cast<int>(h.rows()), static_cast<int>(g.rows())};
  NoiseCovariances noise{p.process_noise, p.measurement_noise, p.action_noise};
  return {NonlinearStateSpaceModel(dims, std::move(maps), std::move(noise)), std::move(cfg)};
}

}  // namespace iukf
