#include "iukf/inverse_filters.hpp"

#include <string>

#include "iukf/errors.hpp"

namespace iukf {

std::string_view to_string(SigmaStarAnchor anchor) {
  return anchor == SigmaStarAnchor::kPrevious ? "previous" : "current";
}

SigmaStarAnchor parse_anchor(std::string_view text) {
  if (text == "previous") return SigmaStarAnchor::kPrevious;
  if (text == "current") return SigmaStarAnchor::kCurrent;
  throw std::invalid_argument("unknown sigma_star anchor '" + std::string(text) + "'");
}

std::string_view to_string(InverseKind kind) {
  return kind == InverseKind::kIukf ? "iukf" : "iekf";
}

InverseKind parse_inverse_kind(std::string_view text) {
  if (text == "iukf" || text == "IUKF") return InverseKind::kIukf;
  if (text == "iekf" || text == "IEKF") return InverseKind::kIekf;
  throw std::invalid_argument("unknown inverse filter kind '" + std::string(text) + "'");
}

AugmentedState augment(const InverseFilterState& state, const Matrix& measurement_noise) {
  const Eigen::Index nx = state.mean.size();
  const Eigen::Index ny = measurement_noise.rows();
  AugmentedState z;
  z.mean = Vector::Zero(nx + ny);
  z.mean.head(nx) = state.mean;
  z.covariance = Matrix::Zero(nx + ny, nx + ny);
  z.covariance.topLeftCorner(nx, nx) = state.covariance;
  z.covariance.bottomRightCorner(ny, ny) = measurement_noise;
  return z;
}

Vector evaluate_transition(const NonlinearStateSpaceModel& model, const ForwardFilterSpec& assumed,
                           const Vector& xhat, const Matrix& sigma, const Vector& x_next,
                           const Vector& v) {
  if (v.size() != model.dims().observation) {
    throw DimensionError("transition noise must have the observation dimension");
  }
  const ForwardStepTrace trace = forward_trace(model, assumed, xhat, sigma);
  // sum_i w_i (s*_i - K q*_i) + K h(x_{k+1}) + K v, written through the
  // innovation residual so angle-valued channels wrap consistently.
  return updated_mean(model, trace, model.observe(x_next) + v);
}

Vector evaluate_ftilde(const NonlinearStateSpaceModel& model, const Vector& xhat,
                       const Matrix& sigma, const Vector& x_next, const Vector& v,
                       double kappa_fwd) {
  return evaluate_transition(model, {ForwardKind::kUkf, kappa_fwd}, xhat, sigma, x_next, v);
}

Matrix replicate_forward_covariance(const NonlinearStateSpaceModel& model,
                                    const ForwardFilterSpec& assumed, const Vector& anchor,
                                    const Matrix& sigma_star) {
  return updated_covariance(forward_trace(model, assumed, anchor, sigma_star));
}

Matrix update_sigma_star(const NonlinearStateSpaceModel& model, const Vector& anchor,
                         const Matrix& sigma_star, double kappa_fwd) {
  return replicate_forward_covariance(model, {ForwardKind::kUkf, kappa_fwd}, anchor, sigma_star);
}

namespace {

Matrix advance_sigma_star(const NonlinearStateSpaceModel& model, const InverseFilterOptions& options,
                          const InverseFilterState& previous, const Vector& new_mean) {
  const Vector& anchor =
      options.anchor == SigmaStarAnchor::kPrevious ? previous.mean : new_mean;
  return replicate_forward_covariance(model, options.assumed_forward, anchor,
                                      previous.forward_covariance);
}

void check_inputs(const NonlinearStateSpaceModel& model, const InverseFilterState& state,
                  const Vector& x_next, const Vector& a_next) {
  const auto& d = model.dims();
  if (state.mean.size() != d.state || state.covariance.rows() != d.state ||
      state.forward_covariance.rows() != d.state) {
    throw DimensionError("inverse filter state does not match model dimensions");
  }
  if (x_next.size() != d.state) throw DimensionError("true state has wrong dimension");
  if (a_next.size() != d.action) throw DimensionError("defender observation has wrong dimension");
}

}  // namespace

InversePrediction iukf_predict(const NonlinearStateSpaceModel& model,
                               const InverseFilterState& state, const Vector& x_next,
                               const InverseFilterOptions& options) {
  const Eigen::Index nx = model.dims().state;
  const Eigen::Index ny = model.dims().observation;

  const AugmentedState z = augment(state, model.measurement_noise());
  InversePrediction p;
  p.sigma_points = generate_sigma_points(z.mean, z.covariance, options.inverse_kappa);
  p.propagated.resize(nx, p.sigma_points.count());
  for (Eigen::Index j = 0; j < p.sigma_points.count(); ++j) {
    const auto point = p.sigma_points.points.col(j);
    p.propagated.col(j) =
        evaluate_transition(model, options.assumed_forward, point.head(nx),
                            state.forward_covariance, x_next, point.tail(ny));
  }
  Moments m = unscented_moments(p.sigma_points, p.propagated);
  p.mean = std::move(m.mean);
  p.covariance = std::move(m.covariance);
  return p;
}

InverseFilterState iukf_step(const NonlinearStateSpaceModel& model,
                             const InverseFilterState& state, const Vector& x_next,
                             const Vector& a_next, const InverseFilterOptions& options) {
  check_inputs(model, state, x_next, a_next);
  const InversePrediction pred = iukf_predict(model, state, x_next, options);

  // The propagated points are reused for the measurement update.
  const Matrix a_star = [&] {
    Matrix out(model.dims().action, pred.propagated.cols());
    for (Eigen::Index j = 0; j < pred.propagated.cols(); ++j) {
      out.col(j) = model.act(pred.propagated.col(j));
    }
    return out;
  }();
  const Moments act = unscented_moments(pred.sigma_points, a_star, model.action_noise());
  const Matrix cross = cross_covariance(pred.sigma_points, pred.propagated, a_star, pred.mean,
                                        act.mean);
  const Matrix gain = solve_right_spd(act.covariance, cross, "iukf");

  InverseFilterState next;
  next.mean = pred.mean + gain * (a_next - act.mean);
  next.covariance = symmetrize(pred.covariance - gain * act.covariance * gain.transpose());
  next.forward_covariance = advance_sigma_star(model, options, state, next.mean);
  next.step = state.step + 1;
  return next;
}

InverseFilterState iukf_step(const NonlinearStateSpaceModel& model,
                             const InverseFilterState& state, const Vector& x_next,
                             const Vector& a_next, double kappa_fwd, double kappa_inv,
                             SigmaStarAnchor anchor) {
  return iukf_step(model, state, x_next, a_next,
                   InverseFilterOptions{{ForwardKind::kUkf, kappa_fwd}, kappa_inv, anchor});
}

InverseLinearization linearize_fixed_gain(const NonlinearStateSpaceModel& model,
                                          const ForwardFilterSpec& assumed, const Vector& xhathat,
                                          const Matrix& sigma_star, const Vector& x_next) {
  const ForwardStepTrace trace = forward_trace(model, assumed, xhathat, sigma_star);
  InverseLinearization lin;
  lin.gain = trace.gain;
  lin.noise_covariance =
      symmetrize(trace.gain * model.measurement_noise() * trace.gain.transpose());

  if (assumed.kind == ForwardKind::kEkf) {
    // (I - K H) F with F at xhathat and H at the predicted mean.
    const Matrix f_jac = model.transition_jacobian(xhathat);
    const Matrix h_jac = model.observation_jacobian(trace.predicted_mean);
    const Eigen::Index n = xhathat.size();
    lin.jacobian = (Matrix::Identity(n, n) - trace.gain * h_jac) * f_jac;
    return lin;
  }

  const Vector y_true = model.observe(x_next);
  const VectorMap frozen = [&](const Vector& x) {
    const ForwardStepTrace t = forward_trace(model, assumed, x, sigma_star);
    return Vector(t.predicted_mean +
                  lin.gain * model.observation_residual(y_true, t.predicted_observation));
  };
  lin.jacobian = numerical_jacobian(frozen, xhathat, 1e-5);
  return lin;
}

Matrix transition_jacobian(const NonlinearStateSpaceModel& model, const ForwardFilterSpec& assumed,
                           const Vector& xhathat, const Matrix& sigma_star, const Vector& x_next) {
  const Vector zero_noise = Vector::Zero(model.dims().observation);
  const VectorMap fn = [&](const Vector& x) {
    return evaluate_transition(model, assumed, x, sigma_star, x_next, zero_noise);
  };
  return numerical_jacobian(fn, xhathat, 1e-5);
}

InverseFilterState iekf_step(const NonlinearStateSpaceModel& model,
                             const InverseFilterState& state, const Vector& x_next,
                             const Vector& a_next, const InverseFilterOptions& options) {
  check_inputs(model, state, x_next, a_next);
  const InverseLinearization lin = linearize_fixed_gain(
      model, options.assumed_forward, state.mean, state.forward_covariance, x_next);

  const Vector zero_noise = Vector::Zero(model.dims().observation);
  const Vector pred_mean = evaluate_transition(model, options.assumed_forward, state.mean,
                                               state.forward_covariance, x_next, zero_noise);
  const Matrix pred_cov = symmetrize(lin.jacobian * state.covariance * lin.jacobian.transpose() +
                                     lin.noise_covariance);

  const Matrix g_jac = model.action_jacobian(pred_mean);
  const Matrix cross = pred_cov * g_jac.transpose();
  const Matrix innovation = symmetrize(g_jac * cross + model.action_noise());
  const Matrix gain = solve_right_spd(innovation, cross, "iekf");

  InverseFilterState next;
  next.mean = pred_mean + gain * (a_next - model.act(pred_mean));
  next.covariance = symmetrize(pred_cov - gain * innovation * gain.transpose());
  next.forward_covariance = advance_sigma_star(model, options, state, next.mean);
  next.step = state.step + 1;
  return next;
}

InverseFilterState iekf_step(const NonlinearStateSpaceModel& model,
                             const InverseFilterState& state, const Vector& x_next,
                             const Vector& a_next) {
  return iekf_step(model, state, x_next, a_next,
                   InverseFilterOptions{{ForwardKind::kEkf, 0.0}, 0.0, SigmaStarAnchor::kPrevious});
}

InverseRun run_inverse_filter(const NonlinearStateSpaceModel& model, InverseKind kind,
                              const InverseFilterOptions& options,
                              const InverseFilterState& initial, const Trajectory& trajectory,
                              const std::vector<Vector>& forward_estimates,
                              const std::vector<Vector>& defender_obs) {
  const std::size_t horizon = trajectory.observations.size();
  if (defender_obs.size() != horizon || forward_estimates.size() != horizon) {
    throw DimensionError("inverse filter needs one defender observation and one forward "
                         "estimate per trajectory step");
  }
  InverseRun run;
  run.initial = initial;
  run.steps.reserve(horizon);
  run.errors.reserve(horizon);

  const InverseFilterState* current = &run.initial;
  for (std::size_t j = 0; j < horizon; ++j) {
    const int k = current->step + 1;
    const Vector& x_next = trajectory.states[j + 1];
    try {
      InverseFilterState next =
          kind == InverseKind::kIukf
              ? iukf_step(model, *current, x_next, defender_obs[j], options)
              : iekf_step(model, *current, x_next, defender_obs[j], options);
      if (!next.mean.allFinite()) throw NumericalError("non-finite inverse estimate");
      run.errors.push_back(next.mean - forward_estimates[j]);
      run.steps.push_back(std::move(next));
    } catch (const DimensionError&) {
      throw;
    } catch (const std::exception& e) {
      throw StepFailure(std::string(to_string(kind)) + " step " + std::to_string(k) + ": " +
                            e.what(),
                        k);
    }
    current = &run.steps.back();
  }
  return run;
}

}  // namespace iukf
