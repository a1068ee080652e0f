#include "iukf/forward_filters.hpp"

#include <string>

#include "iukf/errors.hpp"
#include "iukf/unscented.hpp"

namespace iukf {

std::string_view to_string(ForwardKind kind) {
  switch (kind) {
    case ForwardKind::kUkf: return "ukf";
    case ForwardKind::kEkf: return "ekf";
  }
  return "unknown";
}

ForwardKind parse_forward_kind(std::string_view text) {
  if (text == "ukf" || text == "UKF") return ForwardKind::kUkf;
  if (text == "ekf" || text == "EKF") return ForwardKind::kEkf;
  throw std::invalid_argument("unknown forward filter kind '" + std::string(text) + "'");
}

ForwardStepTrace ukf_trace(const NonlinearStateSpaceModel& model, const Vector& mean,
                           const Matrix& cov, double kappa) {
  ForwardStepTrace t;

  const SigmaPointSet s = generate_sigma_points(mean, cov, kappa);
  const Matrix s_star = propagate(s, [&](const Vector& x) { return model.transition(x); });
  Moments pred = unscented_moments(s, s_star, model.process_noise());
  t.predicted_mean = std::move(pred.mean);
  t.predicted_covariance = std::move(pred.covariance);

  // The measurement update draws a fresh set around the prediction.
  const SigmaPointSet q = generate_sigma_points(t.predicted_mean, t.predicted_covariance, kappa);
  const Matrix q_star = propagate(q, [&](const Vector& x) { return model.observe(x); });
  Moments obs = unscented_moments(q, q_star, model.measurement_noise());
  t.predicted_observation = std::move(obs.mean);
  t.innovation_covariance = std::move(obs.covariance);
  t.cross_covariance = cross_covariance(q, q.points, q_star, t.predicted_mean,
                                        t.predicted_observation);
  t.gain = solve_right_spd(t.innovation_covariance, t.cross_covariance, "ukf");
  return t;
}

ForwardStepTrace ekf_trace(const NonlinearStateSpaceModel& model, const Vector& mean,
                           const Matrix& cov) {
  ForwardStepTrace t;
  const Matrix f_jac = model.transition_jacobian(mean);
  t.predicted_mean = model.transition(mean);
  t.predicted_covariance =
      symmetrize(f_jac * cov * f_jac.transpose() + model.process_noise());

  const Matrix h_jac = model.observation_jacobian(t.predicted_mean);
  t.predicted_observation = model.observe(t.predicted_mean);
  t.cross_covariance = t.predicted_covariance * h_jac.transpose();
  t.innovation_covariance =
      symmetrize(h_jac * t.cross_covariance + model.measurement_noise());
  t.gain = solve_right_spd(t.innovation_covariance, t.cross_covariance, "ekf");
  return t;
}

ForwardStepTrace forward_trace(const NonlinearStateSpaceModel& model, const ForwardFilterSpec& spec,
                               const Vector& mean, const Matrix& cov) {
  switch (spec.kind) {
    case ForwardKind::kUkf: return ukf_trace(model, mean, cov, spec.kappa);
    case ForwardKind::kEkf: return ekf_trace(model, mean, cov);
  }
  throw std::logic_error("unhandled forward filter kind");
}

Vector updated_mean(const NonlinearStateSpaceModel& model, const ForwardStepTrace& trace,
                    const Vector& y) {
  return trace.predicted_mean +
         trace.gain * model.observation_residual(y, trace.predicted_observation);
}

Matrix updated_covariance(const ForwardStepTrace& trace) {
  return symmetrize(trace.predicted_covariance -
                    trace.gain * trace.innovation_covariance * trace.gain.transpose());
}

namespace {

ForwardStep finish_step(const NonlinearStateSpaceModel& model, const FilterState& state,
                        ForwardStepTrace trace, const Vector& y_next) {
  if (y_next.size() != model.dims().observation) {
    throw DimensionError("observation dimension does not match model");
  }
  ForwardStep out;
  out.state.mean = updated_mean(model, trace, y_next);
  out.state.covariance = updated_covariance(trace);
  out.state.step = state.step + 1;
  out.trace = std::move(trace);
  return out;
}

}  // namespace

ForwardStep ukf_step(const NonlinearStateSpaceModel& model, const FilterState& state,
                     const Vector& y_next, double kappa) {
  return finish_step(model, state, ukf_trace(model, state.mean, state.covariance, kappa), y_next);
}

ForwardStep ekf_step(const NonlinearStateSpaceModel& model, const FilterState& state,
                     const Vector& y_next) {
  return finish_step(model, state, ekf_trace(model, state.mean, state.covariance), y_next);
}

std::vector<Vector> ForwardRun::estimates() const {
  std::vector<Vector> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.state.mean);
  return out;
}

ForwardRun run_forward_filter(const NonlinearStateSpaceModel& model, const ForwardFilterSpec& spec,
                              const Vector& initial_mean, const Matrix& initial_cov,
                              const Trajectory& trajectory) {
  if (initial_mean.size() != model.dims().state) {
    throw DimensionError("initial estimate dimension does not match model");
  }
  ForwardRun run;
  run.initial = FilterState{initial_mean, symmetrize(initial_cov), 0};
  run.steps.reserve(trajectory.observations.size());

  const FilterState* current = &run.initial;
  for (const Vector& y : trajectory.observations) {
    const int k = current->step + 1;
    try {
      ForwardStep next = finish_step(
          model, *current, forward_trace(model, spec, current->mean, current->covariance), y);
      if (!next.state.mean.allFinite()) throw NumericalError("non-finite forward estimate");
      run.steps.push_back(std::move(next));
    } catch (const DimensionError&) {
      throw;
    } catch (const std::exception& e) {
      throw StepFailure(std::string(to_string(spec.kind)) + " step " + std::to_string(k) + ": " +
                            e.what(),
                        k);
    }
    current = &run.steps.back().state;
  }
  return run;
}

}  // namespace iukf
