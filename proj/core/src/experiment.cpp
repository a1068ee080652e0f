#include "iukf/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <thread>

#include "iukf/errors.hpp"
#include "iukf/rcrlb.hpp"

namespace iukf {

// ===========================================================================
// Configuration helpers
// ===========================================================================

void apply_default_filter_matrix(ExperimentConfig& config) {
  if (!config.forward_filters.empty() || !config.inverse_filters.empty()) return;
  config.forward_filters = {{"UKF", ForwardKind::kUkf, std::nullopt},
                            {"EKF", ForwardKind::kEkf, std::nullopt}};
  using IK = InverseKind;
  using FK = ForwardKind;
  if (config.scenario == "fm") {
    config.inverse_filters = {
        {"IUKF-1", IK::kIukf, "UKF", FK::kUkf, std::nullopt, std::nullopt},
        {"IUKF-2", IK::kIukf, "EKF", FK::kUkf, std::nullopt, std::nullopt},
        {"IEKF-1", IK::kIekf, "EKF", FK::kEkf, std::nullopt, std::nullopt},
        {"IEKF-2", IK::kIekf, "UKF", FK::kEkf, std::nullopt, std::nullopt},
        {"IUKF-1-matched", IK::kIukf, "UKF", FK::kUkf, config.fm.forward_kappa, std::nullopt},
    };
  } else if (config.scenario == "reentry") {
    config.inverse_filters = {
        {"IUKF-1", IK::kIukf, "UKF", FK::kUkf, std::nullopt, std::nullopt},
        {"IUKF-2", IK::kIukf, "EKF", FK::kUkf, std::nullopt, std::nullopt},
    };
  } else {
    config.inverse_filters = {
        {"IUKF-1", IK::kIukf, "UKF", FK::kUkf, std::nullopt, std::nullopt},
        {"IEKF-1", IK::kIekf, "EKF", FK::kEkf, std::nullopt, std::nullopt},
    };
  }
}

Scenario make_scenario(const ExperimentConfig& config) {
  Scenario scenario = [&] {
    if (config.scenario == "fm") return fm_demodulator_model(config.fm);
    if (config.scenario == "reentry") return reentry_model(config.reentry);
    if (config.scenario == "linear") return linear_toy_model(config.linear);
    throw ConfigError("unknown scenario '" + config.scenario + "'");
  }();
  if (config.horizon) scenario.config.horizon = *config.horizon;
  if (config.runs) scenario.config.runs = *config.runs;
  return scenario;
}

void validate(const ExperimentConfig& config) {
  if (config.horizon && *config.horizon < 1) throw ConfigError("horizon must be >= 1");
  if (config.runs && *config.runs < 1) throw ConfigError("runs must be >= 1");
  if (!(config.regularization > 0.0)) throw ConfigError("regularization must be positive");
  if (config.forward_filters.empty()) throw ConfigError("at least one forward filter is required");
  std::set<std::string> names;
  std::set<std::string> forward_names;
  for (const auto& f : config.forward_filters) {
    if (f.name.empty()) throw ConfigError("forward filter without a name");
    if (!names.insert(f.name).second) throw ConfigError("duplicate filter name '" + f.name + "'");
    forward_names.insert(f.name);
  }
  for (const auto& inv : config.inverse_filters) {
    if (inv.name.empty()) throw ConfigError("inverse filter without a name");
    if (!names.insert(inv.name).second) {
      throw ConfigError("duplicate filter name '" + inv.name + "'");
    }
    if (!forward_names.contains(inv.true_forward)) {
      throw ConfigError("inverse filter '" + inv.name + "' watches unknown forward filter '" +
                        inv.true_forward + "'");
    }
  }
}

const CurveSummary& ExperimentSummary::curve(const std::string& name) const {
  for (const auto& c : curves) {
    if (c.name == name) return c;
  }
  throw std::out_of_range("no curve named '" + name + "'");
}

int default_worker_count() {
  if (const char* env = std::getenv("IUKF_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// ===========================================================================
// One run
// ===========================================================================

namespace {

double squared_error(const Vector& diff, const std::vector<int>& indices) {
  if (indices.empty()) return diff.squaredNorm();
  double sum = 0.0;
  for (int i : indices) sum += diff(i) * diff(i);
  return sum;
}

struct ResolvedInverse {
  const InverseFilterConfig* config;
  InverseFilterOptions options;
  std::size_t true_forward_index;
};

std::vector<std::string> curve_names(const ExperimentConfig& config) {
  std::vector<std::string> curves;
  auto add = [&](const std::string& name) {
    curves.push_back(name + ".sq_err");
    if (config.compute_bounds) curves.push_back(name + ".crlb_trace");
  };
  for (const auto& f : config.forward_filters) add(f.name);
  for (const auto& inv : config.inverse_filters) add(inv.name);
  return curves;
}

void forward_bounds(const NonlinearStateSpaceModel& model, const ScenarioConfig& sc,
                    const Matrix& q_reg, const ForwardRun& run,
                    Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> out) {
  InformationState info{symmetrize(sc.forward_initial_covariance.inverse()), 0};
  const Vector* previous = &run.initial.mean;
  for (std::size_t j = 0; j < run.steps.size(); ++j) {
    const Vector& current = run.steps[j].state.mean;
    info = forward_rcrlb_step(info, model.transition_jacobian(*previous),
                              model.observation_jacobian(current), q_reg,
                              model.measurement_noise());
    out(static_cast<Eigen::Index>(j)) = bound_trace(info, sc.error_indices);
    previous = &current;
  }
}

void inverse_bounds(const NonlinearStateSpaceModel& model, const ScenarioConfig& sc,
                    const ExperimentConfig& config, InverseKind kind,
                    const InverseFilterOptions& options, const Trajectory& traj,
                    const InverseRun& run,
                    Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> out) {
  InformationState info{symmetrize(sc.inverse_initial_covariance.inverse()), 0};
  const InverseFilterState* previous = &run.initial;
  for (std::size_t j = 0; j < run.steps.size(); ++j) {
    const Vector& x_next = traj.states[j + 1];
    const InverseLinearization lin = linearize_fixed_gain(
        model, options.assumed_forward, previous->mean, previous->forward_covariance, x_next);
    // The unscented inverse differentiates the full transition (gain
    // recomputed); the extended inverse uses its own fixed-gain linearization.
    const Matrix ftilde = kind == InverseKind::kIukf
                              ? transition_jacobian(model, options.assumed_forward, previous->mean,
                                                    previous->forward_covariance, x_next)
                              : lin.jacobian;
    const Matrix qbar = regularize(lin.noise_covariance, config.regularization).matrix;
    const InverseFilterState& current = run.steps[j];
    info = inverse_rcrlb_step(info, ftilde, model.action_jacobian(current.mean), qbar,
                              model.action_noise());
    out(static_cast<Eigen::Index>(j)) = bound_trace(info, sc.error_indices);
    previous = &current;
  }
}

}  // namespace

MonteCarloRecord run_single(const Scenario& scenario, const ExperimentConfig& config,
                            const std::vector<std::string>& curves, int run_id) {
  const auto& model = scenario.model;
  const auto& sc = scenario.config;
  const int horizon = sc.horizon;

  MonteCarloRecord record;
  record.run_id = run_id;
  record.values = Matrix::Zero(static_cast<Eigen::Index>(curves.size()), horizon);

  const auto run = static_cast<std::uint64_t>(run_id);
  Rng initial_rng = make_stream(config.seed, run, Stream::kInitial);
  Rng process_rng = make_stream(config.seed, run, Stream::kProcess);
  Rng measurement_rng = make_stream(config.seed, run, Stream::kMeasurement);
  Rng defender_rng = make_stream(config.seed, run, Stream::kDefender);

  try {
    const InitialConditions init = sc.draw_initial(initial_rng);
    const Trajectory traj =
        simulate_trajectory(model, init.true_state, horizon, process_rng, measurement_rng);
    const std::vector<Vector> action_noise = sample_defender_noise(model, horizon, defender_rng);
    const Matrix q_reg = regularize(model.process_noise(), config.regularization).matrix;

    Eigen::Index row = 0;
    std::vector<ForwardRun> forward_runs;
    std::vector<std::vector<Vector>> forward_estimates;
    for (const auto& f : config.forward_filters) {
      const ForwardFilterSpec spec{f.kind, f.kappa.value_or(sc.forward_kappa)};
      forward_runs.push_back(run_forward_filter(model, spec, init.forward_mean,
                                                sc.forward_initial_covariance, traj));
      forward_estimates.push_back(forward_runs.back().estimates());
      const auto& est = forward_estimates.back();
      for (int j = 0; j < horizon; ++j) {
        record.values(row, j) = squared_error(traj.states[j + 1] - est[j], sc.error_indices);
      }
      ++row;
      if (config.compute_bounds) {
        forward_bounds(model, sc, q_reg, forward_runs.back(), record.values.row(row));
        ++row;
      }
    }

    for (const auto& inv : config.inverse_filters) {
      const auto it = std::find_if(config.forward_filters.begin(), config.forward_filters.end(),
                                   [&](const auto& f) { return f.name == inv.true_forward; });
      const auto idx = static_cast<std::size_t>(it - config.forward_filters.begin());
      InverseFilterOptions options;
      options.assumed_forward = {inv.assumed_forward,
                                 inv.assumed_kappa.value_or(sc.assumed_forward_kappa)};
      options.inverse_kappa = inv.inverse_kappa.value_or(sc.inverse_kappa);
      options.anchor = config.sigma_star_anchor;

      const std::vector<Vector> actions =
          defender_observations(model, forward_estimates[idx], action_noise);
      const InverseFilterState initial{init.inverse_mean, sc.inverse_initial_covariance,
                                       sc.forward_initial_covariance, 0};
      const InverseRun inverse_run = run_inverse_filter(model, inv.kind, options, initial, traj,
                                                        forward_estimates[idx], actions);
      for (int j = 0; j < horizon; ++j) {
        record.values(row, j) = squared_error(inverse_run.errors[j], sc.error_indices);
      }
      ++row;
      if (config.compute_bounds) {
        inverse_bounds(model, sc, config, inv.kind, options, traj, inverse_run,
                       record.values.row(row));
        ++row;
      }
    }
    if (!record.values.allFinite()) throw NumericalError("non-finite record entry");
  } catch (const NumericalError& e) {
    record.failure = RunFailure{run_id, e.step().value_or(0), e.what()};
  } catch (const std::invalid_argument& e) {
    record.failure = RunFailure{run_id, 0, e.what()};
  }
  return record;
}

// ===========================================================================
// Ensemble
// ===========================================================================

ExperimentSummary summarize(const std::vector<std::string>& curves, int horizon,
                            const std::vector<MonteCarloRecord>& records) {
  ExperimentSummary summary;
  std::vector<const MonteCarloRecord*> used;
  for (const auto& r : records) {
    if (r.failure) {
      summary.failures.push_back(*r.failure);
    } else {
      used.push_back(&r);
    }
  }
  summary.runs_used = static_cast<int>(used.size());
  summary.runs_excluded = static_cast<int>(summary.failures.size());

  const double n = static_cast<double>(used.size());
  for (std::size_t c = 0; c < curves.size(); ++c) {
    CurveSummary cs;
    cs.name = curves[c];
    cs.mean.assign(horizon, 0.0);
    cs.standard_error.assign(horizon, 0.0);
    cs.cumulative.assign(horizon, 0.0);
    const auto row = static_cast<Eigen::Index>(c);
    double running = 0.0;
    for (int k = 0; k < horizon; ++k) {
      double sum = 0.0;
      for (const auto* r : used) sum += r->values(row, k);
      const double mean = used.empty() ? 0.0 : sum / n;
      double ss = 0.0;
      for (const auto* r : used) {
        const double d = r->values(row, k) - mean;
        ss += d * d;
      }
      cs.mean[k] = mean;
      cs.standard_error[k] = used.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
      running += sum;
      cs.cumulative[k] = used.empty() ? 0.0 : std::sqrt(running / (n * (k + 1)));
    }
    cs.time_averaged = horizon > 0 ? cs.cumulative.back() : 0.0;
    summary.curves.push_back(std::move(cs));
  }
  return summary;
}

ExperimentResult run_experiment(const ExperimentConfig& input, int workers) {
  ExperimentConfig config = input;
  apply_default_filter_matrix(config);
  validate(config);
  const Scenario scenario = make_scenario(config);

  ExperimentResult result;
  result.curves = curve_names(config);
  result.horizon = scenario.config.horizon;
  const int runs = scenario.config.runs;
  result.records.resize(runs);

  if (workers <= 0) workers = default_worker_count();
  workers = std::min(workers, runs);

  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next.fetch_add(1); i < runs; i = next.fetch_add(1)) {
      result.records[i] = run_single(scenario, config, result.curves, i);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  result.summary = summarize(result.curves, result.horizon, result.records);
  return result;
}

std::vector<double> per_run_time_average(const ExperimentResult& result, const std::string& curve) {
  const auto it = std::find(result.curves.begin(), result.curves.end(), curve);
  if (it == result.curves.end()) throw std::out_of_range("no curve named '" + curve + "'");
  const auto row = static_cast<Eigen::Index>(it - result.curves.begin());
  std::vector<double> out;
  for (const auto& r : result.records) {
    if (!r.failure) out.push_back(r.values.row(row).mean());
  }
  return out;
}

}  // namespace iukf
