#include <benchmark/benchmark.h>

#include "iukf/forward_filters.hpp"
#include "iukf/inverse_filters.hpp"
#include "iukf/rcrlb.hpp"
#include "iukf/scenarios.hpp"

using namespace iukf;

namespace {

struct Fixture {
  Scenario scenario;
  Trajectory traj;
  ForwardRun forward;
  InverseFilterState inverse;
  double kappa;
  double inverse_kappa;
};

Fixture make(Scenario scenario) {
  Rng init_rng(11);
  const auto init = scenario.config.draw_initial(init_rng);
  auto traj = simulate_trajectory(scenario.model, init.true_state, 20, 11);
  auto forward = run_forward_filter(scenario.model,
                                    {ForwardKind::kUkf, scenario.config.forward_kappa},
                                    init.forward_mean, scenario.config.forward_initial_covariance,
                                    traj);
  InverseFilterState inverse{forward.steps[9].state.mean, scenario.config.inverse_initial_covariance,
                             forward.steps[9].state.covariance, 10};
  const double kappa = scenario.config.assumed_forward_kappa;
  const double inverse_kappa = scenario.config.inverse_kappa;
  return {std::move(scenario), std::move(traj), std::move(forward), std::move(inverse), kappa,
          inverse_kappa};
}

const Fixture& fm() {
  static const Fixture f = make(fm_demodulator_model());
  return f;
}

const Fixture& reentry() {
  static const Fixture f = make(reentry_model());
  return f;
}

void ukf_step_bench(benchmark::State& state, const Fixture& f) {
  const FilterState& s = f.forward.steps[9].state;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ukf_step(f.scenario.model, s, f.traj.observations[10], f.kappa));
  }
}

void iukf_step_bench(benchmark::State& state, const Fixture& f) {
  const Vector action = f.scenario.model.act(f.forward.steps[10].state.mean);
  for (auto _ : state) {
    benchmark::DoNotOptimize(iukf_step(f.scenario.model, f.inverse, f.traj.states[11], action,
                                       f.kappa, f.inverse_kappa, SigmaStarAnchor::kPrevious));
  }
}

void iekf_step_bench(benchmark::State& state, const Fixture& f) {
  const Vector action = f.scenario.model.act(f.forward.steps[10].state.mean);
  for (auto _ : state) {
    benchmark::DoNotOptimize(iekf_step(f.scenario.model, f.inverse, f.traj.states[11], action));
  }
}

void ftilde_bench(benchmark::State& state, const Fixture& f) {
  const Vector v = Vector::Zero(f.scenario.model.dims().observation);
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_ftilde(f.scenario.model, f.inverse.mean,
                                             f.inverse.forward_covariance, f.traj.states[11], v,
                                             f.kappa));
  }
}

void inverse_bound_bench(benchmark::State& state, const Fixture& f) {
  const ForwardFilterSpec assumed{ForwardKind::kUkf, f.kappa};
  InformationState info{f.inverse.covariance.inverse(), 0};
  for (auto _ : state) {
    const auto lin = linearize_fixed_gain(f.scenario.model, assumed, f.inverse.mean,
                                          f.inverse.forward_covariance, f.traj.states[11]);
    const Matrix ft = transition_jacobian(f.scenario.model, assumed, f.inverse.mean,
                                          f.inverse.forward_covariance, f.traj.states[11]);
    benchmark::DoNotOptimize(inverse_rcrlb_step(info, ft,
                                                f.scenario.model.action_jacobian(f.inverse.mean),
                                                regularize(lin.noise_covariance).matrix,
                                                f.scenario.model.action_noise()));
  }
}

}  // namespace

BENCHMARK_CAPTURE(ukf_step_bench, fm, fm());
BENCHMARK_CAPTURE(ukf_step_bench, reentry, reentry());
BENCHMARK_CAPTURE(iukf_step_bench, fm, fm());
BENCHMARK_CAPTURE(iukf_step_bench, reentry, reentry());
BENCHMARK_CAPTURE(iekf_step_bench, fm, fm());
BENCHMARK_CAPTURE(ftilde_bench, fm, fm());
BENCHMARK_CAPTURE(ftilde_bench, reentry, reentry());
BENCHMARK_CAPTURE(inverse_bound_bench, reentry, reentry());

BENCHMARK_MAIN();
