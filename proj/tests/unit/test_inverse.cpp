#include <gtest/gtest.h>

#include "generators.hpp"
#include "iukf/errors.hpp"
#include "iukf/inverse_filters.hpp"
#include "iukf/scenarios.hpp"
#include "kalman_oracle.hpp"

#include <cmath>

using namespace iukf;

namespace {

struct LinearRun {
  LinearParameters p;
  Scenario scenario;
  Trajectory traj;
  ForwardRun forward;
  std::vector<Vector> actions;
};

LinearRun linear_run(int horizon, std::uint64_t seed, double kappa_fwd = 1.0) {
  auto p = default_linear_parameters();
  auto sc = linear_toy_model(p);
  auto traj = simulate_trajectory(sc.model, p.initial_state, horizon, seed);
  auto fwd = run_forward_filter(sc.model, {ForwardKind::kUkf, kappa_fwd}, p.forward_initial_mean,
                                p.forward_initial_covariance, traj);
  Rng d = make_stream(seed, 0, Stream::kDefender);
  const auto noise = sample_defender_noise(sc.model, horizon, d);
  auto actions = defender_observations(sc.model, fwd.estimates(), noise);
  return {p, std::move(sc), std::move(traj), std::move(fwd), std::move(actions)};
}

InverseFilterState initial_inverse(const LinearParameters& p) {
  return {p.initial_state, p.inverse_initial_covariance, p.forward_initial_covariance, 0};
}

}  // namespace

TEST(Ftilde, ReplaysForwardUkfOnRandomPolynomialModels) {
  testgen::Engine e(2024);
  int checked = 0;
  for (int model_id = 0; model_id < 100; ++model_id) {
    const int nx = testgen::uniform_int(e, 1, 4);
    const int ny = testgen::uniform_int(e, 1, 3);
    const auto model = testgen::polynomial_model(e, nx, ny, 1);
    const double kappa = testgen::uniform(e, 0.2, 3.0);
    const Vector x0 = testgen::vector(e, nx, 0.5);
    const auto traj = simulate_trajectory(model, x0, 5, 1000 + model_id);
    const auto run = run_forward_filter(model, {ForwardKind::kUkf, kappa}, Vector::Zero(nx),
                                        testgen::spd(e, nx, 0.1, 1.0), traj);
    const FilterState* prev = &run.initial;
    for (int k = 0; k < 5; ++k) {
      const Vector replay = evaluate_ftilde(model, prev->mean, prev->covariance,
                                            traj.states[k + 1], traj.measurement_noise[k], kappa);
      EXPECT_LT((replay - run.steps[k].state.mean).cwiseAbs().maxCoeff(), 1e-10)
          << "model " << model_id << " k=" << k;
      prev = &run.steps[k].state;
      ++checked;
    }
  }
  EXPECT_EQ(checked, 500);
}

TEST(Ftilde, ReplaysForwardEkf) {
  const auto fm = fm_demodulator_model();
  Vector x0(2);
  x0 << 0.2, 0.7;
  const auto traj = simulate_trajectory(fm.model, x0, 20, 8);
  const auto run = run_forward_filter(fm.model, {ForwardKind::kEkf, 0.0}, Vector::Zero(2),
                                      fm.config.forward_initial_covariance, traj);
  const FilterState* prev = &run.initial;
  for (int k = 0; k < 20; ++k) {
    const Vector replay = evaluate_transition(fm.model, {ForwardKind::kEkf, 0.0}, prev->mean,
                                              prev->covariance, traj.states[k + 1],
                                              traj.measurement_noise[k]);
    EXPECT_LT((replay - run.steps[k].state.mean).norm(), 1e-10);
    prev = &run.steps[k].state;
  }
}

TEST(Ftilde, LinearJacobianIsClosedLoopTransition) {
  const auto p = default_linear_parameters();
  const auto sc = linear_toy_model(p);
  testgen::Engine e(5);
  const Matrix sigma = testgen::spd(e, 3);
  const auto k = oracle::kf_step({Vector::Zero(3), sigma}, p.transition, p.observation,
                                 p.process_noise, p.measurement_noise, Vector::Zero(2))
                     .gain;
  const Matrix expected = (Matrix::Identity(3, 3) - k * p.observation) * p.transition;
  const Matrix jac = transition_jacobian(sc.model, {ForwardKind::kUkf, 2.0},
                                         testgen::vector(e, 3, 3.0), sigma, testgen::vector(e, 3));
  EXPECT_LT(testgen::max_abs(jac - expected), 1e-6);
}

TEST(Ftilde, CollapsedSpreadWithAffineObservation) {
  // Sigma = 0 and v = 0. With h affine the predicted observation is exactly
  // h(f(xhat)), so the output reduces to f(xhat) + K (h(x_next) - h(f(xhat))).
  Matrix h(1, 2);
  h << 1.0, -0.5;
  ModelMaps maps;
  maps.transition = [](const Vector& x) {
    Vector out(2);
    out << std::sin(x(0)) + x(1), 0.5 * x(0) * x(1);
    return out;
  };
  maps.observation = [h](const Vector& x) { return Vector(h * x); };
  maps.action = [](const Vector& x) { return x; };
  const NonlinearStateSpaceModel model({2, 1, 2}, maps,
                                       {0.3 * Matrix::Identity(2, 2), Matrix::Ones(1, 1),
                                        Matrix::Identity(2, 2)});
  Vector xhat(2), x_next(2);
  xhat << 0.4, -1.0;
  x_next << 1.0, 2.0;
  const Vector out = evaluate_ftilde(model, xhat, Matrix::Zero(2, 2), x_next, Vector::Zero(1), 1.0);
  const auto trace = ukf_trace(model, xhat, Matrix::Zero(2, 2), 1.0);
  const Vector fx = model.transition(xhat);
  const Vector expected = fx + trace.gain * (h * x_next - h * fx);
  EXPECT_LT((out - expected).norm(), 1e-12);
  EXPECT_GT(trace.gain.norm(), 0.1);
}

TEST(Ftilde, GainIsRecomputedFromInputs) {
  // Moving xhat changes the gain; a cached gain would make f̃ affine in xhat.
  const auto fm = fm_demodulator_model();
  Vector a(2), b(2), x_next(2);
  a << 0.1, 0.0;
  b << 0.1, 1.5;
  x_next << 0.3, 0.2;
  const Matrix sigma = Matrix::Identity(2, 2);
  EXPECT_GT((ukf_trace(fm.model, a, sigma, 1.0).gain - ukf_trace(fm.model, b, sigma, 1.0).gain)
                .norm(),
            1e-3);
  const Vector v = Vector::Zero(2);
  const Vector mid = evaluate_ftilde(fm.model, 0.5 * (a + b), sigma, x_next, v, 1.0);
  const Vector chord = 0.5 * (evaluate_ftilde(fm.model, a, sigma, x_next, v, 1.0) +
                              evaluate_ftilde(fm.model, b, sigma, x_next, v, 1.0));
  EXPECT_GT((mid - chord).norm(), 1e-6);
}

TEST(Iukf, MatchesInverseKalmanFilter) {
  for (double kappa_inv : {0.1, 1.0, 3.0}) {
    auto lr = linear_run(50, 17);
    const auto& p = lr.p;
    const auto gains = oracle::kf_covariance_sequence(p.forward_initial_covariance, p.transition,
                                                      p.observation, p.process_noise,
                                                      p.measurement_noise, 50);
    InverseFilterState s = initial_inverse(p);
    oracle::KfState o{s.mean, s.covariance};
    const InverseFilterOptions opts{{ForwardKind::kUkf, 2.0}, kappa_inv, SigmaStarAnchor::kPrevious};
    for (int k = 0; k < 50; ++k) {
      s = iukf_step(lr.scenario.model, s, lr.traj.states[k + 1], lr.actions[k], opts);
      o = oracle::ikf_step(o, p.transition, p.observation, p.measurement_noise, p.action,
                           p.action_noise, gains[k].gain, lr.traj.states[k + 1], lr.actions[k]);
      EXPECT_LT((s.mean - o.mean).norm(), 1e-8) << "kappa " << kappa_inv << " k=" << k;
      EXPECT_LT((s.covariance - o.cov).norm(), 1e-6) << "kappa " << kappa_inv << " k=" << k;
    }
  }
}

TEST(Iekf, MatchesInverseKalmanFilter) {
  auto lr = linear_run(50, 18);
  const auto& p = lr.p;
  const auto gains = oracle::kf_covariance_sequence(p.forward_initial_covariance, p.transition,
                                                    p.observation, p.process_noise,
                                                    p.measurement_noise, 50);
  InverseFilterState s = initial_inverse(p);
  oracle::KfState o{s.mean, s.covariance};
  for (int k = 0; k < 50; ++k) {
    s = iekf_step(lr.scenario.model, s, lr.traj.states[k + 1], lr.actions[k]);
    o = oracle::ikf_step(o, p.transition, p.observation, p.measurement_noise, p.action,
                         p.action_noise, gains[k].gain, lr.traj.states[k + 1], lr.actions[k]);
    EXPECT_LT((s.mean - o.mean).norm(), 1e-8) << "k=" << k;
    EXPECT_LT((s.covariance - o.cov).norm(), 1e-8) << "k=" << k;
  }
}

TEST(Iukf, MatchedRunErrorsMatchOracle) {
  auto lr = linear_run(30, 19);
  const auto& p = lr.p;
  const auto run = run_inverse_filter(lr.scenario.model, InverseKind::kIukf,
                                      {{ForwardKind::kUkf, 1.0}, 2.0, SigmaStarAnchor::kPrevious},
                                      initial_inverse(p), lr.traj, lr.forward.estimates(),
                                      lr.actions);
  const auto gains = oracle::kf_covariance_sequence(p.forward_initial_covariance, p.transition,
                                                    p.observation, p.process_noise,
                                                    p.measurement_noise, 30);
  oracle::KfState o{p.initial_state, p.inverse_initial_covariance};
  for (int k = 0; k < 30; ++k) {
    o = oracle::ikf_step(o, p.transition, p.observation, p.measurement_noise, p.action,
                         p.action_noise, gains[k].gain, lr.traj.states[k + 1], lr.actions[k]);
    EXPECT_LT((run.errors[k] - (o.mean - lr.forward.steps[k].state.mean)).norm(), 1e-8);
  }
}

TEST(Iukf, HugeActionNoiseKillsTheInverseGain) {
  const auto fm = fm_demodulator_model();
  const auto model = fm.model.with_noise(
      {fm.model.process_noise(), fm.model.measurement_noise(), 1e8 * Matrix::Identity(1, 1)});
  Vector mean(2), x_next(2);
  mean << 0.5, 0.1;
  x_next << 0.4, -0.3;
  const InverseFilterState s{mean, 5.0 * Matrix::Identity(2, 2), 10.0 * Matrix::Identity(2, 2), 0};
  const InverseFilterOptions opts{{ForwardKind::kUkf, 2.0}, 1.0, SigmaStarAnchor::kPrevious};
  const auto pred = iukf_predict(model, s, x_next, opts);
  const auto next = iukf_step(model, s, x_next, Vector::Constant(1, 30.0), opts);
  EXPECT_LT((next.mean - pred.mean).norm(), 1e-4);
  const auto ie = iekf_step(model, s, x_next, Vector::Constant(1, 30.0));
  const Vector ie_pred = evaluate_transition(model, {ForwardKind::kEkf, 0.0}, mean,
                                             s.forward_covariance, x_next, Vector::Zero(2));
  EXPECT_LT((ie.mean - ie_pred).norm(), 1e-4);
}

TEST(Iukf, ExactKnowledgeFixedPoint) {
  // R = 0: the realized v is zero and the augmented covariance collapses, so
  // the prediction center reproduces the forward estimate.
  const auto fm = fm_demodulator_model();
  const auto model = fm.model.with_noise(
      {0.01 * Matrix::Identity(2, 2), Matrix::Zero(2, 2), fm.model.action_noise()});
  Vector x0(2);
  x0 << 0.3, 0.4;
  const auto traj = simulate_trajectory(model, x0, 10, 12);
  const auto run = run_forward_filter(model, {ForwardKind::kUkf, 2.0}, Vector::Zero(2),
                                      Matrix::Identity(2, 2), traj);
  const FilterState* prev = &run.initial;
  for (int k = 0; k < 10; ++k) {
    const InverseFilterState s{prev->mean, Matrix::Zero(2, 2), prev->covariance, k};
    const auto pred =
        iukf_predict(model, s, traj.states[k + 1],
                     {{ForwardKind::kUkf, 2.0}, 1.0, SigmaStarAnchor::kPrevious});
    EXPECT_LT((pred.mean - run.steps[k].state.mean).norm(), 1e-10) << "k=" << k;
    prev = &run.steps[k].state;
  }
}

TEST(SigmaStar, LinearRecursionIsKalmanCovariance) {
  auto lr = linear_run(40, 20);
  const auto& p = lr.p;
  const auto seq = oracle::kf_covariance_sequence(p.forward_initial_covariance, p.transition,
                                                  p.observation, p.process_noise,
                                                  p.measurement_noise, 40);
  for (auto anchor : {SigmaStarAnchor::kPrevious, SigmaStarAnchor::kCurrent}) {
    const auto run = run_inverse_filter(lr.scenario.model, InverseKind::kIukf,
                                        {{ForwardKind::kUkf, 2.0}, 2.0, anchor},
                                        initial_inverse(p), lr.traj, lr.forward.estimates(),
                                        lr.actions);
    for (int k = 0; k < 40; ++k) {
      EXPECT_LT((run.steps[k].forward_covariance - seq[k].posterior.cov).norm(), 1e-10);
    }
  }
}

TEST(SigmaStar, OracleFedReplicaTracksForwardCovariance) {
  const auto fm = fm_demodulator_model();
  Vector x0(2);
  x0 << -0.5, 2.0;
  const auto traj = simulate_trajectory(fm.model, x0, 60, 21);
  const auto run = run_forward_filter(fm.model, {ForwardKind::kUkf, 1.0}, Vector::Zero(2),
                                      fm.config.forward_initial_covariance, traj);
  Matrix star = fm.config.forward_initial_covariance;
  const FilterState* prev = &run.initial;
  for (int k = 0; k < 60; ++k) {
    star = update_sigma_star(fm.model, prev->mean, star, 1.0);
    EXPECT_LT((star - run.steps[k].state.covariance).norm(),
              1e-10 * (1.0 + star.norm()))
        << "k=" << k;
    prev = &run.steps[k].state;
  }
}

TEST(SigmaStar, NoGainLimitKeepsTimeUpdate) {
  const auto fm = fm_demodulator_model();
  const auto model = fm.model.with_noise(
      {Matrix::Zero(2, 2), 1e8 * Matrix::Identity(2, 2), fm.model.action_noise()});
  Vector anchor(2);
  anchor << 0.2, -0.1;
  const Matrix star = 2.0 * Matrix::Identity(2, 2);
  const Matrix next = update_sigma_star(model, anchor, star, 1.0);
  const Matrix a = fm_transition_matrix({});
  EXPECT_LT((next - a * star * a.transpose()).norm(), 1e-5);
}

TEST(Iukf, AugmentedSetHasTwoNzPlusOnePoints) {
  testgen::Engine e(30);
  for (int trial = 0; trial < 20; ++trial) {
    const int nx = testgen::uniform_int(e, 1, 4);
    const int ny = testgen::uniform_int(e, 1, 3);
    const auto model = testgen::polynomial_model(e, nx, ny, 1);
    const InverseFilterState s{testgen::vector(e, nx, 0.3), testgen::spd(e, nx),
                               testgen::spd(e, nx), 0};
    const auto pred = iukf_predict(model, s, testgen::vector(e, nx, 0.3),
                                   {{ForwardKind::kUkf, 1.0}, 1.0, SigmaStarAnchor::kPrevious});
    EXPECT_EQ(pred.sigma_points.count(), 2 * (nx + ny) + 1);
    EXPECT_EQ(pred.propagated.cols(), 2 * (nx + ny) + 1);
  }
}

TEST(Iukf, AugmentedStateLayout) {
  const InverseFilterState s{Vector::Constant(2, 3.0), 4.0 * Matrix::Identity(2, 2),
                             Matrix::Identity(2, 2), 0};
  Matrix r(3, 3);
  r << 2, 0.5, 0, 0.5, 2, 0, 0, 0, 1;
  const auto z = augment(s, r);
  EXPECT_EQ(z.mean.tail(3), Vector::Zero(3));
  EXPECT_EQ(z.mean.head(2), s.mean);
  EXPECT_EQ(z.covariance.topRightCorner(2, 3), Matrix::Zero(2, 3));
  EXPECT_EQ(z.covariance.bottomLeftCorner(3, 2), Matrix::Zero(3, 2));
  EXPECT_EQ(z.covariance.bottomRightCorner(3, 3), r);
}

TEST(InverseFilter, NoPeekingAtForwardInternals) {
  const auto fm = fm_demodulator_model();
  Rng ir = make_stream(33, 0, Stream::kInitial);
  const auto init = fm.config.draw_initial(ir);
  const auto traj = simulate_trajectory(fm.model, init.true_state, 30, 33);
  const auto fwd = run_forward_filter(fm.model, {ForwardKind::kUkf, 1.0}, init.forward_mean,
                                      fm.config.forward_initial_covariance, traj);
  Rng d = make_stream(33, 0, Stream::kDefender);
  const auto actions =
      defender_observations(fm.model, fwd.estimates(), sample_defender_noise(fm.model, 30, d));

  // Same {x_j, a_j}; scrambled adversary observations and estimates.
  Trajectory scrambled = traj;
  for (auto& y : scrambled.observations) y = -3.0 * y;
  std::vector<Vector> fake(fwd.estimates().size(), Vector::Constant(2, 99.0));

  const InverseFilterState s0{init.inverse_mean, fm.config.inverse_initial_covariance,
                              fm.config.forward_initial_covariance, 0};
  for (auto kind : {InverseKind::kIukf, InverseKind::kIekf}) {
    const InverseFilterOptions opts{
        {kind == InverseKind::kIukf ? ForwardKind::kUkf : ForwardKind::kEkf, 2.0}, 1.0,
        SigmaStarAnchor::kPrevious};
    const auto a = run_inverse_filter(fm.model, kind, opts, s0, traj, fwd.estimates(), actions);
    const auto b = run_inverse_filter(fm.model, kind, opts, s0, scrambled, fake, actions);
    for (int k = 0; k < 30; ++k) {
      EXPECT_EQ(a.steps[k].mean, b.steps[k].mean);
      EXPECT_EQ(a.steps[k].covariance, b.steps[k].covariance);
    }
  }
}

TEST(InverseFilter, ZeroHorizonReturnsInitialOnly) {
  const auto fm = fm_demodulator_model();
  Trajectory empty;
  empty.states.push_back(Vector::Zero(2));
  const InverseFilterState s0{Vector::Ones(2), Matrix::Identity(2, 2), Matrix::Identity(2, 2), 0};
  const auto run = run_inverse_filter(fm.model, InverseKind::kIukf, {}, s0, empty, {}, {});
  EXPECT_TRUE(run.steps.empty());
  EXPECT_TRUE(run.errors.empty());
  EXPECT_EQ(run.initial.mean, s0.mean);
}

TEST(InverseFilter, FmMismatchVariantsStayFiniteAndSymmetric) {
  const auto fm = fm_demodulator_model();
  for (int r = 0; r < 5; ++r) {
    Rng ir = make_stream(40, r, Stream::kInitial), pr = make_stream(40, r, Stream::kProcess),
        mr = make_stream(40, r, Stream::kMeasurement), dr = make_stream(40, r, Stream::kDefender);
    const auto init = fm.config.draw_initial(ir);
    const auto traj = simulate_trajectory(fm.model, init.true_state, 100, pr, mr);
    const auto noise = sample_defender_noise(fm.model, 100, dr);
    for (auto true_kind : {ForwardKind::kUkf, ForwardKind::kEkf}) {
      const auto fwd = run_forward_filter(fm.model, {true_kind, 1.0}, init.forward_mean,
                                          fm.config.forward_initial_covariance, traj);
      const auto actions = defender_observations(fm.model, fwd.estimates(), noise);
      const InverseFilterState s0{init.inverse_mean, fm.config.inverse_initial_covariance,
                                  fm.config.forward_initial_covariance, 0};
      for (auto kind : {InverseKind::kIukf, InverseKind::kIekf}) {
        const InverseFilterOptions opts{
            {kind == InverseKind::kIukf ? ForwardKind::kUkf : ForwardKind::kEkf, 2.0}, 1.0,
            SigmaStarAnchor::kPrevious};
        const auto run =
            run_inverse_filter(fm.model, kind, opts, s0, traj, fwd.estimates(), actions);
        ASSERT_EQ(run.errors.size(), 100u);
        for (const auto& st : run.steps) {
          EXPECT_TRUE(st.mean.allFinite());
          for (const Matrix* c : {&st.covariance, &st.forward_covariance}) {
            EXPECT_LE((*c - c->transpose()).norm(), 1e-12 * (1.0 + c->norm()));
            EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(*c).eigenvalues().minCoeff(),
                      -1e-9 * (1.0 + c->norm()));
          }
        }
      }
    }
  }
}

TEST(InverseFilter, FmForwardCovarianceIgnoresAnchor) {
  // With R = I the phase observation is rotation invariant, so the forward
  // covariance recursion does not depend on where it is linearized.
  const auto fm = fm_demodulator_model();
  Vector a(2), b(2);
  a << 0.5, 0.3;
  b << -1.2, 2.9;
  const Matrix star = 10.0 * Matrix::Identity(2, 2);
  EXPECT_LT((update_sigma_star(fm.model, a, star, 2.0) - update_sigma_star(fm.model, b, star, 2.0))
                .norm(),
            1e-10);
}

TEST(InverseFilter, AnchorsDifferOnNonlinearModels) {
  testgen::Engine e(404);
  const auto model = testgen::polynomial_model(e, 2, 2, 1);
  Vector mean(2), x_next(2);
  mean << 0.5, 0.3;
  x_next << 0.4, 0.9;
  const InverseFilterState s{mean, 5.0 * Matrix::Identity(2, 2), 10.0 * Matrix::Identity(2, 2), 0};
  const auto prev = iukf_step(model, s, x_next, Vector::Constant(1, 1.0), 2.0, 1.0,
                              SigmaStarAnchor::kPrevious);
  const auto cur = iukf_step(model, s, x_next, Vector::Constant(1, 1.0), 2.0, 1.0,
                             SigmaStarAnchor::kCurrent);
  EXPECT_EQ(prev.mean, cur.mean);
  EXPECT_GT((prev.forward_covariance - cur.forward_covariance).norm(), 1e-9);
  EXPECT_EQ(prev.forward_covariance, update_sigma_star(model, mean, s.forward_covariance, 2.0));
  EXPECT_EQ(cur.forward_covariance,
            update_sigma_star(model, cur.mean, s.forward_covariance, 2.0));
}

TEST(InverseFilter, NamesRoundTrip) {
  EXPECT_EQ(parse_anchor(to_string(SigmaStarAnchor::kCurrent)), SigmaStarAnchor::kCurrent);
  EXPECT_EQ(parse_anchor(to_string(SigmaStarAnchor::kPrevious)), SigmaStarAnchor::kPrevious);
  EXPECT_EQ(parse_inverse_kind(to_string(InverseKind::kIekf)), InverseKind::kIekf);
  EXPECT_THROW(parse_anchor("next"), std::invalid_argument);
  EXPECT_THROW(parse_inverse_kind("ipf"), std::invalid_argument);
}
