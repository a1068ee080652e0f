#include <gtest/gtest.h>

#include "iukf/config.hpp"
#include "iukf/diagnostics.hpp"
#include "iukf/errors.hpp"
#include "iukf/experiment.hpp"
#include "iukf/outputs.hpp"
#include "kalman_oracle.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace iukf;

namespace {

ExperimentConfig small_linear(int runs, int horizon) {
  ExperimentConfig c;
  c.scenario = "linear";
  c.runs = runs;
  c.horizon = horizon;
  c.seed = 77;
  apply_default_filter_matrix(c);
  return c;
}

std::string records_text(const ExperimentResult& r) {
  std::ostringstream out;
  write_records_csv(out, r);
  return out.str();
}

int count_lines(const std::string& s) {
  return static_cast<int>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST(Experiment, SingleRunSingleStepCounts) {
  const auto cfg = small_linear(1, 1);
  const auto result = run_experiment(cfg, 1);
  ASSERT_EQ(result.records.size(), 1u);
  EXPECT_EQ(result.horizon, 1);
  EXPECT_EQ(result.records[0].values.cols(), 1);
  EXPECT_EQ(result.records[0].values.rows(), static_cast<Eigen::Index>(result.curves.size()));
  EXPECT_EQ(count_lines(records_text(result)), 1 + static_cast<int>(result.curves.size()));
  EXPECT_EQ(result.summary.runs_used, 1);
  for (const auto& c : result.summary.curves) EXPECT_EQ(c.cumulative.size(), 1u);
}

TEST(Experiment, CurvesComeInErrorBoundPairs) {
  const auto result = run_experiment(small_linear(2, 3), 1);
  ASSERT_EQ(result.curves.size() % 2, 0u);
  for (std::size_t i = 0; i < result.curves.size(); i += 2) {
    const auto& err = result.curves[i];
    const auto stem = err.substr(0, err.find('.'));
    EXPECT_EQ(err, stem + ".sq_err");
    EXPECT_EQ(result.curves[i + 1], stem + ".crlb_trace");
  }
}

TEST(Experiment, WorkerCountDoesNotChangeOutput) {
  const auto cfg = small_linear(9, 20);
  const auto one = records_text(run_experiment(cfg, 1));
  const auto three = records_text(run_experiment(cfg, 3));
  EXPECT_EQ(one, three);
  EXPECT_EQ(one, records_text(run_experiment(cfg, 1)));
}

TEST(Experiment, SeedChangesOutput) {
  auto cfg = small_linear(2, 5);
  const auto a = records_text(run_experiment(cfg, 1));
  cfg.seed += 1;
  EXPECT_NE(a, records_text(run_experiment(cfg, 1)));
}

TEST(Experiment, RunsAreIndependentOfEnsembleSize) {
  // Run r depends only on (seed, r), so a prefix of a larger ensemble is the
  // smaller ensemble.
  const auto small = run_experiment(small_linear(3, 10), 1);
  const auto large = run_experiment(small_linear(6, 10), 1);
  for (int r = 0; r < 3; ++r) EXPECT_EQ(small.records[r].values, large.records[r].values);
}

TEST(Experiment, LinearForwardErrorTracksKalmanCovariance) {
  auto cfg = small_linear(400, 40);
  cfg.forward_filters = {{"UKF", ForwardKind::kUkf, std::nullopt}};
  cfg.inverse_filters.clear();
  const auto result = run_experiment(cfg, 1);
  const auto& p = cfg.linear;
  const auto seq = oracle::kf_covariance_sequence(p.forward_initial_covariance, p.transition,
                                                  p.observation, p.process_noise,
                                                  p.measurement_noise, 40);
  const auto& err = result.summary.curve("UKF.sq_err");
  const auto& bound = result.summary.curve("UKF.crlb_trace");
  int outside = 0;
  for (int k = 0; k < 40; ++k) {
    const double trace = seq[k].posterior.cov.trace();
    EXPECT_NEAR(bound.mean[k], trace, 1e-6 * trace);
    if (std::abs(err.mean[k] - trace) > 3.0 * err.standard_error[k]) ++outside;
  }
  EXPECT_LE(outside, 2);
  EXPECT_NEAR(err.time_averaged, bound.time_averaged, 0.05 * bound.time_averaged);
}

TEST(Summary, FailedRunsAreExcludedAndCounted) {
  const std::vector<std::string> curves{"A.sq_err", "A.crlb_trace"};
  std::vector<MonteCarloRecord> records(3);
  for (int r = 0; r < 3; ++r) {
    records[r].run_id = r;
    records[r].values = Matrix::Constant(2, 2, r + 1.0);
  }
  records[1].failure = RunFailure{1, 2, "boom"};
  const auto s = summarize(curves, 2, records);
  EXPECT_EQ(s.runs_used, 2);
  EXPECT_EQ(s.runs_excluded, 1);
  ASSERT_EQ(s.failures.size(), 1u);
  EXPECT_EQ(s.failures[0].step, 2);
  EXPECT_DOUBLE_EQ(s.curve("A.sq_err").mean[0], 2.0);
  EXPECT_DOUBLE_EQ(s.curve("A.sq_err").time_averaged, std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(s.curve("A.sq_err").standard_error[0], 1.0);
  EXPECT_THROW(s.curve("B.sq_err"), std::out_of_range);
}

TEST(Summary, CumulativeIsRunningRootMean) {
  const std::vector<std::string> curves{"A.sq_err"};
  std::vector<MonteCarloRecord> records(1);
  records[0].values = Matrix(1, 3);
  records[0].values << 1.0, 3.0, 8.0;
  const auto s = summarize(curves, 3, records);
  const auto& c = s.curve("A.sq_err").cumulative;
  EXPECT_DOUBLE_EQ(c[0], 1.0);
  EXPECT_DOUBLE_EQ(c[1], std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(c[2], std::sqrt(4.0));
}

TEST(Outputs, RecordsRoundTripExactly) {
  const auto result = run_experiment(small_linear(3, 7), 1);
  std::istringstream in(records_text(result));
  const auto back = read_records_csv(in);
  ASSERT_EQ(back.curves, result.curves);
  ASSERT_EQ(back.records.size(), result.records.size());
  for (std::size_t r = 0; r < back.records.size(); ++r) {
    EXPECT_LE((back.records[r].values - result.records[r].values).cwiseAbs().maxCoeff(), 1e-12);
  }
  for (std::size_t c = 0; c < result.summary.curves.size(); ++c) {
    EXPECT_NEAR(back.summary.curves[c].time_averaged, result.summary.curves[c].time_averaged,
                1e-12);
  }
}

TEST(Outputs, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

TEST(Outputs, EmptyTableIsHeaderOnly) {
  ExperimentResult empty;
  const auto text = records_text(empty);
  EXPECT_EQ(text, "run_id,k,curve,value\n");
}

TEST(Outputs, PlotFilesHaveOneLinePerStep) {
  const std::vector<std::string> curves{"A.sq_err", "A.crlb_trace"};
  std::vector<MonteCarloRecord> records(1);
  records[0].values = Matrix::Ones(2, 3);
  const auto s = summarize(curves, 3, records);
  const auto dir = std::filesystem::temp_directory_path() / "iukf_plot_test";
  std::filesystem::remove_all(dir);
  write_plot_data(dir.string(), s);
  int lines = 0;
  for (const auto& name : curves) {
    std::ifstream in(dir / (name + ".dat"));
    ASSERT_TRUE(in) << name;
    std::string line;
    while (std::getline(in, line)) ++lines;
  }
  EXPECT_EQ(lines, 6);
  std::filesystem::remove_all(dir);
}

TEST(Outputs, UnwritablePathRaises) {
  const auto result = run_experiment(small_linear(1, 1), 1);
  OutputPaths paths;
  paths.records = "/proc/iukf-no-such-dir/records.csv";
  EXPECT_THROW(emit_outputs(result, paths), IoError);
}

TEST(Config, ParsesFilterMatrix) {
  const auto cfg = parse_config(R"(
scenario: linear
seed: 9
forward_filters:
  - {name: U, kind: ukf, kappa: 0.5}
inverse_filters:
  - {name: I, kind: iekf, true_forward: U, assumed_forward: ekf}
linear:
  horizon: 12
  runs: 4
  random_initial: false
)");
  EXPECT_EQ(cfg.scenario, "linear");
  EXPECT_EQ(cfg.seed, 9u);
  ASSERT_EQ(cfg.forward_filters.size(), 1u);
  EXPECT_EQ(cfg.forward_filters[0].kappa, 0.5);
  ASSERT_EQ(cfg.inverse_filters.size(), 1u);
  EXPECT_EQ(cfg.inverse_filters[0].kind, InverseKind::kIekf);
  EXPECT_EQ(cfg.inverse_filters[0].assumed_forward, ForwardKind::kEkf);
  EXPECT_EQ(cfg.linear.horizon, 12);
  EXPECT_FALSE(cfg.linear.random_initial);
}

TEST(Config, UnknownKeysAreRejected) {
  EXPECT_THROW(parse_config("scenario: fm\nsedd: 3\n"), ConfigError);
  EXPECT_THROW(parse_config("fm:\n  betta: 3\n"), ConfigError);
  EXPECT_THROW(parse_config("forward_filters:\n  - {name: U, kind: ukf, kapa: 1}\n"), ConfigError);
}

TEST(Config, DanglingInverseTargetIsRejected) {
  EXPECT_THROW(parse_config(R"(
scenario: fm
forward_filters:
  - {name: U, kind: ukf}
inverse_filters:
  - {name: I, kind: iukf, true_forward: E}
)"),
               ConfigError);
  auto cfg = parse_config("scenario: fm\n");
  cfg.forward_filters.push_back(cfg.forward_filters.front());
  EXPECT_THROW(validate(cfg), ConfigError);
}

TEST(Diagnostics, ConstantSequenceIsSteadyFloor) {
  const std::vector<double> mean(60, 2.5), se(60, 0.1);
  const auto fit = boundedness_diagnostic(mean, se, 100);
  EXPECT_FALSE(fit.degenerate);
  EXPECT_NEAR(fit.nu, 2.5, 1e-6);
  EXPECT_NEAR(fit.eta * fit.lambda, 0.0, 1e-6);
  EXPECT_EQ(fit.violation_fraction, 0.0);
}

TEST(Diagnostics, GeometricDecayRecoversRate) {
  std::vector<double> mean(40), se(40, 1e-6);
  for (int k = 0; k < 40; ++k) mean[k] = 4.0 * std::pow(0.5, k);
  const auto fit = boundedness_diagnostic(mean, se, 100);
  EXPECT_NEAR(fit.lambda, 0.5, 1e-3);
  EXPECT_NEAR(fit.nu, 0.0, 1e-6);
  EXPECT_TRUE(fit.contracting);
  EXPECT_EQ(fit.violation_fraction, 0.0);
}

TEST(Diagnostics, AllZeroIsDegenerate) {
  const std::vector<double> zero(10, 0.0);
  const auto fit = boundedness_diagnostic(zero, zero, 100);
  EXPECT_TRUE(fit.degenerate);
  EXPECT_EQ(fit.violation_fraction, 0.0);
}

TEST(Diagnostics, TooFewRunsIsRejected) {
  const std::vector<double> mean(10, 1.0), se(10, 0.1);
  EXPECT_THROW(boundedness_diagnostic(mean, se, 49), std::invalid_argument);
  EXPECT_NO_THROW(boundedness_diagnostic(mean, se, 20, {}, 20));
}
