#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "iukf/forward_filters.hpp"
#include "iukf/inverse_filters.hpp"
#include "iukf/scenarios.hpp"

namespace iukf {

struct ForwardFilterConfig {
  std::string name;
  ForwardKind kind = ForwardKind::kUkf;
  std::optional<double> kappa;   // defaults to the scenario's true kappa
};

// One inverse variant: which adversary it watches and what it assumes.
struct InverseFilterConfig {
  std::string name;
  InverseKind kind = InverseKind::kIukf;
  std::string true_forward;                // name of a ForwardFilterConfig
  ForwardKind assumed_forward = ForwardKind::kUkf;
  std::optional<double> assumed_kappa;     // defaults to the scenario's assumed kappa
  std::optional<double> inverse_kappa;     // defaults to the scenario's kappa-bar
};

struct OutputPaths {
  std::string records;    // long CSV run_id,k,curve,value
  std::string summary;    // time-averaged RMSE / RCRLB per curve
  std::string plot_dir;   // one two-column file per curve
  std::string failures;   // run_id,step,message for excluded runs
};

struct ExperimentConfig {
  std::string scenario = "fm";   // fm | reentry | linear
  std::optional<int> horizon;
  std::optional<int> runs;
  std::uint64_t seed = 1;
  std::vector<ForwardFilterConfig> forward_filters;   // empty: scenario default matrix
  std::vector<InverseFilterConfig> inverse_filters;
  double regularization = 1e-8;
  SigmaStarAnchor sigma_star_anchor = SigmaStarAnchor::kPrevious;
  bool compute_bounds = true;
  OutputPaths output;
  FmParameters fm;
  ReentryParameters reentry;
  LinearParameters linear = default_linear_parameters();
};

// The default filter matrix for each scenario.
void apply_default_filter_matrix(ExperimentConfig& config);

Scenario make_scenario(const ExperimentConfig& config);

// Throws ConfigError for dangling names, duplicates or bad counts.
void validate(const ExperimentConfig& config);

struct RunFailure {
  int run_id = 0;
  int step = 0;
  std::string message;
};

// One Monte Carlo run: values(c, k-1) is curve c at time k. Error curves
// hold squared errors, bound curves the trace of the selected block of J⁻¹.
struct MonteCarloRecord {
  int run_id = 0;
  Matrix values;
  std::optional<RunFailure> failure;
};

struct CurveSummary {
  std::string name;
  double time_averaged = 0.0;            // sqrt(mean over runs and steps)
  std::vector<double> cumulative;        // sqrt(mean over runs and steps <= k)
  std::vector<double> mean;              // per-step mean over runs
  std::vector<double> standard_error;    // per-step standard error of the mean
};

struct ExperimentSummary {
  std::vector<CurveSummary> curves;
  int runs_used = 0;
  int runs_excluded = 0;
  std::vector<RunFailure> failures;

  const CurveSummary& curve(const std::string& name) const;
};

struct ExperimentResult {
  std::vector<std::string> curves;   // "<filter>.sq_err" and "<filter>.crlb_trace"
  int horizon = 0;
  std::vector<MonteCarloRecord> records;   // ordered by run_id
  ExperimentSummary summary;
};

// Number of workers from IUKF_WORKERS, else hardware concurrency.
int default_worker_count();

MonteCarloRecord run_single(const Scenario& scenario, const ExperimentConfig& config,
                            const std::vector<std::string>& curves, int run_id);

ExperimentResult run_experiment(const ExperimentConfig& config, int workers = 0);

// Aggregates the successful records; ordered reduction by run_id.
ExperimentSummary summarize(const std::vector<std::string>& curves, int horizon,
                            const std::vector<MonteCarloRecord>& records);

// Per-run time average of a curve over all steps; used for paired bootstraps.
std::vector<double> per_run_time_average(const ExperimentResult& result, const std::string& curve);

}  // namespace iukf
