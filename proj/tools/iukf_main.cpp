// iukf: Monte Carlo driver for forward/inverse filter experiments.
//
//   iukf run <config>        run the experiment and write the configured outputs
//   iukf compare <config>    print the time-averaged RMSE/RCRLB table
//   iukf rcrlb <config>      bound curves only
//   iukf diagnose <records>  exponential mean-squared boundedness fit

#include <cstdio>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "iukf/config.hpp"
#include "iukf/diagnostics.hpp"
#include "iukf/errors.hpp"
#include "iukf/experiment.hpp"
#include "iukf/outputs.hpp"

namespace {

using namespace iukf;

void print_table(const ExperimentResult& result, bool bounds_only) {
  std::cout << std::left << std::setw(28) << "curve" << std::right << std::setw(18)
            << "time-averaged" << '\n';
  for (const auto& c : result.summary.curves) {
    const bool is_bound = c.name.ends_with(".crlb_trace");
    if (bounds_only && !is_bound) continue;
    std::cout << std::left << std::setw(28) << c.name << std::right << std::setw(18)
              << std::setprecision(8) << c.time_averaged << '\n';
  }
  std::cout << "runs used: " << result.summary.runs_used
            << ", excluded: " << result.summary.runs_excluded << '\n';
}

ExperimentResult bounds_only(const ExperimentResult& full) {
  ExperimentResult out;
  out.horizon = full.horizon;
  std::vector<Eigen::Index> keep;
  for (std::size_t c = 0; c < full.curves.size(); ++c) {
    if (full.curves[c].ends_with(".crlb_trace")) {
      keep.push_back(static_cast<Eigen::Index>(c));
      out.curves.push_back(full.curves[c]);
    }
  }
  for (const auto& r : full.records) {
    MonteCarloRecord rec{r.run_id, Matrix(static_cast<Eigen::Index>(keep.size()), full.horizon),
                         r.failure};
    for (std::size_t i = 0; i < keep.size(); ++i) {
      rec.values.row(static_cast<Eigen::Index>(i)) = r.values.row(keep[i]);
    }
    out.records.push_back(std::move(rec));
  }
  out.summary = summarize(out.curves, out.horizon, out.records);
  return out;
}

int run_diagnose(const std::string& path, const std::string& curve_filter, int min_runs) {
  const ExperimentResult records = read_records_csv(path);
  std::cout << std::left << std::setw(24) << "curve" << std::right << std::setw(12) << "eta"
            << std::setw(10) << "lambda" << std::setw(14) << "nu" << std::setw(12)
            << "violations" << std::setw(10) << "bounded" << '\n';
  int shown = 0;
  for (const auto& c : records.summary.curves) {
    if (!c.name.ends_with(".sq_err")) continue;
    if (!curve_filter.empty() && c.name != curve_filter &&
        c.name != curve_filter + ".sq_err") {
      continue;
    }
    const BoundednessFit fit =
        boundedness_diagnostic(c.mean, c.standard_error, records.summary.runs_used, {}, min_runs);
    std::cout << std::left << std::setw(24) << c.name << std::right << std::setprecision(5)
              << std::setw(12) << fit.eta << std::setw(10) << fit.lambda << std::setw(14)
              << fit.nu << std::setw(12) << fit.violation_fraction << std::setw(10)
              << ((fit.contracting && fit.violation_fraction <= 0.05) ? "yes" : "no") << '\n';
    ++shown;
  }
  if (shown == 0) {
    std::cerr << "no matching error curves in " << path << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forward and inverse unscented Kalman filter experiments"};
  app.require_subcommand(1);
  int workers = 0;
  app.add_option("-j,--workers", workers, "worker threads (default: IUKF_WORKERS or all cores)");

  std::string config_path;
  auto* run = app.add_subcommand("run", "run an experiment and write its outputs");
  run->add_option("config", config_path, "experiment config (YAML)")->required();
  auto* compare = app.add_subcommand("compare", "print the filter-matrix summary table");
  compare->add_option("config", config_path, "experiment config (YAML)")->required();
  auto* rcrlb = app.add_subcommand("rcrlb", "compute bound curves only");
  rcrlb->add_option("config", config_path, "experiment config (YAML)")->required();

  std::string records_path;
  std::string curve_filter;
  int min_runs = 50;
  auto* diagnose = app.add_subcommand("diagnose", "fit an exponential boundedness envelope");
  diagnose->add_option("records", records_path, "long-format records CSV")->required();
  diagnose->add_option("--curve", curve_filter, "restrict to one filter or curve");
  diagnose->add_option("--min-runs", min_runs, "minimum runs required")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*diagnose) return run_diagnose(records_path, curve_filter, min_runs);

    ExperimentConfig config = load_config(config_path);
    if (*rcrlb) config.compute_bounds = true;
    const ExperimentResult result = run_experiment(config, workers);

    if (*run) {
      emit_outputs(result, config.output);
      print_table(result, false);
    } else if (*compare) {
      print_table(result, false);
    } else if (*rcrlb) {
      const ExperimentResult bounds = bounds_only(result);
      emit_outputs(bounds, config.output);
      print_table(bounds, true);
    }
  } catch (const std::exception& e) {
    std::cerr << "iukf: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
