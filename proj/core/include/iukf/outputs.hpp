#pragma once

#include <iosfwd>
#include <string>

#include "iukf/experiment.hpp"

namespace iukf {

// Floating-point values are written with 17 significant digits so that
// parsing them back reproduces the doubles exactly.
std::string format_double(double value);

// Long format: header run_id,k,curve,value; one row per (run, step, curve)
// for every run that was not excluded.
void write_records_csv(std::ostream& out, const ExperimentResult& result);

// curve,time_averaged,runs_used,runs_excluded
void write_summary_csv(std::ostream& out, const ExperimentSummary& summary);

// run_id,step,message
void write_failures_csv(std::ostream& out, const ExperimentSummary& summary);

// One file per curve, "<plot_dir>/<curve>.dat", lines "k value" holding the
// cumulative time-averaged root value.
void write_plot_data(const std::string& plot_dir, const ExperimentSummary& summary);

// Writes every non-empty path of `paths`. Throws IoError on unwritable paths.
void emit_outputs(const ExperimentResult& result, const OutputPaths& paths);

// Parses a long-format CSV back into per-run records (curves in order of
// first appearance) and recomputes the summary.
ExperimentResult read_records_csv(std::istream& in);
ExperimentResult read_records_csv(const std::string& path);

}  // namespace iukf
