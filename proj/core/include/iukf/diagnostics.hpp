#pragma once

#include <span>
#include <vector>

namespace iukf {

// Envelope E|z_k|^2 <= eta * E|z_0|^2 * lambda^k + nu fitted to an ensemble
// mean-squared error sequence (index 0 is the first recorded step).
struct BoundednessFit {
  double eta = 0.0;
  double lambda = 0.0;
  double nu = 0.0;
  bool contracting = false;           // lambda < 1
  double violation_fraction = 0.0;    // steps above the envelope by > 3 standard errors
  double residual = 0.0;              // sum of squared fit residuals
  bool degenerate = false;            // all-zero errors, trivially bounded
};

// Default lambda grid: 0.001 .. 1.5 in steps of 0.001.
std::vector<double> default_lambda_grid();

// For every lambda on the grid, (eta, nu) >= 0 solve the least-squares fit in
// closed form; the lambda with the smallest residual wins. Requires at least
// `min_runs` runs behind the ensemble statistics.
BoundednessFit boundedness_diagnostic(std::span<const double> mean_sq,
                                      std::span<const double> standard_error, int runs,
                                      std::span<const double> lambda_grid = {},
                                      int min_runs = 50);

}  // namespace iukf
