#include "iukf/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace iukf {

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 1500; ++i) grid.push_back(i * 1e-3);
  return grid;
}

namespace {

struct Candidate {
  double eta;
  double nu;
  double residual;
};

// Nonnegative least squares of m ≈ eta * b + nu over two coefficients.
Candidate fit_two(std::span<const double> m, const std::vector<double>& b) {
  const double n = static_cast<double>(m.size());
  double sb = 0, sbb = 0, sm = 0, sbm = 0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    sb += b[k];
    sbb += b[k] * b[k];
    sm += m[k];
    sbm += b[k] * m[k];
  }
  auto residual = [&](double eta, double nu) {
    double r = 0;
    for (std::size_t k = 0; k < m.size(); ++k) {
      const double d = m[k] - eta * b[k] - nu;
      r += d * d;
    }
    return r;
  };

  std::vector<Candidate> options;
  const double det = n * sbb - sb * sb;
  if (std::abs(det) > 1e-300) {
    const double eta = (n * sbm - sb * sm) / det;
    const double nu = (sbb * sm - sb * sbm) / det;
    if (eta >= 0 && nu >= 0) options.push_back({eta, nu, residual(eta, nu)});
  }
  const double nu_only = std::max(0.0, sm / n);
  options.push_back({0.0, nu_only, residual(0.0, nu_only)});
  if (sbb > 0) {
    const double eta_only = std::max(0.0, sbm / sbb);
    options.push_back({eta_only, 0.0, residual(eta_only, 0.0)});
  }
  return *std::min_element(options.begin(), options.end(),
                           [](const Candidate& a, const Candidate& c) {
                             return a.residual < c.residual;
                           });
}

}  // namespace

BoundednessFit boundedness_diagnostic(std::span<const double> mean_sq,
                                      std::span<const double> standard_error, int runs,
                                      std::span<const double> lambda_grid, int min_runs) {
  if (runs < min_runs) {
    throw std::invalid_argument("boundedness diagnostic needs at least " +
                                std::to_string(min_runs) + " runs, got " + std::to_string(runs));
  }
  if (mean_sq.empty()) throw std::invalid_argument("empty error sequence");
  if (!standard_error.empty() && standard_error.size() != mean_sq.size()) {
    throw std::invalid_argument("standard error length does not match error sequence");
  }

  BoundednessFit fit;
  const double peak = *std::max_element(mean_sq.begin(), mean_sq.end());
  if (peak <= 0.0) {
    fit.degenerate = true;
    fit.lambda = 0.5;
    fit.contracting = true;
    return fit;
  }

  const std::vector<double> fallback = lambda_grid.empty() ? default_lambda_grid()
                                                           : std::vector<double>{};
  const std::span<const double> grid = lambda_grid.empty() ? std::span<const double>(fallback)
                                                           : lambda_grid;
  const double initial = mean_sq.front();

  double best = std::numeric_limits<double>::infinity();
  std::vector<double> basis(mean_sq.size());
  for (double lambda : grid) {
    double p = 1.0;
    for (std::size_t k = 0; k < mean_sq.size(); ++k) {
      basis[k] = initial * p;
      p *= lambda;
    }
    const Candidate c = fit_two(mean_sq, basis);
    if (c.residual < best) {
      best = c.residual;
      fit.eta = initial > 0 ? c.eta : 0.0;
      fit.nu = c.nu;
      fit.lambda = lambda;
      fit.residual = c.residual;
    }
  }
  fit.contracting = fit.lambda < 1.0;

  int violations = 0;
  double p = 1.0;
  for (std::size_t k = 0; k < mean_sq.size(); ++k) {
    const double envelope = fit.eta * initial * p + fit.nu;
    const double slack = (standard_error.empty() ? 0.0 : 3.0 * standard_error[k]) + 1e-12 * peak;
    if (mean_sq[k] > envelope + slack) ++violations;
    p *= fit.lambda;
  }
  fit.violation_fraction = static_cast<double>(violations) / static_cast<double>(mean_sq.size());
  return fit;
}

}  // namespace iukf
