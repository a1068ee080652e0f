#pragma once

#include <optional>

#include "iukf/linalg.hpp"

namespace iukf {

// 2n+1 sigma points stored column-wise; column 0 is the center point,
// columns i and i+n are mirror images about it.
struct SigmaPointSet {
  Matrix points;
  Vector weights;
  double kappa = 0.0;

  Eigen::Index dim() const { return points.rows(); }
  Eigen::Index count() const { return points.cols(); }
};

struct SquareRoot {
  Matrix lower;          // L with L Lᵀ = Sigma + jitter * I
  double jitter = 0.0;   // 0 when plain Cholesky succeeded
};

// Lower Cholesky factor, retrying with diagonal jitter
// {1e-12, 1e-10, 1e-8, 1e-6} * max(1, trace/n). Throws FactorizationError
// carrying the offending matrix when every level fails.
SquareRoot robust_sqrt(const Matrix& sigma);

// Sigma points mean +/- columns of sqrt((n + kappa) * sigma) with weights
// kappa/(n+kappa) and 1/(2(n+kappa)). Requires n + kappa > 0.
SigmaPointSet generate_sigma_points(const Vector& mean, const Matrix& sigma, double kappa);

// Pushes every sigma point through `fn`; result column i is fn(points.col(i)).
Matrix propagate(const SigmaPointSet& set, const VectorMap& fn);

struct Moments {
  Vector mean;
  Matrix covariance;
};

// Weighted mean and covariance of propagated points, plus an optional
// additive noise covariance. The output covariance is symmetrized.
Moments unscented_moments(const SigmaPointSet& set, const Matrix& propagated,
                          const std::optional<Matrix>& additive_cov = std::nullopt);

// Weighted cross-covariance sum_i w_i l_i r_iᵀ - lm rmᵀ, evaluated in centered
// form; lm and rm are the weighted means of `left` and `right`.
Matrix cross_covariance(const SigmaPointSet& set, const Matrix& left, const Matrix& right,
                        const Vector& left_mean, const Vector& right_mean);

}  // namespace iukf
