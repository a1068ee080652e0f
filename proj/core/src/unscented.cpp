#include "iukf/unscented.hpp"

#include <array>
#include <string>

#include "iukf/errors.hpp"

namespace iukf {

SquareRoot robust_sqrt(const Matrix& sigma) {
  if (sigma.rows() != sigma.cols()) throw DimensionError("robust_sqrt needs a square matrix");
  const Matrix sym = symmetrize(sigma);
  if (!sym.allFinite()) throw FactorizationError("matrix has non-finite entries", sigma);
  if (sym.isZero(0.0)) return {Matrix::Zero(sym.rows(), sym.cols()), 0.0};

  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() == Eigen::Success) return {llt.matrixL(), 0.0};

  const double n = static_cast<double>(sym.rows());
  const double scale = std::max(1.0, sym.trace() / n);
  constexpr std::array<double, 4> kLevels = {1e-12, 1e-10, 1e-8, 1e-6};
  for (double level : kLevels) {
    const double jitter = level * scale;
    Matrix shifted = sym;
    shifted.diagonal().array() += jitter;
    llt.compute(shifted);
    if (llt.info() == Eigen::Success) return {llt.matrixL(), jitter};
  }
  throw FactorizationError("covariance is not positive semidefinite after jitter escalation",
                           sigma);
}

SigmaPointSet generate_sigma_points(const Vector& mean, const Matrix& sigma, double kappa) {
  const Eigen::Index n = mean.size();
  if (sigma.rows() != n || sigma.cols() != n) {
    throw DimensionError("sigma point covariance does not match mean dimension");
  }
  const double spread = static_cast<double>(n) + kappa;
  if (!(spread > 0.0)) {
    throw std::invalid_argument("sigma points need n + kappa > 0, got " + std::to_string(spread));
  }

  const Matrix root = robust_sqrt(spread * sigma).lower;

  SigmaPointSet set;
  set.kappa = kappa;
  set.points.resize(n, 2 * n + 1);
  set.points.col(0) = mean;
  for (Eigen::Index i = 0; i < n; ++i) {
    set.points.col(1 + i) = mean + root.col(i);
    set.points.col(1 + n + i) = mean - root.col(i);
  }
  set.weights = Vector::Constant(2 * n + 1, 1.0 / (2.0 * spread));
  set.weights(0) = kappa / spread;
  return set;
}

Matrix propagate(const SigmaPointSet& set, const VectorMap& fn) {
  Vector first = fn(set.points.col(0));
  Matrix out(first.size(), set.count());
  out.col(0) = first;
  for (Eigen::Index i = 1; i < set.count(); ++i) out.col(i) = fn(set.points.col(i));
  return out;
}

Moments unscented_moments(const SigmaPointSet& set, const Matrix& propagated,
                          const std::optional<Matrix>& additive_cov) {
  if (propagated.cols() != set.count()) {
    throw DimensionError("propagated point count does not match sigma point set");
  }
  Moments m;
  m.mean = propagated * set.weights;
  // Centered form of sum w p pᵀ - m mᵀ (identical when weights sum to one);
  // avoids cancellation for states with large offsets.
  const Matrix centered = propagated.colwise() - m.mean;
  m.covariance = centered * set.weights.asDiagonal() * centered.transpose();
  if (additive_cov) {
    if (additive_cov->rows() != m.covariance.rows() || additive_cov->cols() != m.covariance.cols()) {
      throw DimensionError("additive covariance does not match propagated dimension");
    }
    m.covariance += *additive_cov;
  }
  m.covariance = symmetrize(m.covariance);
  return m;
}

Matrix cross_covariance(const SigmaPointSet& set, const Matrix& left, const Matrix& right,
                        const Vector& left_mean, const Vector& right_mean) {
  if (left.cols() != set.count() || right.cols() != set.count()) {
    throw DimensionError("cross-covariance point counts do not match sigma point set");
  }
  const Matrix lc = left.colwise() - left_mean;
  const Matrix rc = right.colwise() - right_mean;
  return lc * set.weights.asDiagonal() * rc.transpose();
}

}  // namespace iukf
