#include "iukf/linalg.hpp"

#include <cmath>
#include <numbers>

#include "iukf/errors.hpp"

namespace iukf {

bool is_symmetric(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.transpose()).norm() <= rel_tol * (1.0 + m.norm());
}

Matrix psd_factor(const Matrix& cov) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() == Eigen::Success) return llt.matrixL();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(cov));
  if (eig.info() != Eigen::Success) {
    throw FactorizationError("eigendecomposition failed while factoring covariance", cov);
  }
  const Vector roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal();
}

Matrix numerical_jacobian(const VectorMap& fn, const Vector& x, double step_scale) {
  const Vector f0 = fn(x);
  Matrix jac(f0.size(), x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = step_scale * (1.0 + std::abs(x(i)));
    probe(i) = x(i) + h;
    const Vector up = fn(probe);
    probe(i) = x(i) - h;
    const Vector down = fn(probe);
    probe(i) = x(i);
    jac.col(i) = (up - down) / (2.0 * h);
  }
  return jac;
}

Matrix solve_right_spd(const Matrix& a, const Matrix& b, const std::string& context) {
  const Matrix sym = symmetrize(a);
  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() != Eigen::Success || !sym.allFinite()) {
    throw SingularInnovationError(context + ": innovation covariance is not positive definite");
  }
  const Eigen::VectorXd diag = llt.matrixLLT().diagonal();
  if (diag.minCoeff() <= 1e-12 * std::max(1.0, diag.maxCoeff())) {
    throw SingularInnovationError(context + ": innovation covariance is numerically singular");
  }
  return llt.solve(b.transpose()).transpose();
}

double reciprocal_condition(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(m), Eigen::EigenvaluesOnly);
  const Vector ev = eig.eigenvalues().cwiseAbs();
  const double hi = ev.maxCoeff();
  if (hi == 0.0) return 0.0;
  return ev.minCoeff() / hi;
}

double wrap_angle(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double wrapped = std::remainder(angle, two_pi);
  if (wrapped <= -std::numbers::pi) wrapped += two_pi;
  return wrapped;
}

}  // namespace iukf
