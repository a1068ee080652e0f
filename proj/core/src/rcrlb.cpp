#include "iukf/rcrlb.hpp"

#include <cmath>
#include <sstream>

#include "iukf/errors.hpp"

namespace iukf {
namespace {

Matrix spd_inverse(const Matrix& m, const char* what) {
  const Matrix sym = symmetrize(m);
  Eigen::LDLT<Matrix> ldlt(sym);
  const double rcond = ldlt.info() == Eigen::Success ? ldlt.rcond() : 0.0;
  if (!(rcond > 1e-15)) {
    std::ostringstream msg;
    msg << what << " is singular (reciprocal condition " << reciprocal_condition(sym) << ")";
    throw NumericalError(msg.str());
  }
  return symmetrize(ldlt.solve(Matrix::Identity(sym.rows(), sym.cols())));
}

}  // namespace

Regularized regularize(const Matrix& q, double rel) {
  const double n = static_cast<double>(q.rows());
  Regularized out;
  out.delta = rel * std::max(1.0, q.trace() / n);
  out.matrix = symmetrize(q);
  out.matrix.diagonal().array() += out.delta;
  return out;
}

InformationState forward_rcrlb_step(const InformationState& previous, const Matrix& f_jac,
                                    const Matrix& h_jac, const Matrix& q_reg, const Matrix& r) {
  const Eigen::Index n = previous.information.rows();
  if (f_jac.rows() != n || f_jac.cols() != n || h_jac.cols() != n || q_reg.rows() != n ||
      r.rows() != h_jac.rows()) {
    throw DimensionError("rcrlb step: inconsistent matrix dimensions");
  }
  const Matrix r_inv = spd_inverse(r, "measurement noise");
  InformationState next;
  next.step = previous.step + 1;

  // With J invertible the recursion equals (Q + F J⁻¹ Fᵀ)⁻¹ + Hᵀ R⁻¹ H. That
  // form never builds Q⁻¹, whose entries reach 1/delta for a regularized
  // rank-deficient Q and cancel catastrophically in the subtraction below.
  const Matrix j = symmetrize(previous.information);
  Eigen::LDLT<Matrix> j_ldlt(j);
  if (j_ldlt.info() == Eigen::Success && j_ldlt.isPositive() && j_ldlt.rcond() > 1e-12) {
    const Matrix p = symmetrize(j_ldlt.solve(Matrix::Identity(n, n)));
    const Matrix predicted = f_jac * p * f_jac.transpose() + q_reg;
    next.information =
        symmetrize(spd_inverse(predicted, "F J⁻¹ Fᵀ + Q") + h_jac.transpose() * r_inv * h_jac);
    return next;
  }

  const Matrix q_inv = spd_inverse(q_reg, "regularized process noise");
  const Matrix qf = q_inv * f_jac;                       // D21 = -Q⁻¹ F
  const Matrix d11 = f_jac.transpose() * qf;             // Fᵀ Q⁻¹ F
  const Matrix inner = spd_inverse(j + d11, "J + Fᵀ Q⁻¹ F");
  next.information = symmetrize(q_inv + h_jac.transpose() * r_inv * h_jac -
                                qf * inner * qf.transpose());
  return next;
}

InformationState inverse_rcrlb_step(const InformationState& previous, const Matrix& ftilde_jac,
                                    const Matrix& g_jac, const Matrix& qbar_reg,
                                    const Matrix& action_noise) {
  return forward_rcrlb_step(previous, ftilde_jac, g_jac, qbar_reg, action_noise);
}

double bound_trace(const InformationState& info, std::span<const int> indices) {
  const Matrix cov = spd_inverse(info.information, "information matrix");
  if (indices.empty()) return cov.trace();
  double sum = 0.0;
  for (int i : indices) {
    if (i < 0 || i >= cov.rows()) throw DimensionError("bound index out of range");
    sum += cov(i, i);
  }
  return sum;
}

double rcrlb_position_metric(const InformationState& info, std::span<const int> indices) {
  return std::sqrt(bound_trace(info, indices));
}

}  // namespace iukf
