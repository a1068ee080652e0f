#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>

namespace iukf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

using VectorMap = std::function<Vector(const Vector&)>;
using JacobianMap = std::function<Matrix(const Vector&)>;

inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

bool is_symmetric(const Matrix& m, double rel_tol = 1e-12);

// Factor F with F Fᵀ = cov for a symmetric p.s.d. covariance. Uses Cholesky
// when it succeeds, otherwise an eigendecomposition with negative
// eigenvalues clamped to zero (rank-deficient noise covariances).
Matrix psd_factor(const Matrix& cov);

// Central-difference Jacobian, step_scale * (1 + |x_i|) per coordinate.
Matrix numerical_jacobian(const VectorMap& fn, const Vector& x, double step_scale = 1e-6);

// Solve X * A = B for X with A symmetric positive definite (i.e. B A⁻¹).
// Throws SingularInnovationError when A is not numerically positive definite.
Matrix solve_right_spd(const Matrix& a, const Matrix& b, const std::string& context);

// Reciprocal condition estimate of a symmetric matrix from its eigenvalues.
double reciprocal_condition(const Matrix& m);

// Wrap an angle to (-pi, pi].
double wrap_angle(double angle);

}  // namespace iukf
