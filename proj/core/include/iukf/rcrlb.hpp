#pragma once

#include <span>

#include "iukf/linalg.hpp"

namespace iukf {

struct InformationState {
  Matrix information;   // J_k
  int step = 0;
};

struct Regularized {
  Matrix matrix;
  double delta = 0.0;
};

// Q + delta I with delta = rel * max(1, trace(Q)/n).
Regularized regularize(const Matrix& q, double rel = 1e-8);

// J_k = Q⁻¹ + Hᵀ R⁻¹ H - Q⁻¹ F (J_{k-1} + Fᵀ Q⁻¹ F)⁻¹ Fᵀ Q⁻¹ for additive
// Gaussian noise. F maps time k-1 to k, H is the observation Jacobian at k.
// Q must already be regularized to invertibility.
InformationState forward_rcrlb_step(const InformationState& previous, const Matrix& f_jac,
                                    const Matrix& h_jac, const Matrix& q_reg, const Matrix& r);

// Same recursion for the inverse estimate with the transition Jacobian F-tilde,
// action Jacobian G, transition noise K R Kᵀ (regularized) and Sigma_eps.
InformationState inverse_rcrlb_step(const InformationState& previous, const Matrix& ftilde_jac,
                                    const Matrix& g_jac, const Matrix& qbar_reg,
                                    const Matrix& action_noise);

// Sum of the selected diagonal entries of J⁻¹ (all of them when `indices` is
// empty); the squared bound for that block of the state.
double bound_trace(const InformationState& info, std::span<const int> indices = {});

// sqrt(bound_trace(...)).
double rcrlb_position_metric(const InformationState& info, std::span<const int> indices = {});

}  // namespace iukf
