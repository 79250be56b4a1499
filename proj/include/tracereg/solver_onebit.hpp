#pragma once

#include <cstdint>

#include "tracereg/solver_glm_trace.hpp"

namespace tracereg {

/// Controls for the binary matrix-completion solver.
struct OneBitConfig {
  double lambda = 0.1;     // penalty level, user (theta) scale
  double R = 1.0;          // box level on the log-odds scale eta = scale*theta;
                           // the fit satisfies max|theta_hat| <= R/scale
  double rho = 0.1;        // ADMM quadratic penalty
  double gamma = 1.618;    // ADMM dual step multiplier
  int max_outer = 100;
  int admm_max_iter = 2000;
  double outer_tol = 1e-3;  // Frobenius change of the log-odds iterate
  double admm_tol = 1e-5;   // primal residual and relative iterate change
  std::uint64_t seed = 0;   // reserved; fitting is deterministic
};

/// Constrained nuclear-norm fit for a SingletonDesign problem,
///   minimize (1/n) sum_i [b(eta_i) - y_i eta_i] + lambda ||Theta||_N
///   subject to max|Theta_jk| <= R/scale,      eta_i = scale * Theta(a_i, b_i).
///
/// Internally works on the log-odds matrix G = scale * Theta. Outer loop:
/// local quadratic model of the loss through per-cell curvature/residual
/// sums. Inner loop: ADMM on the PSD lifting
///   L = [[W1, G], [G^T, W2]] >= 0,   min tr-shift + cell quadratics,
/// using the identity min tr(L) = 2 ||G||_N, alternating a PSD projection,
/// a boxed elementwise cell update, and a scaled dual step. The trace shift
/// is (2*lambda/scale) I so the lifted objective is exactly 4x the
/// user-scale local model (both the curvature terms and the penalty pick up
/// the same pair-counting factor). Accepts bernoulli_logit or
/// gaussian_identity (the latter is the penalized-least-squares variant with
/// the same constraint machinery). Returns the best visited iterate; the
/// zero matrix is always a candidate.
FitResult fit_onebit(const Problem& p, const OneBitConfig& cfg);

/// Thresholding rules turning a fitted matrix into binary ratings.
///  - glm_sign: entry >= 0 (apply to a log-odds-scale fit).
///  - linear_half: entry >= 1/2 (apply to a probability-scale fit).
enum class RatingRule { glm_sign, linear_half };

Eigen::MatrixXi predict_ratings(const Eigen::Ref<const Matrix>& fitted, RatingRule rule);

/// Fraction of matching entries, 1 - ||A - B||_F^2 / (d1*d2) for 0/1 matrices.
double rating_accuracy(const Eigen::Ref<const Eigen::MatrixXi>& predicted,
                       const Eigen::Ref<const Eigen::MatrixXi>& truth);

}  // namespace tracereg
