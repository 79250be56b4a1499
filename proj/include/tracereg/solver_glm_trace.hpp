#pragma once

#include <cstdint>

#include "tracereg/expfam.hpp"
#include "tracereg/types.hpp"

namespace tracereg {

/// Curvature model for the outer quadratic approximation.
///  - per_sample: weights b''(eta_i), refreshed every outer iteration
///    (the textbook IRLS surrogate; rebuilds the normal matrix each step).
///  - quarter_bound: the global logistic majorizer b'' <= 1/4 as a constant
///    weight (gaussian weights are already constant 1). Same fixed point --
///    at convergence the quadratic term vanishes and only the gradient
///    enters the stationarity condition -- but the normal matrix is built
///    and factorized once per fit. Preferred for large logistic problems.
enum class Curvature { per_sample, quarter_bound };

struct SolverConfig {
  double lambda = 0.1;      // nuclear-norm penalty level (> 0)
  double beta = 1.0;        // splitting quadratic coupling
  double alpha = 0.9;       // dual relaxation step
  int max_outer = 100;
  int max_inner = 500;
  double outer_tol = 1e-3;  // Frobenius change of the outer iterate
  double inner_tol = 1e-6;  // relative change of the thresholded iterate
  Curvature curvature = Curvature::per_sample;
  int dense_normal_max_dim = 2048;  // build the p x p normal matrix when
                                    // p = d1*d2 <= this; otherwise CG
  double cg_tol = 1e-10;            // relative residual for the CG solve
  int cg_max_iter = 10000;
  double weight_floor = 1e-12;      // clamp for saturated-logit weights
  std::uint64_t seed = 0;           // reserved; fitting is deterministic
};

struct FitResult {
  Matrix theta_hat;
  int outer_iters = 0;
  long inner_iters_total = 0;
  double objective = 0.0;         // loss + lambda * ||theta_hat||_nuclear
  double lambda_effective = 0.0;  // penalty level the iteration targets;
                                  // equals lambda except where documented
  double kkt_operator_norm = 0.0; // ||grad L(theta_hat)||_op; <= lambda_eff
                                  // up to tolerance at an exact solution
  double kkt_alignment_gap = 0.0; // |<-grad, theta_hat> - lambda_eff * ||theta_hat||_N|
  bool converged = false;
};

/// Penalized objective loss(p, theta) + lambda * ||theta||_nuclear.
double objective_value(const Problem& p, const Eigen::Ref<const Matrix>& theta,
                       double lambda);

/// Nuclear-norm-penalized fit for a GeneralDesign problem:
///   minimize (1/n) sum_i [b(<Theta, X_i>) - Y_i <Theta, X_i>] + lambda ||Theta||_N.
/// Outer loop: local quadratic approximation of the loss at the current
/// iterate. Inner loop: Peaceman-Rachford splitting of (quadratic + nuclear),
/// whose x-step solves a ridge system and whose y-step is a singular-value
/// soft threshold at 2*lambda/beta. Starts from Theta = 0; returns the
/// visited iterate with the lowest penalized objective (first on ties), so
/// objective(theta_hat) <= objective(0) always holds and a
/// penalty-dominant lambda returns the exact zero matrix.
FitResult fit_glm_trace(const Problem& p, const SolverConfig& cfg);

}  // namespace tracereg
