#pragma once

#include "tracereg/solver_glm_trace.hpp"

namespace tracereg {

/// Configuration for the multi-response (reduced-rank) solver. Inherits the
/// generic splitting controls; adds the scaling-variant switch.
///
/// literal_scaling = true normalizes the update's data terms by the sample
/// count n rather than the loss-term count N = n*d:
///   C_x <- (2 S/n + beta I)^{-1} (beta (C_y - C_bar) + P + 2 T/n)
/// with S = (1/(n d)) sum_ij w_ij x_i x_i^T and T = sum_i x_i ytilde_i^T.
/// Fixed-point analysis shows this iteration targets the estimator at an
/// effective penalty lambda/d (the quadratic term does not move the fixed
/// point; the linear-term-to-penalty ratio does), and its curvature model is
/// a factor n*d below the loss Hessian, so outer steps overshoot and the
/// loop typically fails to converge outside the all-zero regime. It stays
/// available, and default-on, so switching normalizations is an explicit
/// choice; FitResult.lambda_effective reports lambda/d and all diagnostics
/// use it.
///
/// literal_scaling = false is the self-consistent variant obtained by
/// pooling per-response curvatures in the stacked-design surrogate
/// (Kronecker approximation H ~ S (x) I):
///   C_x <- (2 S + beta I)^{-1} (beta (C_y - C_bar) + P + 2 T/N),  N = n*d.
/// Same estimator family, lambda_effective = lambda. This is the variant
/// the numerical studies use.
struct RrrConfig : SolverConfig {
  bool literal_scaling = true;
};

/// Nuclear-norm-penalized multi-response fit,
///   minimize (1/N) sum_ij [b(<theta_j, x_i>) - y_ij <theta_j, x_i>]
///            + lambda_effective * ||Theta||_N,
/// where theta_j is row j of Theta. The inner splitting works on d2 x d1
/// matrices with a single d2 x d2 factorization per outer step, applied
/// column-wise. Returns the best visited iterate (see fit_glm_trace);
/// shares its FitResult contract, with `objective` evaluated at
/// lambda_effective.
FitResult fit_rrr(const Problem& p, const RrrConfig& cfg);

}  // namespace tracereg
