#pragma once

#include "tracereg/types.hpp"

namespace tracereg {

/// Thin SVD A = U diag(s) V^T with k = min(rows, cols) columns.
/// Singular values are nonincreasing and nonnegative. Deterministic sign
/// convention: each (u_j, v_j) pair is flipped so that the largest-magnitude
/// entry of u_j (first such entry on ties) is nonnegative.
struct SvdFactors {
  Matrix u;   // rows x k, orthonormal columns
  Vector s;   // k, nonincreasing
  Matrix v;   // cols x k, orthonormal columns
};

SvdFactors svd(const Eigen::Ref<const Matrix>& a);

struct MatrixNorms {
  double frobenius = 0.0;
  double operator_norm = 0.0;   // largest singular value
  double nuclear = 0.0;         // sum of singular values
  double elementwise_max = 0.0; // max |a_ij|
};

MatrixNorms norms(const Eigen::Ref<const Matrix>& a);

/// Numerical rank: number of singular values above 1e-10 * s_max.
int numerical_rank(const Eigen::Ref<const Matrix>& a);

/// Schatten q-measure sum_j s_j^q for q in [0, 1), with the q = 0 convention
/// 0^0 = 0: the count of singular values above the numerical-rank cutoff.
double schatten_q_measure(const Eigen::Ref<const Matrix>& a, double q);

/// Singular value soft threshold: U max(s - tau, 0) V^T. This is the
/// proximal operator of tau * nuclear norm at a.
Matrix soft_threshold_sv(const Eigen::Ref<const Matrix>& a, double tau);

/// Frobenius projection of a square matrix onto the PSD cone: symmetrize,
/// then clamp negative eigenvalues to zero.
Matrix project_psd(const Eigen::Ref<const Matrix>& a);

/// Elementwise clamp to [-bound, bound].
Matrix clip_box(const Eigen::Ref<const Matrix>& a, double bound);

}  // namespace tracereg
