#pragma once

#include <cstdint>

#include "tracereg/expfam.hpp"
#include "tracereg/rng.hpp"
#include "tracereg/solver_onebit.hpp"
#include "tracereg/types.hpp"

namespace tracereg {

/// Ground truth for a simulated problem, with the low-rank structure
/// measures the studies report against.
struct TrueModel {
  Matrix theta_star;
  int rank = 0;       // exact construction rank
  double rho_bq = 0;  // schatten-q measure of theta_star at q
  double q = 0.0;
};

/// Low-rank truth constructions. All draws go through Rng (reproducible).
///  - unit_singular_values: Theta* = U V^T with Haar-distributed U, V
///    (QR of iid normal matrices, R-diagonal sign fix); all nonzero
///    singular values equal 1, operator norm 1, Frobenius norm sqrt(rank).
///  - unit_frobenius: the same scaled by 1/sqrt(rank); Frobenius norm 1.
///  - eigenspace_of_sample_cov: sum of u_j u_j^T over the top-`rank`
///    eigenvectors of the second-moment matrix (1/100) sum v v^T of 100
///    iid N(0, I_d) vectors; symmetric PSD with unit nonzero singular
///    values (square matrices only).
enum class ThetaKind { unit_singular_values, unit_frobenius, eigenspace_of_sample_cov };

TrueModel gen_theta_star(int d1, int d2, int rank, ThetaKind kind, std::uint64_t seed);

/// General-design logistic problem: X_i has iid N(0,1) entries (drawn row by
/// row in storage order), Y_i ~ Bernoulli(sigmoid(<Theta*, X_i>)) drawn
/// after all designs.
Problem gen_matrix_regression(const TrueModel& tm, int n, std::uint64_t seed);

/// Multi-response logistic problem: covariate rows x_i iid N(0,1) (row by
/// row), then y_ij ~ Bernoulli(sigmoid(theta_j . x_i)) in sample-major
/// order.
Problem gen_rrr(const TrueModel& tm, int n, std::uint64_t seed);

struct OneBitData {
  Problem problem;
  OneBitConfig config;  // lambda and R filled in; other fields defaulted
};

/// Binary completion problem: n cells drawn uniformly with replacement
/// (row index then column index per observation), responses
/// Y ~ Bernoulli(sigmoid(scale * Theta*_ab)) with scale = sqrt(d1*d2)
/// (= d for square matrices, matching the rescaled singleton design).
/// The config gets R = r_mult * scale * max|Theta*| -- the box is stated on
/// the log-odds scale, so the truth is feasible with slack r_mult -- and
/// lambda = lambda_c * sqrt(d log d / n), d = max(d1, d2).
OneBitData gen_onebit(const TrueModel& tm, int n, double r_mult, double lambda_c,
                      std::uint64_t seed);

/// Fixed binary rating matrix T with T_ij ~ Bernoulli(sigmoid(Theta*_ij)),
/// drawn row-major; here Theta* itself is the log-odds matrix.
Eigen::MatrixXi gen_rating_matrix(const TrueModel& tm, std::uint64_t seed);

}  // namespace tracereg
