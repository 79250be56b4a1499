#pragma once

#include <variant>
#include <vector>

#include "tracereg/types.hpp"

namespace tracereg {

// Canonical one-parameter exponential family: density
//   exp{ (y * eta - b(eta)) / phi + c(y, phi) },
// with log-partition b, mean b'(eta), variance phi * b''(eta). The model
// couples the response to a coefficient matrix through the linear predictor
// eta_i = <Theta, X_i> = trace(Theta^T X_i).

enum class Family { bernoulli_logit, gaussian_identity };

/// Log-partition and derivatives, overflow-safe for the logit family:
/// b(eta) = log(1 + e^eta) is evaluated as max(eta,0) + log1p(e^-|eta|),
/// and the sigmoid never overflows. Dispersion phi is 1 for both families.
struct ExpFamily {
  Family family = Family::bernoulli_logit;

  double b(double eta) const;         // log-partition
  double b_prime(double eta) const;   // mean function
  double b_double_prime(double eta) const;  // variance function
  double phi() const { return 1.0; }

  static ExpFamily bernoulli_logit() { return {Family::bernoulli_logit}; }
  static ExpFamily gaussian_identity() { return {Family::gaussian_identity}; }
};

// --- Design encodings ------------------------------------------------------
//
// Three measurement ensembles share one estimator. Each stores the data in
// the shape its solver exploits; loss/gradient agree with the generic
// definition on the equivalent stacked design (tested to 1e-10).

/// Fully general design: row i of x is vec(X_i), the d1 x d2 measurement
/// matrix stacked column-by-column (Eigen's native reshape order).
struct GeneralDesign {
  Matrix x;  // n x (d1*d2)
  Vector y;  // n
};

/// Multi-response (reduced-rank) design: all d responses of sample i share
/// the covariate row x_i; eta_ij = <theta_j, x_i> where theta_j is row j of
/// the coefficient matrix. Equivalent stacked design: X_(i,j) = e_j x_i^T,
/// term count N = n * d.
struct RrrDesign {
  Matrix x;  // n x d covariate rows
  Matrix y;  // n x d responses, y(i, j) response j of sample i
};

/// Singleton design for matrix completion: observation i touches one cell
/// (row_idx[i], col_idx[i]) with X_i = scale * e_a e_b^T, i.e.
/// eta_i = scale * Theta(a, b). Indices are 0-based; repeated cells allowed.
struct SingletonDesign {
  std::vector<int> row_idx;
  std::vector<int> col_idx;
  Vector y;      // n
  double scale = 1.0;
};

using Design = std::variant<GeneralDesign, RrrDesign, SingletonDesign>;

/// One trace-regression problem instance: design + responses + family +
/// coefficient dimensions. Validate on construction via the make_* helpers.
struct Problem {
  int d1 = 0;
  int d2 = 0;
  ExpFamily family;
  Design design;

  int n_samples() const;  // number of observation units
  int n_terms() const;    // loss terms: n for general/singleton, n*d1 for rrr
};

Problem make_general_problem(Matrix x, Vector y, int d1, int d2, ExpFamily fam);
Problem make_rrr_problem(Matrix x, Matrix y, ExpFamily fam);
Problem make_singleton_problem(std::vector<int> row_idx, std::vector<int> col_idx,
                               Vector y, int d1, int d2, double scale, ExpFamily fam);

/// Throws InvalidInput if dimensions, indices, finiteness, or (for the logit
/// family) {0,1} response coding are violated.
void validate(const Problem& p);

// --- Loss interface ---------------------------------------------------------
//
// Negative mean log-likelihood over the loss terms,
//   L(Theta) = (1/N) sum_t [ b(eta_t) - y_t * eta_t ],
// gradient (1/N) sum_t [ b'(eta_t) - y_t ] X_t, curvature weights b''(eta_t).

/// Linear predictors, one per loss term. For RrrDesign the order is
/// t = i * d1 + j (sample-major, j over responses), matching
/// curvature_weights.
Vector linear_predictors(const Problem& p, const Eigen::Ref<const Matrix>& theta);

double loss(const Problem& p, const Eigen::Ref<const Matrix>& theta);

Matrix gradient(const Problem& p, const Eigen::Ref<const Matrix>& theta);

/// b''(eta_t) per loss term, same ordering as linear_predictors. No clamping
/// here; solvers clamp at their floor when dividing by weights.
Vector curvature_weights(const Problem& p, const Eigen::Ref<const Matrix>& theta);

/// Rewrites any problem as an equivalent GeneralDesign problem with one
/// stacked-vec row per loss term (dense; intended for small instances and
/// cross-solver equivalence checks). loss/gradient agree to rounding.
Problem expand_to_general(const Problem& p);

/// Penalty level recommended by theory for each ensemble, scaled by a
/// user constant c:
///   GeneralDesign:             c * sqrt(max(d1,d2) / n)
///   RrrDesign/SingletonDesign: c * sqrt(d * log(d) / n),  d = max(d1,d2),
/// with n = number of observation units (samples, not loss terms).
double lambda_default(const Problem& p, double c);

}  // namespace tracereg
