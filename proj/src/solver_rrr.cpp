#include "tracereg/solver_rrr.hpp"

#include <algorithm>
#include <cmath>

#include "tracereg/matcore.hpp"

namespace tracereg {

FitResult fit_rrr(const Problem& p, const RrrConfig& cfg) {
  validate(p);
  require(cfg.lambda > 0.0 && std::isfinite(cfg.lambda), "lambda must be positive");
  require(cfg.beta > 0.0 && cfg.alpha > 0.0 && cfg.alpha <= 1.0, "bad splitting parameters");
  require(cfg.max_outer > 0 && cfg.max_inner > 0, "iteration caps must be positive");
  require(cfg.outer_tol > 0.0 && cfg.inner_tol > 0.0, "tolerances must be positive");
  const auto* rd = std::get_if<RrrDesign>(&p.design);
  require(rd != nullptr, "fit_rrr expects an RrrDesign problem");

  const Index n = rd->x.rows();
  const Index d_resp = p.d1;  // responses = rows of Theta
  const Index d_cov = p.d2;   // covariates = cols of Theta
  const double nn = static_cast<double>(n);
  const double big_n = nn * static_cast<double>(d_resp);
  const ExpFamily& fam = p.family;

  const double lambda_eff =
      cfg.literal_scaling ? cfg.lambda / static_cast<double>(d_resp) : cfg.lambda;
  const double tau = 2.0 * cfg.lambda / cfg.beta;

  FitResult res;
  res.lambda_effective = lambda_eff;
  Matrix best = Matrix::Zero(d_resp, d_cov);
  double best_obj = objective_value(p, best, lambda_eff);
  Matrix theta_bar = best;

  for (int k = 1; k <= cfg.max_outer; ++k) {
    // Pooled curvature and working residuals at theta_bar:
    //   S = (1/(n d)) sum_ij w_ij x_i x_i^T,   T = sum_i x_i ytilde_i^T.
    const Matrix eta = rd->x * theta_bar.transpose();  // n x d_resp
    Vector row_weight = Vector::Zero(n);
    Matrix ztilde(n, d_resp);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < d_resp; ++j) {
        row_weight(i) += std::max(fam.b_double_prime(eta(i, j)), cfg.weight_floor);
        ztilde(i, j) = rd->y(i, j) - fam.b_prime(eta(i, j));
      }
    }
    const Matrix s_mat =
        (rd->x.transpose() * row_weight.asDiagonal() * rd->x) / (nn * static_cast<double>(d_resp));
    const Matrix t_mat = rd->x.transpose() * ztilde;  // d_cov x d_resp

    Matrix m = cfg.literal_scaling ? Matrix((2.0 / nn) * s_mat) : Matrix(2.0 * s_mat);
    m.diagonal().array() += cfg.beta;
    const Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) throw SolverError("rrr normal matrix factorization failed");
    const Matrix linear = cfg.literal_scaling ? Matrix((2.0 / nn) * t_mat)
                                                    : Matrix((2.0 / big_n) * t_mat);

    // Inner splitting in the column orientation C = Theta^T (d_cov x d_resp):
    // ridge solve column-wise, half dual step, soft threshold at
    // 2*lambda/beta, full dual step.
    const Matrix c_bar = theta_bar.transpose();
    Matrix cx = Matrix::Zero(d_cov, d_resp), cy = cx, dual = cx;
    bool inner_converged = false;
    for (int l = 0; l < cfg.max_inner; ++l) {
      cx = llt.solve(cfg.beta * (cy - c_bar) + dual + linear);
      const Matrix dual_half = dual - cfg.alpha * cfg.beta * (cx - cy + c_bar);
      const Matrix cy_new = soft_threshold_sv(cx + c_bar - dual_half / cfg.beta, tau);
      dual = dual_half - cfg.alpha * cfg.beta * (cx - cy_new + c_bar);
      const double rel = (cy_new - cy).norm() / std::max(1.0, cy.norm());
      cy = cy_new;
      ++res.inner_iters_total;
      if (rel < cfg.inner_tol) {
        inner_converged = true;
        break;
      }
    }

    Matrix theta_new = cy.transpose();
    const double obj = objective_value(p, theta_new, lambda_eff);
    if (obj < best_obj) {
      best = theta_new;
      best_obj = obj;
    }
    const double change = (theta_new - theta_bar).norm();
    theta_bar = std::move(theta_new);
    res.outer_iters = k;
    if (change < cfg.outer_tol) {
      res.converged = inner_converged;
      break;
    }
  }

  res.theta_hat = best;
  res.objective = best_obj;
  const Matrix g = gradient(p, res.theta_hat);
  res.kkt_operator_norm = norms(g).operator_norm;
  res.kkt_alignment_gap = std::abs(-(g.cwiseProduct(res.theta_hat)).sum() -
                                   lambda_eff * norms(res.theta_hat).nuclear);
  return res;
}

}  // namespace tracereg
