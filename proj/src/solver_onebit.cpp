#include "tracereg/solver_onebit.hpp"

#include <algorithm>
#include <cmath>

#include "tracereg/matcore.hpp"

namespace tracereg {

FitResult fit_onebit(const Problem& p, const OneBitConfig& cfg) {
  validate(p);
  require(cfg.lambda > 0.0 && std::isfinite(cfg.lambda), "lambda must be positive");
  require(cfg.R > 0.0 && std::isfinite(cfg.R), "box level R must be positive");
  require(cfg.rho > 0.0 && cfg.gamma > 0.0, "admm parameters must be positive");
  require(cfg.max_outer > 0 && cfg.admm_max_iter > 0, "iteration caps must be positive");
  require(cfg.outer_tol > 0.0 && cfg.admm_tol > 0.0, "tolerances must be positive");
  const auto* sd = std::get_if<SingletonDesign>(&p.design);
  require(sd != nullptr, "fit_onebit expects a SingletonDesign problem");

  const Index d1 = p.d1, d2 = p.d2, m = d1 + d2;
  const double s = sd->scale;
  const double nn = static_cast<double>(sd->y.size());
  const ExpFamily& fam = p.family;

  // Per-cell sufficient statistics; repeated observations accumulate.
  Matrix count = Matrix::Zero(d1, d2), ysum = Matrix::Zero(d1, d2);
  for (Index i = 0; i < sd->y.size(); ++i) {
    count(sd->row_idx[i], sd->col_idx[i]) += 1.0;
    ysum(sd->row_idx[i], sd->col_idx[i]) += sd->y(i);
  }

  const double shift = 2.0 * cfg.lambda / s;  // trace-shift level, see header

  FitResult res;
  res.lambda_effective = cfg.lambda;
  Matrix best = Matrix::Zero(d1, d2);
  double best_obj = objective_value(p, best, cfg.lambda);
  Matrix gamma_bar = Matrix::Zero(d1, d2);  // log-odds iterate, s * theta

  for (int k = 1; k <= cfg.max_outer; ++k) {
    // Local quadratic model at gamma_bar: cell curvature a(j,k) and cell
    // residual b(j,k), summed over the observations hitting each cell.
    Matrix cell_a(d1, d2), cell_b(d1, d2);
    for (Index j = 0; j < d1; ++j) {
      for (Index c = 0; c < d2; ++c) {
        const double eta = gamma_bar(j, c);
        cell_a(j, c) = count(j, c) * fam.b_double_prime(eta);
        cell_b(j, c) = ysum(j, c) - count(j, c) * fam.b_prime(eta);
      }
    }

    Matrix lift_bar = Matrix::Zero(m, m);  // M(gamma_bar)
    lift_bar.topRightCorner(d1, d2) = gamma_bar;
    lift_bar.bottomLeftCorner(d2, d1) = gamma_bar.transpose();

    Matrix l_mat = Matrix::Zero(m, m);
    Matrix r_mat = Matrix::Zero(m, m);
    Matrix w_mat = Matrix::Zero(m, m);  // fresh dual start every outer pass
    bool admm_converged = false;
    for (int l = 0; l < cfg.admm_max_iter; ++l) {
      // PSD step: argmin_{L>=0} shift*tr(L) + (rho/2)||L - R - M + W/rho||^2
      Matrix arg = r_mat + lift_bar - w_mat / cfg.rho;
      arg.diagonal().array() -= shift / cfg.rho;
      l_mat = project_psd(arg);

      const Matrix c_mat = l_mat - lift_bar + w_mat / cfg.rho;
      // Boxed cell step on the off-diagonal block; diagonal blocks are free
      // and pass through. r12 is the increment against gamma_bar, so the box
      // |gamma_bar + r12| <= R is a shifted clamp in increment coordinates.
      Matrix r12 = (cfg.rho * c_mat.topRightCorner(d1, d2) + (2.0 / nn) * cell_b)
                       .cwiseQuotient((cfg.rho + (2.0 / nn) * cell_a.array()).matrix());
      r12 = clip_box(r12 + gamma_bar, cfg.R) - gamma_bar;
      Matrix r_new = Matrix::Zero(m, m);
      r_new.topLeftCorner(d1, d1) = c_mat.topLeftCorner(d1, d1);
      r_new.bottomRightCorner(d2, d2) = c_mat.bottomRightCorner(d2, d2);
      r_new.topRightCorner(d1, d2) = r12;
      r_new.bottomLeftCorner(d2, d1) = r12.transpose();

      const Matrix primal = l_mat - r_new - lift_bar;
      w_mat += cfg.gamma * cfg.rho * primal;
      const double rel_change = (r_new - r_mat).norm() / std::max(1.0, r_mat.norm());
      r_mat = r_new;
      ++res.inner_iters_total;
      if (primal.norm() < cfg.admm_tol && rel_change < cfg.admm_tol) {
        admm_converged = true;
        break;
      }
    }

    // The new log-odds iterate is the truncated off-diagonal block of L.
    const Matrix gamma_new = clip_box(l_mat.topRightCorner(d1, d2), cfg.R);
    const Matrix theta_new = gamma_new / s;
    const double obj = objective_value(p, theta_new, cfg.lambda);
    if (obj < best_obj) {
      best = theta_new;
      best_obj = obj;
    }
    const double change = (gamma_new - gamma_bar).norm();
    gamma_bar = gamma_new;
    res.outer_iters = k;
    if (change < cfg.outer_tol) {
      res.converged = admm_converged;
      break;
    }
  }

  res.theta_hat = best;
  res.objective = best_obj;
  const Matrix g = gradient(p, res.theta_hat);
  res.kkt_operator_norm = norms(g).operator_norm;
  res.kkt_alignment_gap = std::abs(-(g.cwiseProduct(res.theta_hat)).sum() -
                                   cfg.lambda * norms(res.theta_hat).nuclear);
  return res;
}

Eigen::MatrixXi predict_ratings(const Eigen::Ref<const Matrix>& fitted, RatingRule rule) {
  require_finite(fitted, "fitted matrix");
  const double cut = rule == RatingRule::glm_sign ? 0.0 : 0.5;
  Eigen::MatrixXi out(fitted.rows(), fitted.cols());
  for (Index i = 0; i < fitted.rows(); ++i)
    for (Index j = 0; j < fitted.cols(); ++j) out(i, j) = fitted(i, j) >= cut ? 1 : 0;
  return out;
}

double rating_accuracy(const Eigen::Ref<const Eigen::MatrixXi>& predicted,
                       const Eigen::Ref<const Eigen::MatrixXi>& truth) {
  require(predicted.rows() == truth.rows() && predicted.cols() == truth.cols(),
          "rating matrices must have equal dimensions");
  const auto total = static_cast<double>(predicted.size());
  double match = 0.0;
  for (Index i = 0; i < predicted.rows(); ++i)
    for (Index j = 0; j < predicted.cols(); ++j)
      if (predicted(i, j) == truth(i, j)) match += 1.0;
  return match / total;
}

}  // namespace tracereg
