#include "tracereg/solver_glm_trace.hpp"

#include <algorithm>
#include <cmath>

#include "tracereg/matcore.hpp"

namespace tracereg {

namespace {

void validate_config(const SolverConfig& cfg) {
  require(cfg.lambda > 0.0 && std::isfinite(cfg.lambda), "lambda must be positive");
  require(cfg.beta > 0.0 && std::isfinite(cfg.beta), "beta must be positive");
  require(cfg.alpha > 0.0 && cfg.alpha <= 1.0, "alpha must lie in (0, 1]");
  require(cfg.max_outer > 0 && cfg.max_inner > 0, "iteration caps must be positive");
  require(cfg.outer_tol > 0.0 && cfg.inner_tol > 0.0, "tolerances must be positive");
  require(cfg.cg_tol > 0.0 && cfg.cg_max_iter > 0, "cg parameters must be positive");
}

/// X^T diag(w) X accumulated in row chunks (keeps the scaled copy small).
Matrix weighted_gram(const Eigen::Ref<const Matrix>& x, const Vector& sqrt_w) {
  const Index n = x.rows(), p = x.cols();
  // ~2 MB of scaled rows per pass
  const Index chunk = std::max<Index>(256, (Index{1} << 18) / std::max<Index>(p, 1));
  Matrix g = Matrix::Zero(p, p);
  for (Index i0 = 0; i0 < n; i0 += chunk) {
    const Index m = std::min(chunk, n - i0);
    Matrix c = x.middleRows(i0, m);
    c.array().colwise() *= sqrt_w.segment(i0, m).array();
    g.selfadjointView<Eigen::Lower>().rankUpdate(c.transpose());
  }
  g.template triangularView<Eigen::StrictlyUpper>() = g.transpose();
  return g;
}

/// Ridge system (2/n) X^T diag(w) X v + beta v = rhs, solved either through
/// a cached Cholesky factor of the dense normal matrix or matrix-free CG
/// with warm start. Which one is decided once per weight refresh.
class RidgeSystem {
 public:
  RidgeSystem(const Eigen::Ref<const Matrix>& x, const SolverConfig& cfg)
      : x_(x), cfg_(cfg), dense_(x.cols() <= cfg.dense_normal_max_dim) {}

  void set_weights(const Vector& w) {
    w_ = w;
    if (dense_) {
      const double n = static_cast<double>(x_.rows());
      Matrix a = (2.0 / n) * weighted_gram(x_, w_.cwiseSqrt());
      a.diagonal().array() += cfg_.beta;
      llt_.compute(a);
      if (llt_.info() != Eigen::Success)
        throw SolverError("ridge system factorization failed");
    }
  }

  /// Solves into `out`; uses `out`'s previous content as the CG warm start.
  void solve(const Vector& rhs, Vector& out, long& cg_iters) const {
    if (dense_) {
      out = llt_.solve(rhs);
      return;
    }
    const double n = static_cast<double>(x_.rows());
    const double scale = 2.0 / n;
    auto apply = [&](const Vector& v) -> Vector {
      Vector xv = x_ * v;
      xv.array() *= w_.array();
      return scale * (x_.transpose() * xv) + cfg_.beta * v;
    };
    Vector r = rhs - apply(out);
    const double target = cfg_.cg_tol * rhs.norm();
    if (r.norm() <= target) return;
    Vector d = r;
    double rs = r.squaredNorm();
    for (int it = 0; it < cfg_.cg_max_iter; ++it) {
      const Vector ad = apply(d);
      const double alpha = rs / d.dot(ad);
      out += alpha * d;
      r -= alpha * ad;
      ++cg_iters;
      const double rs_new = r.squaredNorm();
      if (std::sqrt(rs_new) <= target) return;
      d = r + (rs_new / rs) * d;
      rs = rs_new;
    }
    throw SolverError("conjugate gradient did not reach tolerance");
  }

 private:
  const Eigen::Ref<const Matrix> x_;
  const SolverConfig& cfg_;
  bool dense_;
  Vector w_;
  Eigen::LLT<Matrix> llt_;
};

}  // namespace

double objective_value(const Problem& p, const Eigen::Ref<const Matrix>& theta,
                       double lambda) {
  return loss(p, theta) + lambda * norms(theta).nuclear;
}

FitResult fit_glm_trace(const Problem& p, const SolverConfig& cfg) {
  validate(p);
  validate_config(cfg);
  const auto* gd = std::get_if<GeneralDesign>(&p.design);
  require(gd != nullptr,
          "fit_glm_trace expects a GeneralDesign problem; use expand_to_general "
          "or the specialized solvers for other designs");

  const Index n = gd->x.rows();
  const Index pdim = gd->x.cols();
  const double n_inv = 1.0 / static_cast<double>(n);
  const ExpFamily& fam = p.family;

  // Gaussian curvature is identically 1; the quarter bound majorizes the
  // logistic curvature. Either way the weights are constant across outer
  // iterations, so the normal matrix is factorized exactly once.
  const bool const_weights = fam.family == Family::gaussian_identity ||
                             cfg.curvature == Curvature::quarter_bound;
  const double const_w = fam.family == Family::gaussian_identity ? 1.0 : 0.25;

  RidgeSystem system(gd->x, cfg);
  if (const_weights) system.set_weights(Vector::Constant(n, const_w));

  FitResult res;
  res.lambda_effective = cfg.lambda;
  Matrix best = Matrix::Zero(p.d1, p.d2);
  double best_obj = objective_value(p, best, cfg.lambda);
  Matrix theta_bar = best;
  long cg_iters = 0;
  const double tau = 2.0 * cfg.lambda / cfg.beta;

  for (int k = 1; k <= cfg.max_outer; ++k) {
    // Local quadratic model at theta_bar: curvature weights + residuals.
    Vector eta = gd->x * theta_bar.reshaped();
    Vector resid(n);
    for (Index i = 0; i < n; ++i) resid(i) = gd->y(i) - fam.b_prime(eta(i));
    if (!const_weights) {
      Vector w(n);
      for (Index i = 0; i < n; ++i)
        w(i) = std::max(fam.b_double_prime(eta(i)), cfg.weight_floor);
      system.set_weights(w);
    }
    const Vector rhs_const = (2.0 * n_inv) * (gd->x.transpose() * resid);
    const Vector tb = theta_bar.reshaped();

    // Peaceman-Rachford splitting on
    //   (1/n) ||Y~ - X~ vec(T)||^2 + 2 lambda ||T_y||_N,  T_x - T_y = -theta_bar:
    // ridge solve, half dual step, singular-value soft threshold at
    // 2*lambda/beta, full dual step. Fresh primal/dual start per outer pass.
    Vector tx = Vector::Zero(pdim), ty = tx, rho = tx;
    bool inner_converged = false;
    for (int l = 0; l < cfg.max_inner; ++l) {
      const Vector rhs = cfg.beta * (ty - tb) + rho + rhs_const;
      system.solve(rhs, tx, cg_iters);
      const Vector rho_half = rho - cfg.alpha * cfg.beta * (tx - ty + tb);
      const Matrix arg = (tx + tb - rho_half / cfg.beta).reshaped(p.d1, p.d2);
      const Matrix thresholded = soft_threshold_sv(arg, tau);
      const Vector ty_new = thresholded.reshaped();
      rho = rho_half - cfg.alpha * cfg.beta * (tx - ty_new + tb);
      const double rel = (ty_new - ty).norm() / std::max(1.0, ty.norm());
      ty = ty_new;
      ++res.inner_iters_total;
      if (rel < cfg.inner_tol) {
        inner_converged = true;
        break;
      }
    }

    Matrix theta_new = ty.reshaped(p.d1, p.d2);
    const double obj = objective_value(p, theta_new, cfg.lambda);
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
                                   cfg.lambda * norms(res.theta_hat).nuclear);
  return res;
}

}  // namespace tracereg
