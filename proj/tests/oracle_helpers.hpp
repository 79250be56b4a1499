// Independent oracles and test utilities. The solvers under test use
// operator splitting on local quadratic models; everything here goes through
// a different route (plain proximal gradient on the exact loss, finite
// differences, Dykstra for the constrained prox), so agreement is evidence,
// not tautology.
#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "tracereg/expfam.hpp"
#include "tracereg/matcore.hpp"
#include "tracereg/rng.hpp"
#include "tracereg/types.hpp"

namespace tracereg::testing {

/// Max curvature of the family's log-partition (logit: b'' <= 1/4).
inline double curvature_bound(const ExpFamily& fam) {
  return fam.family == Family::bernoulli_logit ? 0.25 : 1.0;
}

/// Lipschitz constant of the loss gradient via the stacked design:
/// L = b''_max * lambda_max(X^T X) / N.
inline double gradient_lipschitz(const Problem& p) {
  const Problem gp = expand_to_general(p);
  const auto& gd = std::get<GeneralDesign>(gp.design);
  Eigen::JacobiSVD<Matrix> svd(gd.x);
  const double smax = svd.singularValues()(0);
  return curvature_bound(p.family) * smax * smax / static_cast<double>(gp.n_terms());
}

/// Dykstra iteration for the proximal map of
///   tau * ||.||_N + indicator(max|.| <= bound)
/// at v. Exact for either piece alone; the loop handles the sum.
inline Matrix prox_nuclear_box(const Matrix& v, double tau, double bound) {
  if (!std::isfinite(bound)) return soft_threshold_sv(v, tau);
  Matrix x = v;
  Matrix p = Matrix::Zero(v.rows(), v.cols());
  Matrix q = Matrix::Zero(v.rows(), v.cols());
  for (int it = 0; it < 2000; ++it) {
    const Matrix y = soft_threshold_sv(x + p, tau);
    p = x + p - y;
    const Matrix x_new = clip_box(y + q, bound);
    q = y + q - x_new;
    const double change = (x_new - x).norm();
    x = x_new;
    if (change < 1e-14 * std::max(1.0, x.norm()) && (x - y).norm() < 1e-12) break;
  }
  return x;
}

struct OracleResult {
  Matrix theta;
  int iters = 0;
  bool converged = false;
  bool box_active = false;  // some |theta_ij| within 1e-8 of the bound
};

/// Proximal-gradient (ISTA) oracle for
///   min loss(p, theta) + lambda ||theta||_N   s.t. max|theta| <= bound,
/// fixed step 1/L, Dykstra prox when the box is finite. Linear convergence
/// on the well-conditioned tiny instances the tests use.
inline OracleResult prox_gradient_oracle(
    const Problem& p, double lambda,
    double bound = std::numeric_limits<double>::infinity(), int max_iter = 200000,
    double tol = 1e-13) {
  const double step = 1.0 / gradient_lipschitz(p);
  OracleResult r;
  r.theta = Matrix::Zero(p.d1, p.d2);
  for (int it = 0; it < max_iter; ++it) {
    const Matrix next =
        prox_nuclear_box(r.theta - step * gradient(p, r.theta), step * lambda, bound);
    const double change = (next - r.theta).norm();
    r.theta = next;
    r.iters = it + 1;
    if (change <= tol * std::max(1.0, r.theta.norm())) {
      r.converged = true;
      break;
    }
  }
  if (std::isfinite(bound))
    r.box_active = (r.theta.cwiseAbs().maxCoeff() > bound - 1e-8);
  return r;
}

/// Central-difference gradient of loss(p, .) at theta.
inline Matrix fd_gradient(const Problem& p, const Matrix& theta, double h = 1e-5) {
  Matrix g(theta.rows(), theta.cols());
  Matrix t = theta;
  for (Index j = 0; j < theta.cols(); ++j)
    for (Index i = 0; i < theta.rows(); ++i) {
      const double saved = t(i, j);
      t(i, j) = saved + h;
      const double up = loss(p, t);
      t(i, j) = saved - h;
      const double dn = loss(p, t);
      t(i, j) = saved;
      g(i, j) = (up - dn) / (2.0 * h);
    }
  return g;
}

/// Analytic Hessian-vector product assembled from curvature_weights of the
/// ORIGINAL problem and the stacked design of its expansion:
///   H[v] = (1/N) sum_t b''(eta_t) <V, X_t> X_t.
inline Matrix analytic_hvp(const Problem& p, const Matrix& theta, const Matrix& v) {
  const Vector w = curvature_weights(p, theta);
  const Problem gp = expand_to_general(p);
  const auto& gd = std::get<GeneralDesign>(gp.design);
  const Vector xv = gd.x * v.reshaped();
  const Vector wxv = w.cwiseProduct(xv);
  Vector out = gd.x.transpose() * wxv / static_cast<double>(gp.n_terms());
  return out.reshaped(p.d1, p.d2);
}

/// Central-difference HVP from the analytic gradient.
inline Matrix fd_hvp(const Problem& p, const Matrix& theta, const Matrix& v,
                     double h = 1e-5) {
  return (gradient(p, theta + h * v) - gradient(p, theta - h * v)) / (2.0 * h);
}

inline Matrix random_matrix(Index rows, Index cols, Rng& rng, double sd = 1.0) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = sd * rng.normal();
  return m;
}

/// Random low-ish-rank coefficient matrix with entries O(1).
inline Matrix random_target(Index d1, Index d2, Index rank, Rng& rng) {
  const Matrix a = random_matrix(d1, rank, rng, 1.0 / std::sqrt(double(rank)));
  const Matrix b = random_matrix(d2, rank, rng, 1.0);
  return a * b.transpose();
}

// --- tiny random problem factories for solver batteries ---------------------

inline Problem random_general_problem(int d1, int d2, int n, const ExpFamily& fam,
                                      Rng& rng, double signal = 1.0) {
  const Matrix theta_star = signal * random_target(d1, d2, std::min(d1, d2), rng);
  Matrix x = random_matrix(n, Index(d1) * d2, rng);
  const Vector eta = x * theta_star.reshaped();
  Vector y(n);
  for (int i = 0; i < n; ++i)
    y(i) = fam.family == Family::bernoulli_logit
               ? double(rng.bernoulli(fam.b_prime(eta(i))))
               : eta(i) + rng.normal();
  return make_general_problem(std::move(x), std::move(y), d1, d2, fam);
}

inline Problem random_rrr_problem(int d, int n, const ExpFamily& fam, Rng& rng,
                                  double signal = 1.0) {
  const Matrix theta_star = signal * random_target(d, d, std::max<Index>(1, d / 2), rng);
  const Matrix x = random_matrix(n, d, rng);
  const Matrix eta = x * theta_star.transpose();
  Matrix y(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j)
      y(i, j) = fam.family == Family::bernoulli_logit
                    ? double(rng.bernoulli(fam.b_prime(eta(i, j))))
                    : eta(i, j) + rng.normal();
  return make_rrr_problem(x, std::move(y), fam);
}

inline Problem random_singleton_problem(int d, int n, const ExpFamily& fam, Rng& rng,
                                        double signal = 1.0) {
  const Matrix theta_star = (signal / d) * random_target(d, d, std::min(d, 3), rng);
  const double scale = d;
  std::vector<int> rows(n), cols(n);
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    rows[i] = int(rng.uniform_int(d));
    cols[i] = int(rng.uniform_int(d));
    const double eta = scale * theta_star(rows[i], cols[i]);
    y(i) = fam.family == Family::bernoulli_logit ? double(rng.bernoulli(fam.b_prime(eta)))
                                                 : eta + rng.normal();
  }
  return make_singleton_problem(std::move(rows), std::move(cols), std::move(y), d, d,
                                scale, fam);
}

// --- subprocess harness for CLI tests ---------------------------------------

struct CmdResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Runs the CLI with `args` (shell-quoted by the caller where needed),
/// capturing stdout/stderr. `env_prefix` may hold e.g. "TRACEREG_SEED=7 ".
inline CmdResult run_cli(const std::string& args, const std::string& work_dir,
                         const std::string& env_prefix = "") {
  const std::string out_path = work_dir + "/cmd_out.txt";
  const std::string err_path = work_dir + "/cmd_err.txt";
  const std::string cmd = env_prefix + std::string(TRACEREG_CLI_PATH) + " " + args +
                          " > " + out_path + " 2> " + err_path;
  const int status = std::system(cmd.c_str());
  CmdResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

/// Fresh scratch directory under the system temp root.
inline std::string fresh_dir(const std::string& tag) {
  static int counter = 0;
  const std::string path =
      "/tmp/tracereg_tests/" + tag + "_" + std::to_string(counter++);
  std::filesystem::create_directories(path);
  return path;
}

}  // namespace tracereg::testing
