#include <doctest.h>

#include <cmath>

#include "oracle_helpers.hpp"
#include "tracereg/matcore.hpp"
#include "tracereg/rng.hpp"
#include "tracereg/solver_glm_trace.hpp"

using namespace tracereg;
namespace th = tracereg::testing;

namespace {

SolverConfig tight_config(double lambda) {
  SolverConfig cfg;
  cfg.lambda = lambda;
  cfg.outer_tol = 1e-9;
  cfg.inner_tol = 1e-11;
  cfg.max_outer = 400;
  cfg.max_inner = 4000;
  return cfg;
}

}  // namespace

TEST_CASE("solver agrees with an independent proximal-gradient oracle") {
  Rng rng(31);
  for (const ExpFamily fam :
       {ExpFamily::bernoulli_logit(), ExpFamily::gaussian_identity()}) {
    for (int c = 0; c < 6; ++c) {
      const int d1 = 2 + int(rng.uniform_int(2));
      const int d2 = 2 + int(rng.uniform_int(2));
      const int n = 80 + int(rng.uniform_int(120));
      const Problem p = th::random_general_problem(d1, d2, n, fam, rng);
      const double lambda = 0.05 + 0.1 * rng.uniform();
      const FitResult fit = fit_glm_trace(p, tight_config(lambda));
      const th::OracleResult oracle = th::prox_gradient_oracle(p, lambda);
      REQUIRE(oracle.converged);
      CHECK(fit.converged);
      CHECK((fit.theta_hat - oracle.theta).norm() <= 1e-6 * std::max(1.0, oracle.theta.norm()));
      // Objectives agree even more tightly than iterates.
      CHECK(objective_value(p, fit.theta_hat, lambda) <=
            objective_value(p, oracle.theta, lambda) + 1e-10);
    }
  }
}

TEST_CASE("constant-curvature majorization reaches the same minimizer") {
  Rng rng(32);
  const Problem p = th::random_general_problem(3, 3, 150, ExpFamily::bernoulli_logit(), rng);
  SolverConfig a = tight_config(0.08);
  SolverConfig b = a;
  b.curvature = Curvature::quarter_bound;
  const FitResult fa = fit_glm_trace(p, a);
  const FitResult fb = fit_glm_trace(p, b);
  CHECK(fa.converged);
  CHECK(fb.converged);
  // Same convex objective, same fixed point; only the path differs.
  CHECK((fa.theta_hat - fb.theta_hat).norm() <= 1e-6);
}

TEST_CASE("penalty at the gradient norm forces the exact zero solution") {
  Rng rng(33);
  for (int c = 0; c < 5; ++c) {
    const Problem p = th::random_general_problem(3, 4, 100,
                                                 ExpFamily::bernoulli_logit(), rng);
    const double gnorm = norms(gradient(p, Matrix::Zero(3, 4))).operator_norm;
    SolverConfig cfg;
    cfg.lambda = 1.01 * gnorm;
    const FitResult fit = fit_glm_trace(p, cfg);
    CHECK(fit.theta_hat.norm() <= 1e-10);
    CHECK(fit.converged);
    // Just below the threshold the estimate must move off zero.
    cfg.lambda = 0.5 * gnorm;
    CHECK(fit_glm_trace(p, cfg).theta_hat.norm() > 1e-6);
  }
}

TEST_CASE("reported diagnostics certify stationarity") {
  Rng rng(34);
  const Problem p = th::random_general_problem(3, 3, 200,
                                               ExpFamily::bernoulli_logit(), rng);
  const double lambda = 0.05;
  const FitResult fit = fit_glm_trace(p, tight_config(lambda));
  REQUIRE(fit.converged);
  CHECK(fit.lambda_effective == lambda);
  // Subgradient optimality: ||grad||_op <= lambda and <grad, theta> close to
  // -lambda * ||theta||_N at the minimizer.
  CHECK(fit.kkt_operator_norm <= lambda * (1.0 + 1e-4));
  CHECK(fit.kkt_alignment_gap <=
        1e-4 * (1.0 + lambda * norms(fit.theta_hat).nuclear));
  // The reported objective is the value at theta_hat, and it beats zero.
  CHECK(fit.objective ==
        doctest::Approx(objective_value(p, fit.theta_hat, lambda)).epsilon(1e-12));
  CHECK(fit.objective <= objective_value(p, Matrix::Zero(3, 3), lambda) + 1e-12);
  CHECK(fit.outer_iters >= 1);
  CHECK(fit.inner_iters_total >= fit.outer_iters);
}

TEST_CASE("iterative and direct normal-equation paths coincide") {
  Rng rng(35);
  const Problem p = th::random_general_problem(3, 4, 120,
                                               ExpFamily::bernoulli_logit(), rng);
  SolverConfig direct = tight_config(0.06);
  SolverConfig iterative = direct;
  iterative.dense_normal_max_dim = 0;  // force the conjugate-gradient path
  const FitResult fd = fit_glm_trace(p, direct);
  const FitResult fi = fit_glm_trace(p, iterative);
  CHECK(fd.converged);
  CHECK(fi.converged);
  CHECK((fd.theta_hat - fi.theta_hat).norm() <= 1e-6);
}

TEST_CASE("repeat fits are bit-identical") {
  Rng rng(36);
  const Problem p = th::random_general_problem(2, 3, 90,
                                               ExpFamily::gaussian_identity(), rng);
  const SolverConfig cfg = tight_config(0.1);
  const FitResult a = fit_glm_trace(p, cfg);
  const FitResult b = fit_glm_trace(p, cfg);
  CHECK(a.theta_hat == b.theta_hat);
  CHECK(a.objective == b.objective);
  CHECK(a.outer_iters == b.outer_iters);
  CHECK(a.inner_iters_total == b.inner_iters_total);
}

TEST_CASE("config and design contracts are enforced") {
  Rng rng(37);
  const Problem rrr = th::random_rrr_problem(3, 20, ExpFamily::bernoulli_logit(), rng);
  SolverConfig cfg;
  cfg.lambda = 0.1;
  CHECK_THROWS_AS(fit_glm_trace(rrr, cfg), InvalidInput);

  const Problem p = th::random_general_problem(2, 2, 50,
                                               ExpFamily::bernoulli_logit(), rng);
  SolverConfig bad = cfg;
  bad.lambda = 0.0;
  CHECK_THROWS_AS(fit_glm_trace(p, bad), InvalidInput);
  bad = cfg;
  bad.alpha = 1.5;  // relaxation must stay in (0, 1]
  CHECK_THROWS_AS(fit_glm_trace(p, bad), InvalidInput);
  bad = cfg;
  bad.beta = -1.0;
  CHECK_THROWS_AS(fit_glm_trace(p, bad), InvalidInput);
  bad = cfg;
  bad.max_outer = 0;
  CHECK_THROWS_AS(fit_glm_trace(p, bad), InvalidInput);
}
