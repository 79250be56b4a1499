#include <doctest.h>

#include <cmath>

#include "oracle_helpers.hpp"
#include "tracereg/matcore.hpp"
#include "tracereg/rng.hpp"
#include "tracereg/solver_onebit.hpp"

using namespace tracereg;
namespace th = tracereg::testing;

namespace {

OneBitConfig tight_config(double lambda, double R) {
  OneBitConfig cfg;
  cfg.lambda = lambda;
  cfg.R = R;
  cfg.outer_tol = 1e-8;
  cfg.admm_tol = 1e-9;
  cfg.max_outer = 300;
  cfg.admm_max_iter = 20000;
  return cfg;
}

double singleton_scale(const Problem& p) {
  return std::get<SingletonDesign>(p.design).scale;
}

}  // namespace

TEST_CASE("solver matches the oracle when the box is slack") {
  Rng rng(51);
  for (const ExpFamily fam :
       {ExpFamily::bernoulli_logit(), ExpFamily::gaussian_identity()}) {
    for (int c = 0; c < 3; ++c) {
      const int d = 4;
      const int n = 160 + int(rng.uniform_int(80));
      const Problem p = th::random_singleton_problem(d, n, fam, rng);
      const double lambda = 0.01 + 0.02 * rng.uniform();
      const double R = 50.0;  // far outside any reachable entry
      const FitResult fit = fit_onebit(p, tight_config(lambda, R));
      const th::OracleResult oracle =
          th::prox_gradient_oracle(p, lambda, R / singleton_scale(p));
      REQUIRE(oracle.converged);
      CHECK(!oracle.box_active);
      CHECK(fit.converged);
      CHECK((fit.theta_hat - oracle.theta).norm() <=
            1e-3 * std::max(1.0, oracle.theta.norm()));
    }
  }
}

TEST_CASE("a binding box stays feasible and matches the constrained oracle") {
  Rng rng(52);
  const int d = 4, n = 240;
  const Problem p = th::random_singleton_problem(d, n, ExpFamily::bernoulli_logit(),
                                                 rng, /*signal=*/3.0);
  const double scale = singleton_scale(p);
  const double lambda = 0.005;
  // First find the unconstrained solution, then box it at 60% of its peak.
  const th::OracleResult free_fit = th::prox_gradient_oracle(p, lambda);
  REQUIRE(free_fit.converged);
  const double R = 0.6 * scale * free_fit.theta.cwiseAbs().maxCoeff();
  REQUIRE(R > 0.0);
  const th::OracleResult boxed = th::prox_gradient_oracle(p, lambda, R / scale);
  REQUIRE(boxed.converged);
  CHECK(boxed.box_active);
  const FitResult fit = fit_onebit(p, tight_config(lambda, R));
  CHECK(scale * fit.theta_hat.cwiseAbs().maxCoeff() <= R + 1e-9);
  CHECK((fit.theta_hat - boxed.theta).norm() <=
        2e-3 * std::max(1.0, boxed.theta.norm()));
}

TEST_CASE("oversized penalties yield the exact zero fit") {
  Rng rng(53);
  for (int c = 0; c < 3; ++c) {
    const Problem p =
        th::random_singleton_problem(4, 120, ExpFamily::bernoulli_logit(), rng);
    const double gnorm = norms(gradient(p, Matrix::Zero(4, 4))).operator_norm;
    OneBitConfig cfg;
    cfg.lambda = 1.01 * gnorm;
    cfg.R = 5.0;
    const FitResult fit = fit_onebit(p, cfg);
    CHECK(fit.theta_hat.norm() <= 1e-10);
    cfg.lambda = 0.3 * gnorm;
    CHECK(fit_onebit(p, cfg).theta_hat.norm() > 1e-6);
  }
}

TEST_CASE("objective accounting uses the user-scale penalty") {
  Rng rng(54);
  const Problem p = th::random_singleton_problem(4, 200,
                                                 ExpFamily::bernoulli_logit(), rng);
  const double lambda = 0.02;
  const FitResult fit = fit_onebit(p, tight_config(lambda, 20.0));
  CHECK(fit.lambda_effective == lambda);
  CHECK(fit.objective ==
        doctest::Approx(objective_value(p, fit.theta_hat, lambda)).epsilon(1e-12));
  CHECK(fit.objective <= objective_value(p, Matrix::Zero(4, 4), lambda) + 1e-12);
}

TEST_CASE("repeat fits are bit-identical") {
  Rng rng(55);
  const Problem p = th::random_singleton_problem(3, 90,
                                                 ExpFamily::gaussian_identity(), rng);
  OneBitConfig cfg;
  cfg.lambda = 0.03;
  cfg.R = 10.0;
  const FitResult a = fit_onebit(p, cfg);
  const FitResult b = fit_onebit(p, cfg);
  CHECK(a.theta_hat == b.theta_hat);
  CHECK(a.outer_iters == b.outer_iters);
}

TEST_CASE("config and design contracts are enforced") {
  Rng rng(56);
  const Problem p = th::random_singleton_problem(3, 60,
                                                 ExpFamily::bernoulli_logit(), rng);
  OneBitConfig bad;
  bad.lambda = 0.1;
  bad.R = 0.0;
  CHECK_THROWS_AS(fit_onebit(p, bad), InvalidInput);
  bad.R = 1.0;
  bad.rho = -0.1;
  CHECK_THROWS_AS(fit_onebit(p, bad), InvalidInput);
  bad.rho = 0.1;
  bad.gamma = 0.0;
  CHECK_THROWS_AS(fit_onebit(p, bad), InvalidInput);

  const Problem general =
      th::random_general_problem(3, 3, 30, ExpFamily::bernoulli_logit(), rng);
  OneBitConfig ok;
  ok.lambda = 0.1;
  CHECK_THROWS_AS(fit_onebit(general, ok), InvalidInput);
}

TEST_CASE("rating rules threshold at their documented boundaries") {
  Matrix fitted(2, 2);
  fitted << -0.3, 0.0, 0.5, 0.7;
  const Eigen::MatrixXi sign_pred = predict_ratings(fitted, RatingRule::glm_sign);
  CHECK(sign_pred(0, 0) == 0);
  CHECK(sign_pred(0, 1) == 1);  // boundary: >= 0 counts as a positive rating
  CHECK(sign_pred(1, 0) == 1);
  CHECK(sign_pred(1, 1) == 1);
  const Eigen::MatrixXi half_pred = predict_ratings(fitted, RatingRule::linear_half);
  CHECK(half_pred(0, 0) == 0);
  CHECK(half_pred(0, 1) == 0);
  CHECK(half_pred(1, 0) == 1);  // boundary: >= 1/2 counts as a positive rating
  CHECK(half_pred(1, 1) == 1);
}

TEST_CASE("rating accuracy counts matching entries") {
  Eigen::MatrixXi a(2, 2), b(2, 2);
  a << 1, 0, 1, 1;
  b << 1, 1, 0, 1;
  CHECK(rating_accuracy(a, b) == doctest::Approx(0.5));
  CHECK(rating_accuracy(a, a) == doctest::Approx(1.0));
}
