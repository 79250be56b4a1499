#include <doctest.h>

#include <cmath>

#include "oracle_helpers.hpp"
#include "tracereg/matcore.hpp"
#include "tracereg/rng.hpp"

using namespace tracereg;
using tracereg::testing::random_matrix;

TEST_CASE("svd reconstructs, orders, and fixes signs") {
  Rng rng(11);
  for (int c = 0; c < 20; ++c) {
    const Index rows = 2 + Index(rng.uniform_int(6));
    const Index cols = 2 + Index(rng.uniform_int(6));
    const Matrix a = random_matrix(rows, cols, rng);
    const SvdFactors f = svd(a);
    const Index k = std::min(rows, cols);
    REQUIRE(f.u.cols() == k);
    REQUIRE(f.v.cols() == k);
    CHECK((f.u * f.s.asDiagonal() * f.v.transpose() - a).norm() <= 1e-12 * a.norm());
    CHECK((f.u.transpose() * f.u - Matrix::Identity(k, k)).norm() <= 1e-12);
    CHECK((f.v.transpose() * f.v - Matrix::Identity(k, k)).norm() <= 1e-12);
    for (Index j = 0; j + 1 < k; ++j) CHECK(f.s(j) >= f.s(j + 1));
    CHECK(f.s(k - 1) >= 0.0);
    for (Index j = 0; j < k; ++j) {
      Index arg = 0;
      f.u.col(j).cwiseAbs().maxCoeff(&arg);
      CHECK(f.u(arg, j) >= 0.0);
    }
  }
}

TEST_CASE("svd is deterministic") {
  Rng rng(12);
  const Matrix a = random_matrix(5, 3, rng);
  const SvdFactors f1 = svd(a), f2 = svd(a);
  CHECK(f1.u == f2.u);
  CHECK(f1.s == f2.s);
  CHECK(f1.v == f2.v);
}

TEST_CASE("norms agree with definitions") {
  Rng rng(13);
  const Matrix a = random_matrix(4, 6, rng);
  const MatrixNorms nm = norms(a);
  const SvdFactors f = svd(a);
  CHECK(nm.frobenius == doctest::Approx(a.norm()).epsilon(1e-12));
  CHECK(nm.operator_norm == doctest::Approx(f.s(0)).epsilon(1e-12));
  CHECK(nm.nuclear == doctest::Approx(f.s.sum()).epsilon(1e-12));
  CHECK(nm.elementwise_max == doctest::Approx(a.cwiseAbs().maxCoeff()));
  // Frobenius = sqrt(sum s_j^2) ties the three spectral quantities together.
  CHECK(nm.frobenius == doctest::Approx(std::sqrt(f.s.squaredNorm())).epsilon(1e-12));
}

TEST_CASE("numerical rank and Schatten measure") {
  Matrix a = Matrix::Zero(5, 5);
  a(0, 0) = 3.0;
  a(1, 1) = 1e-3;
  a(2, 2) = 1e-14;  // below 1e-10 * 3
  CHECK(numerical_rank(a) == 2);
  CHECK(schatten_q_measure(a, 0.0) == doctest::Approx(2.0));
  // q in (0,1): sum of s^q over all nonzero singular values
  const double q = 0.5;
  CHECK(schatten_q_measure(a, q) ==
        doctest::Approx(std::pow(3.0, q) + std::pow(1e-3, q) + std::pow(1e-14, q)));
  CHECK(numerical_rank(Matrix::Zero(3, 3)) == 0);
  CHECK(schatten_q_measure(Matrix::Zero(3, 3), 0.0) == 0.0);
}

TEST_CASE("soft threshold matches the closed form on diagonal matrices") {
  // Independent oracle: for A = diag(a_i), prox of tau*||.||_N is
  // diag(sign(a_i) * max(|a_i| - tau, 0)).
  Matrix a = Matrix::Zero(4, 4);
  a.diagonal() << 3.0, -2.0, 0.5, -0.1;
  const Matrix p = soft_threshold_sv(a, 1.0);
  Matrix want = Matrix::Zero(4, 4);
  want.diagonal() << 2.0, -1.0, 0.0, 0.0;
  CHECK((p - want).norm() <= 1e-12);
}

TEST_CASE("soft threshold satisfies the prox certificate") {
  // h(P) = 0.5||P - A||_F^2 + tau ||P||_N is minimized at P = prox(A):
  // every perturbation must not lower h (convexity makes local = global).
  Rng rng(14);
  auto h = [](const Matrix& p, const Matrix& a, double tau) {
    return 0.5 * (p - a).squaredNorm() + tau * norms(p).nuclear;
  };
  for (int c = 0; c < 50; ++c) {
    const Index rows = 2 + Index(rng.uniform_int(4));
    const Index cols = 2 + Index(rng.uniform_int(4));
    const Matrix a = random_matrix(rows, cols, rng);
    const double tau = 0.1 + rng.uniform();
    const Matrix p = soft_threshold_sv(a, tau);
    const double hp = h(p, a, tau);
    for (int t = 0; t < 8; ++t) {
      const Matrix dir = random_matrix(rows, cols, rng);
      for (double eps : {1e-3, 1e-2, 0.1, 1.0})
        CHECK(h(p + eps * dir, a, tau) >= hp - 1e-10);
    }
  }
}

TEST_CASE("soft threshold is nonexpansive and handles edge cases") {
  Rng rng(15);
  for (int c = 0; c < 50; ++c) {
    const Matrix a = random_matrix(3, 4, rng);
    const Matrix b = random_matrix(3, 4, rng);
    const double tau = rng.uniform();
    CHECK((soft_threshold_sv(a, tau) - soft_threshold_sv(b, tau)).norm() <=
          (a - b).norm() + 1e-12);
  }
  const Matrix a = random_matrix(3, 3, rng);
  CHECK(soft_threshold_sv(a, 0.0) == a);             // tau = 0 is the identity
  CHECK(soft_threshold_sv(a, 1e6).isZero(0.0));      // huge tau kills everything
}

TEST_CASE("project_psd: symmetry, feasibility, idempotence, optimality") {
  Rng rng(16);
  for (int c = 0; c < 30; ++c) {
    const Matrix a = random_matrix(5, 5, rng);
    const Matrix p = project_psd(a);
    CHECK((p - p.transpose()).norm() <= 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(p);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
    CHECK((project_psd(p) - p).norm() <= 1e-10);
    // Variational inequality <A_sym - P, Z - P> <= 0 for PSD Z. (The
    // projection is in Frobenius geometry from the symmetric part.)
    const Matrix a_sym = 0.5 * (a + a.transpose());
    for (int t = 0; t < 6; ++t) {
      const Matrix g = random_matrix(5, 5, rng);
      const Matrix z = g * g.transpose();
      CHECK(((a_sym - p).array() * (z - p).array()).sum() <= 1e-8);
    }
  }
  // Closed form on a diagonal: negative entries clamp to zero.
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 2.0, -1.0, 0.0;
  Matrix want = Matrix::Zero(3, 3);
  want.diagonal() << 2.0, 0.0, 0.0;
  CHECK((project_psd(d) - want).norm() <= 1e-12);
}

TEST_CASE("clip_box clamps and is idempotent") {
  Matrix a(2, 2);
  a << -3.0, 0.2, 1.7, -0.9;
  const Matrix c = clip_box(a, 1.0);
  CHECK(c(0, 0) == -1.0);
  CHECK(c(0, 1) == 0.2);
  CHECK(c(1, 0) == 1.0);
  CHECK(c(1, 1) == -0.9);
  CHECK(clip_box(c, 1.0) == c);
  CHECK(c.cwiseAbs().maxCoeff() <= 1.0);
}
