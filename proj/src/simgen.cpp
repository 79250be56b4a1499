#include "tracereg/simgen.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>

#include "tracereg/matcore.hpp"

namespace tracereg {

namespace {

Matrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

/// Haar-distributed orthonormal frame: thin Q of an iid normal matrix with
/// the R-diagonal sign fix (makes the factorization unique and Q uniform).
Matrix haar_frame(Index dim, Index rank, Rng& rng) {
  const Matrix g = gaussian_matrix(dim, rank, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, rank);
  const Matrix r = qr.matrixQR().topRows(rank).triangularView<Eigen::Upper>();
  for (Index j = 0; j < rank; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

}  // namespace

TrueModel gen_theta_star(int d1, int d2, int rank, ThetaKind kind, std::uint64_t seed) {
  require(d1 > 0 && d2 > 0, "dimensions must be positive");
  require(rank > 0 && rank <= std::min(d1, d2), "rank must lie in [1, min(d1, d2)]");
  Rng rng(seed);
  TrueModel tm;
  tm.rank = rank;
  switch (kind) {
    case ThetaKind::unit_singular_values:
    case ThetaKind::unit_frobenius: {
      const Matrix u = haar_frame(d1, rank, rng);
      const Matrix v = haar_frame(d2, rank, rng);
      tm.theta_star = u * v.transpose();
      if (kind == ThetaKind::unit_frobenius)
        tm.theta_star /= std::sqrt(static_cast<double>(rank));
      break;
    }
    case ThetaKind::eigenspace_of_sample_cov: {
      require(d1 == d2, "eigenspace construction needs a square matrix");
      Matrix second_moment = Matrix::Zero(d1, d1);
      constexpr int kDraws = 100;
      for (int t = 0; t < kDraws; ++t) {
        const Matrix v = gaussian_matrix(d1, 1, rng);
        second_moment.selfadjointView<Eigen::Lower>().rankUpdate(v);
      }
      second_moment.triangularView<Eigen::StrictlyUpper>() =
          second_moment.transpose();
      second_moment /= static_cast<double>(kDraws);
      Eigen::SelfAdjointEigenSolver<Matrix> eig(second_moment);
      // eigenvalues ascend; the top-rank eigenvectors are the last columns
      const Matrix top = eig.eigenvectors().rightCols(rank);
      tm.theta_star = top * top.transpose();
      break;
    }
  }
  tm.q = 0.0;
  tm.rho_bq = schatten_q_measure(tm.theta_star, tm.q);
  return tm;
}

Problem gen_matrix_regression(const TrueModel& tm, int n, std::uint64_t seed) {
  require(n > 0, "n must be positive");
  const Index d1 = tm.theta_star.rows(), d2 = tm.theta_star.cols();
  Rng rng(seed);
  Matrix x(n, d1 * d2);
  for (Index i = 0; i < n; ++i)
    for (Index t = 0; t < d1 * d2; ++t) x(i, t) = rng.normal();
  const Vector eta = x * tm.theta_star.reshaped();
  const ExpFamily fam = ExpFamily::bernoulli_logit();
  Vector y(n);
  for (Index i = 0; i < n; ++i) y(i) = rng.bernoulli(fam.b_prime(eta(i)));
  return make_general_problem(std::move(x), std::move(y), static_cast<int>(d1),
                              static_cast<int>(d2), fam);
}

Problem gen_rrr(const TrueModel& tm, int n, std::uint64_t seed) {
  require(n > 0, "n must be positive");
  const Index d_resp = tm.theta_star.rows(), d_cov = tm.theta_star.cols();
  Rng rng(seed);
  const Matrix x = gaussian_matrix(n, d_cov, rng);
  const Matrix eta = x * tm.theta_star.transpose();  // n x d_resp
  const ExpFamily fam = ExpFamily::bernoulli_logit();
  Matrix y(n, d_resp);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d_resp; ++j) y(i, j) = rng.bernoulli(fam.b_prime(eta(i, j)));
  return make_rrr_problem(x, std::move(y), fam);
}

OneBitData gen_onebit(const TrueModel& tm, int n, double r_mult, double lambda_c,
                      std::uint64_t seed) {
  require(n > 0, "n must be positive");
  require(r_mult > 0.0 && lambda_c > 0.0, "r_mult and lambda_c must be positive");
  const Index d1 = tm.theta_star.rows(), d2 = tm.theta_star.cols();
  const double scale = std::sqrt(static_cast<double>(d1) * static_cast<double>(d2));
  Rng rng(seed);
  std::vector<int> rows(n), cols(n);
  for (int i = 0; i < n; ++i) {
    rows[i] = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(d1)));
    cols[i] = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(d2)));
  }
  const ExpFamily fam = ExpFamily::bernoulli_logit();
  Vector y(n);
  for (int i = 0; i < n; ++i)
    y(i) = rng.bernoulli(fam.b_prime(scale * tm.theta_star(rows[i], cols[i])));
  OneBitData out{make_singleton_problem(std::move(rows), std::move(cols), std::move(y),
                                        static_cast<int>(d1), static_cast<int>(d2),
                                        scale, fam),
                 OneBitConfig{}};
  out.config.R = r_mult * scale * tm.theta_star.cwiseAbs().maxCoeff();
  const double d = static_cast<double>(std::max(d1, d2));
  out.config.lambda = lambda_c * std::sqrt(d * std::log(d) / static_cast<double>(n));
  return out;
}

Eigen::MatrixXi gen_rating_matrix(const TrueModel& tm, std::uint64_t seed) {
  Rng rng(seed);
  const ExpFamily fam = ExpFamily::bernoulli_logit();
  Eigen::MatrixXi t(tm.theta_star.rows(), tm.theta_star.cols());
  for (Index i = 0; i < t.rows(); ++i)
    for (Index j = 0; j < t.cols(); ++j)
      t(i, j) = rng.bernoulli(fam.b_prime(tm.theta_star(i, j)));
  return t;
}

}  // namespace tracereg
