#include "tracereg/expfam.hpp"

#include <cmath>

namespace tracereg {

double ExpFamily::b(double eta) const {
  switch (family) {
    case Family::bernoulli_logit:
      // log(1 + e^eta), safe for |eta| up to the double range
      return std::max(eta, 0.0) + std::log1p(std::exp(-std::abs(eta)));
    case Family::gaussian_identity:
      return 0.5 * eta * eta;
  }
  throw InvalidInput("unknown family");
}

double ExpFamily::b_prime(double eta) const {
  switch (family) {
    case Family::bernoulli_logit: {
      if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
      const double e = std::exp(eta);
      return e / (1.0 + e);
    }
    case Family::gaussian_identity:
      return eta;
  }
  throw InvalidInput("unknown family");
}

double ExpFamily::b_double_prime(double eta) const {
  switch (family) {
    case Family::bernoulli_logit: {
      const double m = b_prime(eta);
      return m * (1.0 - m);
    }
    case Family::gaussian_identity:
      return 1.0;
  }
  throw InvalidInput("unknown family");
}

int Problem::n_samples() const {
  if (const auto* g = std::get_if<GeneralDesign>(&design)) return static_cast<int>(g->x.rows());
  if (const auto* r = std::get_if<RrrDesign>(&design)) return static_cast<int>(r->x.rows());
  return static_cast<int>(std::get<SingletonDesign>(design).y.size());
}

int Problem::n_terms() const {
  if (std::holds_alternative<RrrDesign>(design)) return n_samples() * d1;
  return n_samples();
}

namespace {

void validate_responses(const ExpFamily& fam, const Eigen::Ref<const Matrix>& y) {
  require_finite(y, "responses");
  if (fam.family == Family::bernoulli_logit) {
    for (Index i = 0; i < y.rows(); ++i)
      for (Index j = 0; j < y.cols(); ++j)
        require(y(i, j) == 0.0 || y(i, j) == 1.0,
                "bernoulli_logit responses must be coded {0, 1}");
  }
}

}  // namespace

void validate(const Problem& p) {
  require(p.d1 > 0 && p.d2 > 0, "coefficient dimensions must be positive");
  if (const auto* g = std::get_if<GeneralDesign>(&p.design)) {
    require(g->x.rows() > 0, "empty design");
    require(g->x.cols() == static_cast<Index>(p.d1) * p.d2,
            "general design row length must equal d1*d2");
    require(g->y.size() == g->x.rows(), "response count must match design rows");
    require_finite(g->x, "design");
    validate_responses(p.family, g->y);
  } else if (const auto* r = std::get_if<RrrDesign>(&p.design)) {
    require(r->x.rows() > 0, "empty design");
    require(r->x.cols() == p.d2, "rrr covariate length must equal d2");
    require(r->y.rows() == r->x.rows(), "rrr response rows must match samples");
    require(r->y.cols() == p.d1, "rrr response count must equal d1");
    require_finite(r->x, "design");
    validate_responses(p.family, r->y);
  } else {
    const auto& s = std::get<SingletonDesign>(p.design);
    const auto n = static_cast<Index>(s.row_idx.size());
    require(n > 0, "empty design");
    require(static_cast<Index>(s.col_idx.size()) == n && s.y.size() == n,
            "singleton index/response lengths must agree");
    require(s.scale > 0.0 && std::isfinite(s.scale), "singleton scale must be positive");
    for (Index i = 0; i < n; ++i) {
      require(s.row_idx[i] >= 0 && s.row_idx[i] < p.d1 &&
              s.col_idx[i] >= 0 && s.col_idx[i] < p.d2,
              "singleton cell index out of range at observation " + std::to_string(i));
    }
    validate_responses(p.family, s.y);
  }
}

Problem make_general_problem(Matrix x, Vector y, int d1, int d2, ExpFamily fam) {
  Problem p{d1, d2, fam, GeneralDesign{std::move(x), std::move(y)}};
  validate(p);
  return p;
}

Problem make_rrr_problem(Matrix x, Matrix y, ExpFamily fam) {
  // Coefficient matrix is d1 x d2 = (#responses) x (#covariates).
  Problem p{static_cast<int>(y.cols()), static_cast<int>(x.cols()), fam,
            RrrDesign{std::move(x), std::move(y)}};
  validate(p);
  return p;
}

Problem make_singleton_problem(std::vector<int> row_idx, std::vector<int> col_idx,
                               Vector y, int d1, int d2, double scale, ExpFamily fam) {
  Problem p{d1, d2, fam,
            SingletonDesign{std::move(row_idx), std::move(col_idx), std::move(y), scale}};
  validate(p);
  return p;
}

Vector linear_predictors(const Problem& p, const Eigen::Ref<const Matrix>& theta) {
  require(theta.rows() == p.d1 && theta.cols() == p.d2, "theta has wrong dimensions");
  require_finite(theta, "theta");
  if (const auto* g = std::get_if<GeneralDesign>(&p.design)) {
    return g->x * theta.reshaped();  // column-major vec, matches row layout
  }
  if (const auto* r = std::get_if<RrrDesign>(&p.design)) {
    // eta(i, j) = theta_j . x_i; flatten sample-major (t = i*d2 + j), where
    // j runs over responses (rows of theta).
    const Matrix eta = r->x * theta.transpose();  // n x d1
    Vector out(eta.size());
    Index t = 0;
    for (Index i = 0; i < eta.rows(); ++i)
      for (Index j = 0; j < eta.cols(); ++j) out(t++) = eta(i, j);
    return out;
  }
  const auto& s = std::get<SingletonDesign>(p.design);
  const auto n = static_cast<Index>(s.row_idx.size());
  Vector out(n);
  for (Index i = 0; i < n; ++i) out(i) = s.scale * theta(s.row_idx[i], s.col_idx[i]);
  return out;
}

double loss(const Problem& p, const Eigen::Ref<const Matrix>& theta) {
  const Vector eta = linear_predictors(p, theta);
  Vector y(eta.size());
  if (const auto* g = std::get_if<GeneralDesign>(&p.design)) {
    y = g->y;
  } else if (const auto* r = std::get_if<RrrDesign>(&p.design)) {
    Index t = 0;
    for (Index i = 0; i < r->y.rows(); ++i)
      for (Index j = 0; j < r->y.cols(); ++j) y(t++) = r->y(i, j);
  } else {
    y = std::get<SingletonDesign>(p.design).y;
  }
  double acc = 0.0;
  for (Index t = 0; t < eta.size(); ++t) acc += p.family.b(eta(t)) - y(t) * eta(t);
  return acc / static_cast<double>(eta.size());
}

Matrix gradient(const Problem& p, const Eigen::Ref<const Matrix>& theta) {
  const Vector eta = linear_predictors(p, theta);
  const double n_inv = 1.0 / static_cast<double>(eta.size());
  if (const auto* g = std::get_if<GeneralDesign>(&p.design)) {
    Vector resid(eta.size());
    for (Index t = 0; t < eta.size(); ++t) resid(t) = p.family.b_prime(eta(t)) - g->y(t);
    Vector vec_grad = g->x.transpose() * resid * n_inv;
    return vec_grad.reshaped(p.d1, p.d2);
  }
  if (const auto* r = std::get_if<RrrDesign>(&p.design)) {
    // grad(j, b) = (1/N) sum_i [b'(eta_ij) - y_ij] x_ib  =  (1/N) (Z^T X)(j, b)
    Matrix z(r->y.rows(), r->y.cols());
    Index t = 0;
    for (Index i = 0; i < z.rows(); ++i)
      for (Index j = 0; j < z.cols(); ++j) z(i, j) = p.family.b_prime(eta(t++)) - r->y(i, j);
    return n_inv * (z.transpose() * r->x);
  }
  const auto& s = std::get<SingletonDesign>(p.design);
  Matrix grad = Matrix::Zero(p.d1, p.d2);
  for (Index i = 0; i < eta.size(); ++i)
    grad(s.row_idx[i], s.col_idx[i]) += (p.family.b_prime(eta(i)) - s.y(i)) * s.scale;
  return grad * n_inv;
}

Vector curvature_weights(const Problem& p, const Eigen::Ref<const Matrix>& theta) {
  Vector eta = linear_predictors(p, theta);
  for (Index t = 0; t < eta.size(); ++t) eta(t) = p.family.b_double_prime(eta(t));
  return eta;
}

Problem expand_to_general(const Problem& p) {
  validate(p);
  if (std::holds_alternative<GeneralDesign>(p.design)) return p;
  const Index pdim = static_cast<Index>(p.d1) * p.d2;
  if (const auto* r = std::get_if<RrrDesign>(&p.design)) {
    const Index n = r->x.rows();
    Matrix x = Matrix::Zero(n * p.d1, pdim);
    Vector y(n * p.d1);
    Index t = 0;
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < p.d1; ++j) {
        // vec(e_j x_i^T) has x_i(b) at column-major position b*d1 + j
        for (Index b = 0; b < p.d2; ++b) x(t, b * p.d1 + j) = r->x(i, b);
        y(t) = r->y(i, j);
        ++t;
      }
    }
    return make_general_problem(std::move(x), std::move(y), p.d1, p.d2, p.family);
  }
  const auto& s = std::get<SingletonDesign>(p.design);
  const auto n = static_cast<Index>(s.row_idx.size());
  Matrix x = Matrix::Zero(n, pdim);
  for (Index i = 0; i < n; ++i)
    x(i, static_cast<Index>(s.col_idx[i]) * p.d1 + s.row_idx[i]) = s.scale;
  return make_general_problem(std::move(x), s.y, p.d1, p.d2, p.family);
}

double lambda_default(const Problem& p, double c) {
  require(c > 0.0 && std::isfinite(c), "lambda constant must be positive");
  const double n = static_cast<double>(p.n_samples());
  const double d = static_cast<double>(std::max(p.d1, p.d2));
  if (std::holds_alternative<GeneralDesign>(p.design)) return c * std::sqrt(d / n);
  return c * std::sqrt(d * std::log(d) / n);
}

}  // namespace tracereg
