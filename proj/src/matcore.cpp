#include "tracereg/matcore.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

namespace tracereg {

SvdFactors svd(const Eigen::Ref<const Matrix>& a) {
  require(a.rows() > 0 && a.cols() > 0, "svd: empty matrix");
  require_finite(a, "svd input");
  Eigen::JacobiSVD<Matrix> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdFactors f{dec.matrixU(), dec.singularValues(), dec.matrixV()};
  // Sign convention: largest-|.| entry of each left singular vector >= 0.
  for (Index j = 0; j < f.u.cols(); ++j) {
    Index imax = 0;
    f.u.col(j).cwiseAbs().maxCoeff(&imax);
    if (f.u(imax, j) < 0.0) {
      f.u.col(j) = -f.u.col(j);
      f.v.col(j) = -f.v.col(j);
    }
  }
  return f;
}

MatrixNorms norms(const Eigen::Ref<const Matrix>& a) {
  require_finite(a, "norms input");
  MatrixNorms out;
  out.frobenius = a.norm();
  out.elementwise_max = a.cwiseAbs().maxCoeff();
  const Vector s = Eigen::JacobiSVD<Matrix>(a).singularValues();
  out.operator_norm = s.size() ? s(0) : 0.0;
  out.nuclear = s.sum();
  return out;
}

int numerical_rank(const Eigen::Ref<const Matrix>& a) {
  const Vector s = Eigen::JacobiSVD<Matrix>(a).singularValues();
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  const double cutoff = 1e-10 * s(0);
  int r = 0;
  for (Index j = 0; j < s.size(); ++j)
    if (s(j) > cutoff) ++r;
  return r;
}

double schatten_q_measure(const Eigen::Ref<const Matrix>& a, double q) {
  require(q >= 0.0 && q < 1.0, "schatten_q_measure: q must lie in [0, 1)");
  require_finite(a, "schatten_q_measure input");
  if (q == 0.0) return static_cast<double>(numerical_rank(a));
  const Vector s = Eigen::JacobiSVD<Matrix>(a).singularValues();
  double acc = 0.0;
  for (Index j = 0; j < s.size(); ++j)
    if (s(j) > 0.0) acc += std::pow(s(j), q);  // 0^q = 0
  return acc;
}

Matrix soft_threshold_sv(const Eigen::Ref<const Matrix>& a, double tau) {
  require(tau >= 0.0, "soft_threshold_sv: tau must be nonnegative");
  require_finite(a, "soft_threshold_sv input");
  if (tau == 0.0) return a;
  Eigen::JacobiSVD<Matrix> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector s = dec.singularValues();
  bool any = false;
  for (Index j = 0; j < s.size(); ++j) {
    s(j) = std::max(s(j) - tau, 0.0);
    any |= s(j) > 0.0;
  }
  if (!any) return Matrix::Zero(a.rows(), a.cols());
  return dec.matrixU() * s.asDiagonal() * dec.matrixV().transpose();
}

Matrix project_psd(const Eigen::Ref<const Matrix>& a) {
  require(a.rows() == a.cols(), "project_psd: matrix must be square");
  require_finite(a, "project_psd input");
  const Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) throw SolverError("project_psd: eigendecomposition failed");
  if (eig.eigenvalues().minCoeff() >= 0.0) return sym;
  const Vector lam = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
}

Matrix clip_box(const Eigen::Ref<const Matrix>& a, double bound) {
  require(bound >= 0.0, "clip_box: bound must be nonnegative");
  require_finite(a, "clip_box input");
  return a.cwiseMax(-bound).cwiseMin(bound);
}

}  // namespace tracereg
