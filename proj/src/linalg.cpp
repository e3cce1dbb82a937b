#include "domcheck/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace domcheck {
namespace {

// Singular values of a 2x2 matrix via the eigenvalues of M^T M. The larger
// value has no cancellation; the smaller one comes from |det| / sigma_max.
std::pair<double, double> singular_values_2x2(const Matrix& m) {
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return {0.0, 0.0};
  const double a = m(0, 0) / scale, b = m(0, 1) / scale;
  const double c = m(1, 0) / scale, d = m(1, 1) / scale;
  const double p = a * a + c * c;
  const double r = b * b + d * d;
  const double q = a * b + c * d;
  const double top = 0.5 * (p + r) + std::hypot(0.5 * (p - r), q);
  const double smax = std::sqrt(top);
  const double smin = std::abs(a * d - b * c) / smax;
  return {smax * scale, smin * scale};
}

}  // namespace

std::pair<double, double> extreme_singular_values(const Matrix& m) {
  if (m.size() == 0) return {0.0, 0.0};
  if (m.cols() == 1) {
    const double n = m.norm();
    return {n, n};
  }
  if (m.rows() == 1) {
    const double n = m.norm();
    return {n, n};
  }
  if (m.rows() == 2 && m.cols() == 2) return singular_values_2x2(m);
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  return {s(0), s(s.size() - 1)};
}

double operator_norm(const Matrix& m) { return extreme_singular_values(m).first; }

void apply_sign_convention(Matrix& basis) {
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    const double tol = 1e-12 * basis.col(j).cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < basis.rows(); ++i) {
      if (std::abs(basis(i, j)) > tol) {
        if (basis(i, j) < 0) basis.col(j) *= -1.0;
        break;
      }
    }
  }
}

Matrix orthonormal_columns(const Matrix& m) {
  Eigen::ColPivHouseholderQR<Matrix> qr(m);
  const Eigen::Index r = m.cols();
  Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), r);
  apply_sign_convention(q);
  return q;
}

double containment_defect(const Matrix& inner, const Matrix& outer) {
  const Matrix qi = orthonormal_columns(inner);
  const Matrix qo = orthonormal_columns(outer);
  const Matrix residual = qi - qo * (qo.transpose() * qi);
  return operator_norm(residual);
}

double subspace_distance(const Matrix& a, const Matrix& b) {
  return std::max(containment_defect(a, b), containment_defect(b, a));
}

std::size_t numerical_rank(const Matrix& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  if (s(0) == 0.0) return 0;
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) ++r;
  return r;
}

ScaledMatrix ScaledMatrix::identity(Eigen::Index d) {
  return from(Matrix::Identity(d, d));
}

ScaledMatrix ScaledMatrix::from(const Matrix& m) {
  ScaledMatrix s{m, 0.0};
  s.renormalize();
  return s;
}

void ScaledMatrix::renormalize() {
  const double n = unit.norm();
  if (n == 0.0 || !std::isfinite(n)) {
    if (n == 0.0) log_scale = -std::numeric_limits<double>::infinity();
    return;
  }
  unit /= n;
  log_scale += std::log(n);
}

void ScaledMatrix::left_multiply(const Matrix& a) {
  unit = a * unit;
  renormalize();
}

void ScaledMatrix::right_multiply(const Matrix& a) {
  unit = unit * a;
  renormalize();
}

double ScaledMatrix::log_norm() const {
  if (is_zero()) return -std::numeric_limits<double>::infinity();
  return log_scale + std::log(operator_norm(unit));
}

Matrix ScaledMatrix::materialize() const {
  if (is_zero()) return Matrix::Zero(unit.rows(), unit.cols());
  return std::exp(log_scale) * unit;
}

bool ScaledMatrix::is_zero() const {
  return log_scale == -std::numeric_limits<double>::infinity() || unit.isZero(0.0);
}

ScaledMatrix operator*(const ScaledMatrix& a, const ScaledMatrix& b) {
  ScaledMatrix out{a.unit * b.unit, a.log_scale + b.log_scale};
  out.renormalize();
  return out;
}

}  // namespace domcheck
