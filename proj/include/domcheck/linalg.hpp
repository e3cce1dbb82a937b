#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <utility>

namespace domcheck {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Largest singular value (Euclidean-induced operator norm).
/// Closed form for vectors and 2x2 matrices, Jacobi SVD otherwise.
double operator_norm(const Matrix& m);

/// Largest and smallest singular value among the min(rows, cols) values.
std::pair<double, double> extreme_singular_values(const Matrix& m);

/// Orthonormal basis of the column span, with the sign convention applied.
Matrix orthonormal_columns(const Matrix& m);

/// Flips each column so that its first non-negligible component is positive.
void apply_sign_convention(Matrix& basis);

/// Sine of the largest principal angle between the spans of two bases with
/// the same column count (0 when the spans agree).
double subspace_distance(const Matrix& a, const Matrix& b);

/// Sine of the largest angle between span(inner) and its projection on
/// span(outer); zero iff span(inner) lies in span(outer).
double containment_defect(const Matrix& inner, const Matrix& outer);

/// Numerical rank with relative tolerance on the singular values.
std::size_t numerical_rank(const Matrix& m, double rel_tol = 1e-10);

/// Matrix stored as exp(log_scale) * unit with unit of Frobenius norm 1.
/// Long cocycle products stay in range; norms are consumed in log form.
struct ScaledMatrix {
  Matrix unit;
  double log_scale = 0.0;

  static ScaledMatrix identity(Eigen::Index d);
  static ScaledMatrix from(const Matrix& m);

  /// this <- a * this
  void left_multiply(const Matrix& a);
  /// this <- this * a
  void right_multiply(const Matrix& a);
  void renormalize();

  double log_norm() const;
  /// exp(log_scale) * unit; overflows for very long windows.
  Matrix materialize() const;
  bool is_zero() const;
};

ScaledMatrix operator*(const ScaledMatrix& a, const ScaledMatrix& b);

}  // namespace domcheck
