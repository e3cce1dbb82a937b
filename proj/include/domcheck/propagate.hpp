#pragma once

#include "domcheck/linalg.hpp"
#include "domcheck/model.hpp"
#include "domcheck/splitting.hpp"

#include <cmath>
#include <cstddef>
#include <vector>

namespace domcheck {

/// How cocycle quantities of the form Df^a P Df^b are evaluated.
///
/// projected: the family is invariant, so Df^a(x) P(x) Df^{-b} only depends
/// on the base point reached; products are carried with P re-applied after
/// every step, which removes rounding drift out of the bundle.
/// literal: plain log-scaled products over the full (x, n) grid.
enum class Evaluation { projected, literal };

const char* to_string(Evaluation e);

/// Projected when the family passes check_invariance at `tolerance`.
Evaluation choose_evaluation(const OrbitModel& model, const ProjectorFamily& pf,
                             double tolerance);

/// Projector field for one block (`nullptr` disables projection).
using Field = std::vector<Matrix>;

/// Walks S_0 = s along the forward orbit of y and calls visit(m, S_m) for
/// m = 0..steps while f^m(y) exists.
///   forward:  S_{m+1} = [R(y_{m+1})] A(y_m) S_m
template <class Visit>
void walk_forward(const OrbitModel& model, std::size_t y, ScaledMatrix s, long steps,
                  const Field* field, Visit&& visit) {
  Matrix tmp(s.unit.rows(), s.unit.cols());
  visit(0L, static_cast<const ScaledMatrix&>(s));
  for (long m = 0; m < steps; ++m) {
    const auto next = model.next(y);
    if (!next) return;
    tmp.noalias() = model.generator(y) * s.unit;
    if (field) {
      s.unit.noalias() = (*field)[*next] * tmp;
    } else {
      s.unit.swap(tmp);
    }
    s.renormalize();
    y = *next;
    visit(m + 1, static_cast<const ScaledMatrix&>(s));
  }
}

/// Walks S_0 = s with inverse generators on the right:
///   backward: S_{m+1} = S_m A(y_m)^{-1} [R(y_{m+1})]
/// so that S_m = S_0 Df^{-m}(f^m y).
template <class Visit>
void walk_backward(const OrbitModel& model, std::size_t y, ScaledMatrix s, long steps,
                   const Field* field, Visit&& visit) {
  Matrix tmp(s.unit.rows(), s.unit.cols());
  visit(0L, static_cast<const ScaledMatrix&>(s));
  for (long m = 0; m < steps; ++m) {
    const auto next = model.next(y);
    if (!next) return;
    tmp.noalias() = s.unit * model.inverse_generator(y);
    if (field) {
      s.unit.noalias() = tmp * (*field)[*next];
    } else {
      s.unit.swap(tmp);
    }
    s.renormalize();
    y = *next;
    visit(m + 1, static_cast<const ScaledMatrix&>(s));
  }
}

/// For fixed x, calls visit(n, f^n(x), Df^n(x), Df^{-n}(f^n x)) for every
/// n in [n_lo, n_hi] whose window exists, built incrementally from n = 0.
template <class Visit>
void for_each_offset(const OrbitModel& model, std::size_t x, long n_lo, long n_hi,
                     Visit&& visit) {
  const Eigen::Index d = model.dimension();
  if (n_lo <= 0 && n_hi >= 0) {
    visit(0L, x, ScaledMatrix::identity(d), ScaledMatrix::identity(d));
  }
  {
    ScaledMatrix fwd = ScaledMatrix::identity(d);  // Df^n(x)
    ScaledMatrix bwd = ScaledMatrix::identity(d);  // Df^{-n}(f^n x)
    std::size_t y = x;
    for (long n = 1; n <= n_hi; ++n) {
      const auto next = model.next(y);
      if (!next) break;
      fwd.left_multiply(model.generator(y));
      bwd.right_multiply(model.inverse_generator(y));
      y = *next;
      if (n >= n_lo) visit(n, y, static_cast<const ScaledMatrix&>(fwd), static_cast<const ScaledMatrix&>(bwd));
    }
  }
  {
    ScaledMatrix fwd = ScaledMatrix::identity(d);
    ScaledMatrix bwd = ScaledMatrix::identity(d);
    std::size_t y = x;
    for (long n = -1; n >= n_lo; --n) {
      const auto prev = model.previous(y);
      if (!prev) break;
      y = *prev;
      fwd.left_multiply(model.inverse_generator(y));
      bwd.right_multiply(model.generator(y));
      if (n <= n_hi) visit(n, y, static_cast<const ScaledMatrix&>(fwd), static_cast<const ScaledMatrix&>(bwd));
    }
  }
}

/// Df^n(x) P(x) Df^{-n}(f^n x) from the offset products.
inline ScaledMatrix conjugate(const ScaledMatrix& fwd, const Matrix& p, const ScaledMatrix& bwd) {
  ScaledMatrix out{fwd.unit * p * bwd.unit, fwd.log_scale + bwd.log_scale};
  out.renormalize();
  return out;
}

inline double log_norm(const ScaledMatrix& s) { return s.log_norm(); }

}  // namespace domcheck
