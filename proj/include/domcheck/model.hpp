#pragma once

#include "domcheck/linalg.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace domcheck {

enum class Structure { periodic, segment };

/// Finite presentation of (Lambda, f, Df): sampled points 0..P-1, the base
/// map on them, and one invertible d x d generator per point.
///
/// Periodic models require a permutation. Segment models leave exactly the
/// last point without an image; windows that run off either end are refused.
class OrbitModel {
 public:
  static constexpr std::ptrdiff_t undefined = -1;

  /// Throws BadParams on inconsistent shapes and SingularGenerator when a
  /// generator has sigma_min < 1e-12 sigma_max.
  OrbitModel(Structure structure, std::vector<std::ptrdiff_t> base_map,
             std::vector<Matrix> generators);

  Structure structure() const { return structure_; }
  std::size_t points() const { return generators_.size(); }
  Eigen::Index dimension() const { return dimension_; }

  const std::vector<std::ptrdiff_t>& base_map() const { return base_map_; }
  const Matrix& generator(std::size_t x) const { return generators_[x]; }
  const Matrix& inverse_generator(std::size_t x) const { return inverses_[x]; }
  const std::vector<Matrix>& generators() const { return generators_; }

  std::optional<std::size_t> next(std::size_t x) const;
  std::optional<std::size_t> previous(std::size_t x) const;
  /// f^n(x) for signed n, or nothing if the window leaves the data.
  std::optional<std::size_t> advance(std::size_t x, long n) const;

  /// Same base dynamics with replaced generators.
  OrbitModel with_generators(std::vector<Matrix> generators) const;

 private:
  Structure structure_;
  Eigen::Index dimension_ = 0;
  std::vector<std::ptrdiff_t> base_map_;
  std::vector<std::ptrdiff_t> preimage_;
  std::vector<Matrix> generators_;
  std::vector<Matrix> inverses_;
};

/// Df^n(x) in log-scaled form. Negative n multiplies inverse generators
/// A(f^{-1}x)^{-1} ... ; the forward product is never inverted.
ScaledMatrix product_scaled(const OrbitModel& model, std::size_t x, long n);

/// Df^n(x) as a plain matrix (may overflow for very long windows).
Matrix product(const OrbitModel& model, std::size_t x, long n);

struct SupNorms {
  double forward = 0.0;  // max_x ||A(x)||
  double inverse = 0.0;  // max_x ||A(x)^{-1}||
};

SupNorms cocycle_sup_norm(const OrbitModel& model);

/// beta in (0,1) with beta^m <= growth over m steps <= beta^{-m}:
/// min(1/forward, 1/inverse) - 1e-6.
double drift_bound(const SupNorms& norms);

/// Length of the cycle through x (periodic) or the number of points reachable
/// forward from x including x (segment).
std::size_t orbit_length(const OrbitModel& model, std::size_t x);

}  // namespace domcheck
