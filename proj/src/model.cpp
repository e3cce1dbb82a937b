#include "domcheck/model.hpp"

#include "domcheck/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace domcheck {

OrbitModel::OrbitModel(Structure structure, std::vector<std::ptrdiff_t> base_map,
                       std::vector<Matrix> generators)
    : structure_(structure), base_map_(std::move(base_map)), generators_(std::move(generators)) {
  const std::size_t p = generators_.size();
  if (p == 0) throw Error(ErrorKind::bad_params, "model has no points");
  dimension_ = generators_.front().rows();
  if (dimension_ < 1) throw Error(ErrorKind::bad_params, "dimension must be >= 1");
  if (structure_ == Structure::segment && base_map_.size() + 1 == p)
    base_map_.push_back(undefined);
  if (base_map_.size() != p)
    throw Error(ErrorKind::bad_params, "base_map length does not match point count");

  preimage_.assign(p, undefined);
  for (std::size_t x = 0; x < p; ++x) {
    const auto y = base_map_[x];
    const bool last_of_segment = structure_ == Structure::segment && x + 1 == p;
    if (last_of_segment) {
      if (y != undefined)
        throw Error(ErrorKind::bad_params, "segment base_map must be undefined at the last point");
      continue;
    }
    if (y < 0 || static_cast<std::size_t>(y) >= p)
      throw Error(ErrorKind::bad_params, "base_map entry out of range at point " + std::to_string(x));
    if (preimage_[y] != undefined)
      throw Error(ErrorKind::bad_params, "base_map is not injective");
    preimage_[y] = static_cast<std::ptrdiff_t>(x);
  }

  inverses_.reserve(p);
  for (std::size_t x = 0; x < p; ++x) {
    const Matrix& a = generators_[x];
    if (a.rows() != dimension_ || a.cols() != dimension_)
      throw Error(ErrorKind::bad_params, "generator shape mismatch at point " + std::to_string(x));
    if (!a.allFinite())
      throw Error(ErrorKind::bad_params, "non-finite generator at point " + std::to_string(x));
    const auto [smax, smin] = extreme_singular_values(a);
    if (!(smin >= 1e-12 * smax) || smax == 0.0)
      throw Error(ErrorKind::singular_generator,
                  "generator at point " + std::to_string(x) + " fails the invertibility threshold");
    inverses_.push_back(a.fullPivLu().inverse());
  }
}

std::optional<std::size_t> OrbitModel::next(std::size_t x) const {
  const auto y = base_map_[x];
  if (y == undefined) return std::nullopt;
  return static_cast<std::size_t>(y);
}

std::optional<std::size_t> OrbitModel::previous(std::size_t x) const {
  const auto y = preimage_[x];
  if (y == undefined) return std::nullopt;
  return static_cast<std::size_t>(y);
}

std::optional<std::size_t> OrbitModel::advance(std::size_t x, long n) const {
  std::optional<std::size_t> y = x;
  for (long k = 0; k < n && y; ++k) y = next(*y);
  for (long k = 0; k > n && y; --k) y = previous(*y);
  return y;
}

OrbitModel OrbitModel::with_generators(std::vector<Matrix> generators) const {
  return OrbitModel(structure_, base_map_, std::move(generators));
}

ScaledMatrix product_scaled(const OrbitModel& model, std::size_t x, long n) {
  if (!model.advance(x, n))
    throw Error(ErrorKind::window_out_of_range,
                "window of length " + std::to_string(n) + " from point " + std::to_string(x) +
                    " leaves the segment");
  ScaledMatrix out = ScaledMatrix::identity(model.dimension());
  std::size_t y = x;
  for (long k = 0; k < n; ++k) {
    out.left_multiply(model.generator(y));
    if (k + 1 < n) y = *model.next(y);
  }
  for (long k = 0; k > n; --k) {
    y = *model.previous(y);
    out.left_multiply(model.inverse_generator(y));
  }
  return out;
}

Matrix product(const OrbitModel& model, std::size_t x, long n) {
  return product_scaled(model, x, n).materialize();
}

SupNorms cocycle_sup_norm(const OrbitModel& model) {
  SupNorms s;
  for (std::size_t x = 0; x < model.points(); ++x) {
    s.forward = std::max(s.forward, operator_norm(model.generator(x)));
    s.inverse = std::max(s.inverse, operator_norm(model.inverse_generator(x)));
  }
  return s;
}

double drift_bound(const SupNorms& norms) {
  const double b = std::min(1.0 / norms.forward, 1.0 / norms.inverse) - 1e-6;
  return std::clamp(b, 1e-300, 1.0 - 1e-6);
}

std::size_t orbit_length(const OrbitModel& model, std::size_t x) {
  std::size_t len = 1;
  auto y = model.next(x);
  while (y && *y != x) {
    ++len;
    y = model.next(*y);
  }
  return len;
}

}  // namespace domcheck
