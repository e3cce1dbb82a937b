#include "domcheck/zoo.hpp"

#include "domcheck/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

namespace domcheck::zoo {
namespace {

std::vector<std::ptrdiff_t> rotation(long q, long step) {
  std::vector<std::ptrdiff_t> map(static_cast<std::size_t>(q));
  for (long x = 0; x < q; ++x) map[static_cast<std::size_t>(x)] = (x + step) % q;
  return map;
}

Splitting constant_splitting(std::size_t points, const std::vector<int>& dims, const Matrix& basis) {
  Splitting s;
  s.dims = dims;
  s.bases.resize(points);
  for (std::size_t x = 0; x < points; ++x) {
    Eigen::Index col = 0;
    for (int n : dims) {
      s.bases[x].push_back(basis.middleCols(col, n));
      col += n;
    }
  }
  return s;
}

// Eigenvectors of an upper-triangular matrix with distinct diagonal, by
// back substitution; column j belongs to the eigenvalue t(j, j).
Matrix triangular_eigenvectors(const Matrix& t) {
  const Eigen::Index d = t.rows();
  Matrix v = Matrix::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double lambda = t(j, j);
    v(j, j) = 1.0;
    for (Eigen::Index r = j - 1; r >= 0; --r) {
      double acc = 0.0;
      for (Eigen::Index c = r + 1; c <= j; ++c) acc += t(r, c) * v(c, j);
      v(r, j) = -acc / (t(r, r) - lambda);
    }
    v.col(j).normalize();
  }
  return v;
}

// Uniform in [-1, 1) from the top 53 bits; identical on every platform.
double symmetric_unit(std::mt19937_64& rng) {
  return 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0;
}

ZooModel diagonal(const Params& p) {
  const auto& mu = p.mu;
  if (mu.empty()) throw Error(ErrorKind::bad_params, "diagonal needs at least one entry");
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!(mu[i] > 0.0)) throw Error(ErrorKind::bad_params, "diagonal entries must be positive");
    if (i > 0 && !(mu[i] > mu[i - 1]))
      throw Error(ErrorKind::bad_params, "diagonal entries must be strictly increasing");
  }
  const auto d = static_cast<Eigen::Index>(mu.size());
  Matrix a = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) a(i, i) = mu[static_cast<std::size_t>(i)];
  std::vector<int> dims(mu.size(), 1);
  ZooModel z{"diagonal", "single fixed point, A = diag(mu)", OrbitModel(Structure::periodic, {0}, {a}),
             dims, coordinate_splitting(1, dims), "exact", {}, {}};
  z.oracle.dominated = mu.size() > 1;
  z.oracle.reducible = true;
  z.oracle.C = 1.0;
  z.oracle.K = 1.0;
  if (mu.size() > 1) {
    double alpha = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < mu.size(); ++i) alpha = std::min(alpha, std::log(mu[i] / mu[i - 1]));
    z.oracle.alpha_domination = alpha;
  }
  bool neutral = false;
  double hyp = std::numeric_limits<double>::infinity();
  std::size_t stable = 0;
  for (double m : mu) {
    if (m == 1.0) neutral = true;
    if (m < 1.0) ++stable;
    hyp = std::min(hyp, std::abs(std::log(m)));
  }
  z.oracle.hyperbolic = !neutral;
  if (!neutral) {
    z.oracle.alpha_hyperbolic = hyp;
    z.oracle.hyperbolic_index = stable;
  }
  return z;
}

ZooModel cat_map() {
  Matrix a(2, 2);
  a << 2, 1, 1, 1;
  const double s5 = std::sqrt(5.0);
  const double lambda = (3.0 + s5) / 2.0;
  Matrix basis(2, 2);
  basis << 1, 1, -(s5 + 1) / 2, (s5 - 1) / 2;  // stable, unstable eigenvectors
  for (Eigen::Index j = 0; j < 2; ++j) basis.col(j).normalize();
  ZooModel z{"cat-map", "single fixed point, A = [[2,1],[1,1]]",
             OrbitModel(Structure::periodic, {0}, {a}), {1, 1},
             constant_splitting(1, {1, 1}, basis), "exact", {}, {}};
  z.oracle = {true, true, true, 2.0 * std::log(lambda), std::log(lambda), 1.0, 1.0, 1};
  return z;
}

ZooModel rotation_normal(const Params& p) {
  if (p.q < 1 || p.step < 0) throw Error(ErrorKind::bad_params, "rotation-normal needs q >= 1");
  Matrix a(2, 2);
  a << 0.5, 0, 0, 1;
  const std::size_t q = static_cast<std::size_t>(p.q);
  ZooModel z{"rotation-normal",
             "golden-rotation approximant x -> x + p mod q with A = diag(1/2, 1): dominated, not hyperbolic",
             OrbitModel(Structure::periodic, rotation(p.q, p.step), std::vector<Matrix>(q, a)),
             {1, 1}, coordinate_splitting(q, {1, 1}), "exact", {}, {}};
  z.oracle.dominated = true;
  z.oracle.hyperbolic = false;
  z.oracle.reducible = true;
  z.oracle.alpha_domination = std::log(2.0);
  z.oracle.C = 1.0;
  z.oracle.K = 1.0;
  return z;
}

ZooModel elliptic(const Params& p) {
  if (p.q < 1 || p.step < 0) throw Error(ErrorKind::bad_params, "elliptic needs q >= 1");
  const double theta = 2.0 * std::numbers::pi * static_cast<double>(p.step) / static_cast<double>(p.q);
  Matrix a(2, 2);
  a << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  const std::size_t q = static_cast<std::size_t>(p.q);
  ZooModel z{"elliptic", "constant rotation by 2 pi step / q (about 1 radian) over a period-q orbit",
             OrbitModel(Structure::periodic, rotation(p.q, p.step), std::vector<Matrix>(q, a)),
             {1, 1}, std::nullopt, "coordinate", {}, {}};
  z.oracle = {false, false, false, std::nullopt, std::nullopt, std::nullopt, std::nullopt, std::nullopt};
  return z;
}

ZooModel mismatched() {
  const Matrix a0 = Eigen::Vector3d(0.5, 2.0, 2.0).asDiagonal();
  const Matrix a1 = Eigen::Vector3d(0.5, 0.5, 2.0).asDiagonal();
  ZooModel z{"mismatched",
             "two hyperbolic fixed points with stable dimensions 1 and 2: reducible per point, not dominated",
             OrbitModel(Structure::periodic, {0, 1}, {a0, a1}), {1, 2}, std::nullopt, "estimate", {}, {}};
  z.per_point.emplace_back(OrbitModel(Structure::periodic, {0}, {a0}), coordinate_splitting(1, {1, 2}));
  z.per_point.emplace_back(OrbitModel(Structure::periodic, {0}, {a1}), coordinate_splitting(1, {2, 1}));
  z.oracle = {false, false, true, std::nullopt, std::nullopt, std::nullopt, 1.0, std::nullopt};
  return z;
}

ZooModel random_triangular(const Params& p) {
  if (p.q < 1) throw Error(ErrorKind::bad_params, "random-triangular needs q >= 1");
  if (!(p.off_diagonal >= 0.0)) throw Error(ErrorKind::bad_params, "off-diagonal bound must be >= 0");
  const std::vector<double> diag{0.6, 1.2, 2.4};
  const Eigen::Index d = 3;
  std::mt19937_64 rng(p.seed);
  const std::size_t q = static_cast<std::size_t>(p.q);
  std::vector<Matrix> gens(q, Matrix::Zero(d, d));
  for (auto& g : gens)
    for (Eigen::Index r = 0; r < d; ++r) {
      g(r, r) = diag[static_cast<std::size_t>(r)];
      for (Eigen::Index c = r + 1; c < d; ++c) g(r, c) = p.off_diagonal * symmetric_unit(rng);
    }
  OrbitModel model(Structure::periodic, rotation(p.q, 1), gens);

  // Invariant splitting: eigenvectors of the monodromy at each point.
  Splitting s;
  s.dims = {1, 1, 1};
  s.bases.resize(q);
  for (std::size_t x = 0; x < q; ++x) {
    Matrix mono = Matrix::Identity(d, d);
    std::size_t y = x;
    for (std::size_t k = 0; k < q; ++k) {
      mono = (gens[y] * mono).triangularView<Eigen::Upper>();
      y = *model.next(y);
    }
    const Matrix v = triangular_eigenvectors(mono);
    for (Eigen::Index j = 0; j < d; ++j) s.bases[x].push_back(v.col(j));
  }
  ZooModel z{"random-triangular",
             "period-q orbit, upper-triangular generators diag(0.6, 1.2, 2.4) plus seeded random off-diagonal",
             std::move(model), {1, 1, 1}, std::move(s), "exact", {}, {}};
  z.oracle.dominated = true;
  z.oracle.hyperbolic = true;
  z.oracle.reducible = true;
  z.oracle.hyperbolic_index = 1;
  return z;
}

ZooModel identity() {
  ZooModel z{"identity", "single fixed point, A = I (d = 2)",
             OrbitModel(Structure::periodic, {0}, {Matrix::Identity(2, 2)}), {1, 1},
             coordinate_splitting(1, {1, 1}), "exact", {}, {}};
  z.oracle = {false, false, true, std::nullopt, std::nullopt, 1.0, 1.0, std::nullopt};
  return z;
}

}  // namespace

std::vector<std::string> names() {
  return {"diagonal", "cat-map", "rotation-normal", "elliptic", "mismatched", "random-triangular", "identity"};
}

Params default_params(const std::string& name) {
  Params p;
  if (name == "diagonal") p.mu = {0.5, 2.0};
  if (name == "rotation-normal") {
    p.q = 89;
    p.step = 55;
  }
  if (name == "elliptic") {
    p.q = 710;
    p.step = 113;
  }
  if (name == "random-triangular") p.q = 17;
  return p;
}

ZooModel make_model(const std::string& name, const Params& params) {
  Params p = params;
  const Params def = default_params(name);
  if (p.mu.empty()) p.mu = def.mu;
  if (p.q == 0) p.q = def.q;
  if (p.step == 0) {
    // Fibonacci predecessor for the golden-rotation denominators.
    if (name == "rotation-normal") {
      long a = 1, b = 1;
      while (b < p.q) {
        const long c = a + b;
        a = b;
        b = c;
      }
      p.step = b == p.q ? a : def.step;
      if (p.step == 0 || std::gcd(p.step, p.q) != 1) p.step = 1;
    } else {
      p.step = def.step;
    }
  }
  if (name == "diagonal") return diagonal(p);
  if (name == "cat-map") return cat_map();
  if (name == "rotation-normal") return rotation_normal(p);
  if (name == "elliptic") return elliptic(p);
  if (name == "mismatched") return mismatched();
  if (name == "random-triangular") return random_triangular(p);
  if (name == "identity") return identity();
  throw Error(ErrorKind::unknown_model, "unknown zoo model '" + name + "'");
}

}  // namespace domcheck::zoo
