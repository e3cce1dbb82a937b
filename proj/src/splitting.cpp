#include "domcheck/splitting.hpp"

#include "domcheck/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace domcheck {
namespace {

int total(const std::vector<int>& dims) { return std::accumulate(dims.begin(), dims.end(), 0); }

void check_dims(const std::vector<int>& dims, Eigen::Index d) {
  if (dims.empty()) throw Error(ErrorKind::bad_params, "splitting needs at least one block");
  for (int n : dims)
    if (n < 1) throw Error(ErrorKind::bad_params, "block dimensions must be positive");
  if (total(dims) != d)
    throw Error(ErrorKind::bad_params, "block dimensions must sum to the ambient dimension");
}

// Subspace iteration with pivoted QR. Returns the final orthonormal frame
// (most expanded directions first) and the accumulated log |R_jj| per column.
struct Frame {
  Matrix q;
  Vector log_growth;
};

Frame iterate_frame(const OrbitModel& model, std::size_t start, long steps, bool forward) {
  const Eigen::Index d = model.dimension();
  Frame f{Matrix::Identity(d, d), Vector::Zero(d)};
  std::size_t y = start;
  for (long k = 0; k < steps; ++k) {
    Matrix image;
    if (forward) {
      image = model.generator(y) * f.q;
      y = *model.next(y);
    } else {
      y = *model.previous(y);
      image = model.inverse_generator(y) * f.q;
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(image);
    const Matrix r = qr.matrixR().triangularView<Eigen::Upper>();
    const auto& perm = qr.colsPermutation().indices();
    Vector accumulated(d);
    for (Eigen::Index j = 0; j < d; ++j)
      accumulated(j) = f.log_growth(perm(j)) + std::log(std::abs(r(j, j)));
    f.log_growth = accumulated;
    f.q = qr.householderQ() * Matrix::Identity(d, d);
  }
  return f;
}

double gap_ratio(const Vector& log_growth, Eigen::Index boundary) {
  return std::exp(log_growth(boundary - 1) - log_growth(boundary));
}

}  // namespace

Matrix Splitting::concatenated(std::size_t point) const {
  const auto& blocks_at = bases.at(point);
  const Eigen::Index d = blocks_at.front().rows();
  Matrix b(d, d);
  Eigen::Index col = 0;
  for (const auto& block : blocks_at) {
    b.middleCols(col, block.cols()) = block;
    col += block.cols();
  }
  return b;
}

Eigen::Index ProjectorFamily::dimension() const {
  return projectors.empty() ? 0 : projectors.front().front().rows();
}

ProjectorFamily family_from_projectors(std::vector<int> dims,
                                       std::vector<std::vector<Matrix>> projectors) {
  if (dims.size() != projectors.size())
    throw Error(ErrorKind::bad_params, "projector count does not match block count");
  ProjectorFamily pf;
  pf.dims = std::move(dims);
  pf.projectors = std::move(projectors);
  const std::size_t k = pf.projectors.size();
  const std::size_t p = pf.projectors.front().size();
  pf.clustered.assign(k, std::vector<Matrix>(p));
  for (std::size_t x = 0; x < p; ++x) {
    Matrix acc = Matrix::Zero(pf.projectors[0][x].rows(), pf.projectors[0][x].cols());
    for (std::size_t i = 0; i < k; ++i) {
      acc += pf.projectors[i][x];
      pf.clustered[i][x] = acc;
    }
  }
  return pf;
}

ProjectorFamily clustered_pair(const ProjectorFamily& pf, std::size_t i) {
  if (i < 1 || i >= pf.blocks())
    throw Error(ErrorKind::bad_params, "clustered index must lie in 1..k-1");
  const int lower = std::accumulate(pf.dims.begin(), pf.dims.begin() + i, 0);
  const int upper = std::accumulate(pf.dims.begin() + i, pf.dims.end(), 0);
  std::vector<Matrix> q = pf.clustered[i - 1];
  std::vector<Matrix> rest(q.size());
  for (std::size_t x = 0; x < q.size(); ++x)
    rest[x] = Matrix::Identity(q[x].rows(), q[x].cols()) - q[x];
  return family_from_projectors({lower, upper}, {std::move(q), std::move(rest)});
}

ProjectorFamily projectors_from_bases(const Splitting& s) {
  if (s.bases.empty()) throw Error(ErrorKind::bad_params, "splitting has no points");
  const Eigen::Index d = s.bases.front().front().rows();
  check_dims(s.dims, d);
  const std::size_t k = s.blocks();
  std::vector<std::vector<Matrix>> fields(k, std::vector<Matrix>(s.points()));
  for (std::size_t x = 0; x < s.points(); ++x) {
    if (s.bases[x].size() != k)
      throw Error(ErrorKind::bad_params, "wrong block count at point " + std::to_string(x));
    for (std::size_t i = 0; i < k; ++i)
      if (s.bases[x][i].rows() != d || s.bases[x][i].cols() != s.dims[i])
        throw Error(ErrorKind::bad_params, "basis shape mismatch at point " + std::to_string(x));
    const Matrix b = s.concatenated(x);
    const auto [smax, smin] = extreme_singular_values(b);
    if (!(smin > 0.0) || smax / smin > 1e10)
      throw Error(ErrorKind::degenerate_splitting,
                  "concatenated basis is ill conditioned at point " + std::to_string(x));
    const Matrix inv = b.fullPivLu().inverse();
    Eigen::Index col = 0;
    for (std::size_t i = 0; i < k; ++i) {
      const Eigen::Index n = s.dims[i];
      fields[i][x] = b.middleCols(col, n) * inv.middleRows(col, n);
      col += n;
    }
  }
  return family_from_projectors(s.dims, std::move(fields));
}

Splitting bases_from_projectors(const ProjectorFamily& pf) {
  Splitting s;
  s.dims = pf.dims;
  s.bases.resize(pf.points());
  for (std::size_t x = 0; x < pf.points(); ++x) {
    for (std::size_t i = 0; i < pf.blocks(); ++i) {
      Eigen::JacobiSVD<Matrix> svd(pf.projectors[i][x], Eigen::ComputeThinU);
      Matrix u = svd.matrixU().leftCols(pf.dims[i]);
      apply_sign_convention(u);
      s.bases[x].push_back(u);
    }
  }
  return s;
}

InvarianceReport check_invariance(const OrbitModel& model, const ProjectorFamily& pf,
                                  double tolerance) {
  InvarianceReport report;
  report.tolerance = tolerance;
  report.per_point.assign(model.points(), 0.0);
  for (std::size_t x = 0; x < model.points(); ++x) {
    const auto fx = model.next(x);
    if (!fx) continue;
    const Matrix& a = model.generator(x);
    const double an = operator_norm(a);
    double worst = 0.0;
    for (std::size_t i = 0; i < pf.blocks(); ++i) {
      const Matrix c = pf.projectors[i][*fx] * a - a * pf.projectors[i][x];
      worst = std::max(worst, operator_norm(c) / an);
    }
    report.per_point[x] = worst;
    report.max_residual = std::max(report.max_residual, worst);
  }
  report.pass = report.max_residual <= tolerance;
  return report;
}

ProjectorResiduals projector_residuals(const ProjectorFamily& pf) {
  ProjectorResiduals r;
  const Eigen::Index d = pf.dimension();
  for (std::size_t x = 0; x < pf.points(); ++x) {
    Matrix sum = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < pf.blocks(); ++i) {
      const Matrix& p = pf.projectors[i][x];
      sum += p;
      r.idempotence = std::max(r.idempotence, operator_norm(p * p - p));
      if (numerical_rank(p, 1e-8) != static_cast<std::size_t>(pf.dims[i])) r.ranks_match = false;
      for (std::size_t j = 0; j < pf.blocks(); ++j)
        if (j != i) r.cross = std::max(r.cross, operator_norm(p * pf.projectors[j][x]));
    }
    r.supplementarity = std::max(r.supplementarity, operator_norm(sum - Matrix::Identity(d, d)));
  }
  return r;
}

Splitting coordinate_splitting(std::size_t points, const std::vector<int>& dims) {
  const int d = total(dims);
  check_dims(dims, d);
  Splitting s;
  s.dims = dims;
  s.bases.resize(points);
  for (std::size_t x = 0; x < points; ++x) {
    int col = 0;
    for (int n : dims) {
      s.bases[x].push_back(Matrix::Identity(d, d).middleCols(col, n));
      col += n;
    }
  }
  return s;
}

Splitting estimate_splitting(const OrbitModel& model, const std::vector<int>& dims,
                             const EstimateOptions& options) {
  const Eigen::Index d = model.dimension();
  check_dims(dims, d);
  if (options.window < 1) throw Error(ErrorKind::bad_params, "estimation window must be >= 1");
  const long t = options.window;
  const std::size_t k = dims.size();

  // s[i] = n_1 + ... + n_i, s[0] = 0, s[k] = d
  std::vector<int> s(k + 1, 0);
  for (std::size_t i = 0; i < k; ++i) s[i + 1] = s[i] + dims[i];

  Splitting out;
  out.dims = dims;
  out.bases.resize(model.points());
  for (std::size_t x = 0; x < model.points(); ++x) {
    const auto past = model.advance(x, -t);
    const auto future = model.advance(x, t);
    if (!past || !future)
      throw Error(ErrorKind::window_out_of_range,
                  "estimation window [x-T, x+T] unavailable at point " + std::to_string(x));

    // Columns of `fast` ordered by decreasing forward growth; columns of
    // `slow` by decreasing backward growth, i.e. increasing forward growth.
    const Frame fast = iterate_frame(model, *past, t, true);
    const Frame slow = iterate_frame(model, *future, t, false);

    for (std::size_t i = 1; i < k; ++i) {
      const Eigen::Index boundary_slow = s[i];
      const Eigen::Index boundary_fast = d - s[i];
      if (gap_ratio(fast.log_growth, boundary_fast) < options.gap_threshold ||
          gap_ratio(slow.log_growth, boundary_slow) < options.gap_threshold)
        throw Error(ErrorKind::dimension_mismatch,
                    "no finite-time spectral gap at index " + std::to_string(s[i]) +
                        " at point " + std::to_string(x));
    }

    for (std::size_t i = 0; i < k; ++i) {
      const Matrix slow_flag = slow.q.leftCols(s[i + 1]);
      const Matrix fast_flag = fast.q.leftCols(d - s[i]);
      Matrix block;
      if (i + 1 == k) {
        block = fast_flag;
      } else if (i == 0) {
        block = slow_flag;
      } else {
        Eigen::JacobiSVD<Matrix> svd(slow_flag.transpose() * fast_flag, Eigen::ComputeThinU);
        const auto& cosines = svd.singularValues();
        if (cosines(dims[i] - 1) < 0.5)
          throw Error(ErrorKind::degenerate_splitting,
                      "estimated flags are not transverse at point " + std::to_string(x));
        block = slow_flag * svd.matrixU().leftCols(dims[i]);
      }
      out.bases[x].push_back(orthonormal_columns(block));
    }
  }
  return out;
}

}  // namespace domcheck
