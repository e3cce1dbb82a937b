#include "domcheck/torsion.hpp"

#include "domcheck/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace domcheck {
namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

double max_norm(const Field& q) {
  double v = 0.0;
  for (const auto& m : q) v = std::max(v, operator_norm(m));
  return v;
}

Field complement(const Field& q) {
  Field out(q.size());
  for (std::size_t x = 0; x < q.size(); ++x)
    out[x] = Matrix::Identity(q[x].rows(), q[x].cols()) - q[x];
  return out;
}

// Largest D(m) e^{alpha m} over a certificate table, at a common rate.
double envelope_at(const DominationCertificate& c, double alpha) {
  double v = -inf;
  for (std::size_t j = 0; j < c.m_values.size(); ++j)
    v = std::max(v, c.log_d[j] + alpha * static_cast<double>(c.m_values[j]));
  return std::exp(v);
}

// Column spans of a projector with the given rank.
Matrix range_basis(const Matrix& q, int rank) {
  Eigen::JacobiSVD<Matrix> svd(q, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(rank);
}

}  // namespace

std::vector<double> ScalingFamily::log_p(std::size_t i) const {
  std::vector<double> out(p.at(i).size());
  for (std::size_t x = 0; x < out.size(); ++x) out[x] = std::log(p[i][x]);
  return out;
}

ScalingFamily build_scaling(const RateFunctionTable& rates, double lambda, double alpha) {
  if (!(lambda > 0.0 && lambda < alpha / 2.0))
    throw Error(ErrorKind::lambda_out_of_range,
                "lambda must lie strictly inside (0, alpha/2) = (0, " + std::to_string(alpha / 2.0) + ")");
  ScalingFamily s;
  s.lambda = lambda;
  s.provenance = "constructed-from-rates";
  s.p.assign(rates.blocks(), std::vector<double>(rates.points()));
  for (std::size_t i = 0; i < rates.blocks(); ++i)
    for (std::size_t x = 0; x < rates.points(); ++x) {
      const double rho = rates.upper[i][x];
      if (std::isnan(rho))
        throw Error(ErrorKind::window_out_of_range, "rate undefined at point " + std::to_string(x));
      s.p[i][x] = std::exp(-rho - lambda);
    }
  return s;
}

OrbitModel scaled_model(const OrbitModel& model, const ScalingFamily& scaling, std::size_t i) {
  if (i >= scaling.blocks() || scaling.points() != model.points())
    throw Error(ErrorKind::bad_params, "scaling family does not match the model");
  std::vector<Matrix> gens(model.points());
  for (std::size_t x = 0; x < model.points(); ++x) {
    const double p = scaling.p[i][x];
    if (!(p > 0.0) || !std::isfinite(p))
      throw Error(ErrorKind::bad_params, "scaling must be positive and finite");
    gens[x] = p * model.generator(x);
  }
  return model.with_generators(std::move(gens));
}

ScaledMatrix scaled_product(const OrbitModel& model, const ScalingFamily& scaling, std::size_t i,
                            std::size_t x, long n) {
  ScaledMatrix out = product_scaled(model, x, n);
  double log_factor = 0.0;
  std::size_t y = x;
  if (n >= 0) {
    for (long k = 0; k < n; ++k) {
      log_factor += std::log(scaling.p.at(i).at(y));
      y = *model.next(y);
    }
  } else {
    for (long k = 1; k <= -n; ++k) {
      y = *model.previous(y);
      log_factor -= std::log(scaling.p.at(i).at(y));
    }
  }
  out.log_scale += log_factor;
  return out;
}

const char* to_string(SeparationOrder order) {
  return order == SeparationOrder::increasing ? "increasing" : "decreasing";
}

SeparationCertificate separation_test(const OrbitModel& model,
                                      const std::vector<std::vector<double>>& q,
                                      SeparationOrder order, const GridSpec& grid,
                                      const Thresholds& thresholds) {
  if (grid.m_lo < 1 || grid.m_hi < grid.m_lo)
    throw Error(ErrorKind::bad_params, "m-range must satisfy 1 <= m_lo <= m_hi");
  SeparationCertificate c;
  c.order = order;
  c.gamma_min = thresholds.gamma_min;
  const std::size_t width = static_cast<std::size_t>(grid.m_hi);
  if (q.size() < 2) {
    c.gamma = inf;
    c.pass = true;
    return c;
  }
  for (const auto& f : q)
    if (f.size() != model.points()) throw Error(ErrorKind::bad_params, "function table size mismatch");

  std::vector<double> mins(width, inf);
  for (std::size_t b = 0; b + 1 < q.size(); ++b) {
    for (std::size_t y = 0; y < model.points(); ++y) {
      double sum = 0.0;
      std::optional<std::size_t> p = y;
      for (std::size_t j = 0; j < width && p; ++j) {
        const double d = order == SeparationOrder::decreasing ? q[b][*p] - q[b + 1][*p]
                                                              : q[b + 1][*p] - q[b][*p];
        sum += d;
        mins[j] = std::min(mins[j], sum);
        p = model.next(*p);
      }
    }
  }
  for (std::size_t j = 0; j < width; ++j) {
    if (!std::isfinite(mins[j]))
      throw Error(ErrorKind::window_out_of_range, "no window of length " + std::to_string(j + 1));
    c.m_values.push_back(static_cast<long>(j + 1));
  }
  c.min_sums = mins;

  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (std::size_t j = 0; j < width; ++j) {
    const long m = c.m_values[j];
    if (m < grid.m_lo || m > grid.m_hi) continue;
    const double x = static_cast<double>(m);
    sx += x;
    sy += mins[j];
    sxx += x * x;
    sxy += x * mins[j];
    n += 1;
  }
  c.gamma = n > 1 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : sy / sx;
  double beta = 0.0;
  for (std::size_t j = 0; j < width; ++j)
    beta = std::max(beta, c.gamma * static_cast<double>(c.m_values[j]) - mins[j]);
  c.beta = beta;
  c.pass = c.gamma >= thresholds.gamma_min;
  return c;
}

SeparationCertificate separation_test(const OrbitModel& model, const ScalingFamily& scaling,
                                      const GridSpec& grid, const Thresholds& thresholds) {
  std::vector<std::vector<double>> q;
  for (std::size_t i = 0; i < scaling.blocks(); ++i) q.push_back(scaling.log_p(i));
  return separation_test(model, q, SeparationOrder::decreasing, grid, thresholds);
}

TorsionForward torsion_forward(const OrbitModel& model, const ProjectorFamily& pf,
                               const RateFunctionTable& rates, double lambda, double alpha,
                               const GridSpec& grid, const Thresholds& thresholds) {
  TorsionForward out;
  out.lambda = lambda;
  out.alpha = alpha;
  out.scaling = build_scaling(rates, lambda, alpha);
  const std::size_t k = pf.blocks();
  for (std::size_t i = 0; i < k; ++i) {
    const OrbitModel scaled = scaled_model(model, out.scaling, i);
    const Field& q = pf.clustered[i];
    auto cert = hyperbolicity_test(scaled, q, grid, thresholds);
    cert.index = i + 1;
    const bool last = i + 1 == k;
    const bool stable_ok = !cert.stable.vacuous && cert.stable.alpha >= lambda - thresholds.fit_slack;
    const bool unstable_ok =
        last ? cert.unstable.vacuous
             : cert.unstable.alpha >= alpha / 2.0 - lambda - thresholds.fit_slack;
    if (!(cert.pass && stable_ok && unstable_ok))
      throw Error(ErrorKind::certificate_mismatch,
                  "rescaled cocycle " + std::to_string(i + 1) + " is not hyperbolic at the predicted rates");
    out.per_index.push_back(std::move(cert));
    out.q.push_back(q);
  }
  out.pass = true;
  return out;
}

TorsionReverse torsion_reverse(const OrbitModel& model, const ScalingFamily& scaling,
                               const SeparationCertificate& separation, const std::vector<Field>& q,
                               const GridSpec& grid, const Thresholds& thresholds) {
  if (!separation.pass)
    throw Error(ErrorKind::precondition_failed, "scalings are not summably separated");
  const std::size_t k = q.size();
  if (k == 0 || scaling.blocks() != k)
    throw Error(ErrorKind::bad_params, "one hyperbolic projector per scaling expected");
  const Eigen::Index d = model.dimension();

  // Strict nesting range(Q_1) < ... < range(Q_k) = whole space.
  std::vector<int> rank(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (q[i].size() != model.points()) throw Error(ErrorKind::bad_params, "projector field size mismatch");
    rank[i] = static_cast<int>(numerical_rank(q[i].front(), 1e-8));
    for (const auto& m : q[i])
      if (static_cast<int>(numerical_rank(m, 1e-8)) != rank[i])
        throw Error(ErrorKind::nesting_violation, "stable dimension varies over points");
    if (rank[i] < 1 || (i > 0 && rank[i] <= rank[i - 1]))
      throw Error(ErrorKind::nesting_violation, "stable ranges are not strictly nested");
  }
  if (rank.back() != d) throw Error(ErrorKind::nesting_violation, "last stable range is not the whole space");
  for (std::size_t i = 1; i < k; ++i)
    for (std::size_t x = 0; x < model.points(); ++x)
      if (containment_defect(range_basis(q[i - 1][x], rank[i - 1]), range_basis(q[i][x], rank[i])) > 1e-8)
        throw Error(ErrorKind::nesting_violation,
                    "range(Q_" + std::to_string(i) + ") is not contained in range(Q_" +
                        std::to_string(i + 1) + ") at point " + std::to_string(x));

  std::vector<int> dims(k);
  std::vector<std::vector<Matrix>> pfield(k, std::vector<Matrix>(model.points()));
  for (std::size_t i = 0; i < k; ++i) {
    dims[i] = rank[i] - (i > 0 ? rank[i - 1] : 0);
    for (std::size_t x = 0; x < model.points(); ++x)
      pfield[i][x] = i > 0 ? Matrix(q[i][x] - q[i - 1][x]) : q[i][x];
  }
  TorsionReverse out;
  out.family = family_from_projectors(dims, std::move(pfield));
  const auto res = projector_residuals(out.family);
  if (res.idempotence > 1e-9 || res.cross > 1e-9 || res.supplementarity > 1e-9 || !res.ranks_match)
    throw Error(ErrorKind::projector_invariant_violation, "reconstructed projectors are not supplementary");
  if (!check_invariance(model, out.family, thresholds.invariance_tol).pass)
    throw Error(ErrorKind::projector_invariant_violation, "reconstructed projectors are not invariant");

  // Common hyperbolicity constants for all rescaled cocycles.
  std::vector<HyperbolicityCertificate> hyp;
  out.alpha = inf;
  for (std::size_t i = 0; i < k; ++i) {
    hyp.push_back(hyperbolicity_test(scaled_model(model, scaling, i), q[i], grid, thresholds));
    if (!hyp.back().pass)
      throw Error(ErrorKind::precondition_failed,
                  "rescaled cocycle " + std::to_string(i + 1) + " is not hyperbolic");
    for (const auto* c : {&hyp.back().stable, &hyp.back().unstable})
      if (!c->vacuous) out.alpha = std::min(out.alpha, c->alpha);
  }
  out.C = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    out.C = std::max({out.C, max_norm(q[i]), max_norm(complement(q[i]))});
    for (const auto* c : {&hyp[i].stable, &hyp[i].unstable})
      if (!c->vacuous) out.C = std::max(out.C, envelope_at(*c, out.alpha));
  }

  // Single-bundle bounds on the rescaled cocycles: 2 C^2 e^{-m alpha}.
  const double log_single = std::log(2.0) + 2.0 * std::log(out.C);
  out.max_excess_single = -inf;
  const long steps = grid.m_hi;
  for (std::size_t i = 0; i < k; ++i) {
    const OrbitModel scaled = scaled_model(model, scaling, i);
    const Field& pi = out.family.projectors[i];
    for (std::size_t y = 0; y < model.points(); ++y) {
      auto check = [&](long m, const ScaledMatrix& s) {
        if (m == 0) return;
        const double excess = s.log_norm() - (log_single - out.alpha * static_cast<double>(m));
        out.max_excess_single = std::max(out.max_excess_single, excess);
      };
      walk_forward(scaled, y, ScaledMatrix::from(pi[y]), steps, &pi, check);
      if (i + 1 < k) {
        const Field& pj = out.family.projectors[i + 1];
        walk_backward(scaled, y, ScaledMatrix::from(pj[y]), steps, &pj, check);
      }
    }
  }

  // Product bound 4 C^4 e^{-2 m alpha} on the original cocycle.
  const double log_product = std::log(4.0) + 4.0 * std::log(out.C);
  out.max_excess_product = -inf;
  for (int i = 1; i < static_cast<int>(k); ++i) {
    const auto c = projector_product_test(model, out.family, i, grid, thresholds);
    for (std::size_t j = 0; j < c.m_values.size(); ++j)
      out.max_excess_product = std::max(
          out.max_excess_product,
          c.log_d[j] - (log_product - 2.0 * out.alpha * static_cast<double>(c.m_values[j])));
  }
  out.certificate = projector_product_all(model, out.family, grid, thresholds);
  out.certificate.criterion = "torsion";
  out.pass = out.max_excess_single <= 1e-9 && out.max_excess_product <= 1e-9 &&
             out.certificate.pass &&
             (out.certificate.vacuous || out.certificate.alpha >= 2.0 * out.alpha - thresholds.fit_slack);
  if (!out.pass)
    throw Error(ErrorKind::certificate_mismatch, "reconstructed splitting fails the domination bounds");
  return out;
}

}  // namespace domcheck
