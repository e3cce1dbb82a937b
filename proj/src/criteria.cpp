#include "domcheck/criteria.hpp"

#include "domcheck/error.hpp"
#include "domcheck/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace domcheck {
namespace {

constexpr double absent = std::numeric_limits<double>::quiet_NaN();

void check_grid(const GridSpec& grid) {
  if (grid.m_lo < 1 || grid.m_hi < grid.m_lo)
    throw Error(ErrorKind::bad_params, "m-range must satisfy 1 <= m_lo <= m_hi");
}

std::vector<long> m_axis(long m_hi) {
  std::vector<long> m(static_cast<std::size_t>(m_hi));
  for (long j = 0; j < m_hi; ++j) m[static_cast<std::size_t>(j)] = j + 1;
  return m;
}

void keep_max(double& slot, double v) {
  if (std::isnan(v)) return;
  if (std::isnan(slot) || v > slot) slot = v;
}

// Column-wise sup over rows; a column no row reaches is a window error.
std::vector<double> sup_table(std::size_t rows, std::size_t width, const kernels::RowFn& fn,
                              kernels::Backend backend, const char* what) {
  auto table = kernels::reduce_rows(rows, width, fn, kernels::Reduce::max, backend);
  for (std::size_t j = 0; j < table.size(); ++j)
    if (std::isnan(table[j]))
      throw Error(ErrorKind::window_out_of_range,
                  std::string(what) + ": no admissible window of length " + std::to_string(j + 1));
  return table;
}

double log_sigma_max(const ScaledMatrix& s) {
  return s.log_scale + std::log(extreme_singular_values(s.unit).first);
}

double log_sigma_min(const ScaledMatrix& s) {
  const double v = extreme_singular_values(s.unit).second;
  if (!(v > 0.0))
    throw Error(ErrorKind::vanishing_denominator, "restricted cocycle lost rank");
  return s.log_scale + std::log(v);
}

bool is_zero_field(const Field& q) {
  for (const auto& m : q)
    if (m.norm() > 1e-14) return false;
  return true;
}

Field complement(const Field& q) {
  Field out(q.size());
  for (std::size_t x = 0; x < q.size(); ++x)
    out[x] = Matrix::Identity(q[x].rows(), q[x].cols()) - q[x];
  return out;
}

double field_invariance(const OrbitModel& model, const Field& q) {
  double worst = 0.0;
  for (std::size_t x = 0; x < model.points(); ++x) {
    const auto fx = model.next(x);
    if (!fx) continue;
    const Matrix& a = model.generator(x);
    worst = std::max(worst, operator_norm(q[*fx] * a - a * q[x]) / operator_norm(a));
  }
  return worst;
}

void check_family(const OrbitModel& model, const ProjectorFamily& pf) {
  if (pf.points() != model.points() || pf.dimension() != model.dimension())
    throw Error(ErrorKind::bad_params, "projector family does not match the model");
}

}  // namespace

DominationCertificate ratio_domination_test(const OrbitModel& model, const ProjectorFamily& pf,
                                            std::pair<int, int> pair, const GridSpec& grid,
                                            const Thresholds& thresholds) {
  check_grid(grid);
  check_family(model, pf);
  const auto [i1, j1] = pair;
  if (i1 < 1 || j1 <= i1 || j1 > static_cast<int>(pf.blocks()))
    throw Error(ErrorKind::bad_params, "ratio test needs 1 <= i < j <= k");
  const std::size_t bi = static_cast<std::size_t>(i1 - 1);
  const std::size_t bj = static_cast<std::size_t>(j1 - 1);
  const Splitting bases = bases_from_projectors(pf);
  const Evaluation ev = choose_evaluation(model, pf, thresholds.invariance_tol);
  const long steps = grid.m_hi;
  const std::size_t width = static_cast<std::size_t>(steps);
  const double beta = drift_bound(cocycle_sup_norm(model));

  kernels::RowFn row;
  if (ev == Evaluation::literal) {
    const auto [n_lo, n_hi] = offset_range(model, grid);
    row = [&, n_lo = n_lo, n_hi = n_hi](std::size_t x, std::span<double> out) {
      std::vector<double> top(width);
      for_each_offset(model, x, n_lo, n_hi,
                      [&](long, std::size_t y, const ScaledMatrix& fwd, const ScaledMatrix&) {
                        std::fill(top.begin(), top.end(), absent);
                        const Matrix ui = orthonormal_columns(fwd.unit * bases.bases[x][bi]);
                        const Matrix uj = orthonormal_columns(fwd.unit * bases.bases[x][bj]);
                        walk_forward(model, y, ScaledMatrix{ui, 0.0}, steps, nullptr,
                                     [&](long m, const ScaledMatrix& s) {
                                       if (m > 0) top[m - 1] = log_sigma_max(s);
                                     });
                        walk_forward(model, y, ScaledMatrix{uj, 0.0}, steps, nullptr,
                                     [&](long m, const ScaledMatrix& s) {
                                       if (m > 0) keep_max(out[m - 1], top[m - 1] - log_sigma_min(s));
                                     });
                      });
    };
  } else {
    row = [&](std::size_t y, std::span<double> out) {
      std::vector<double> top(width, absent);
      walk_forward(model, y, ScaledMatrix::from(bases.bases[y][bi]), steps, &pf.projectors[bi],
                   [&](long m, const ScaledMatrix& s) {
                     if (m > 0) top[m - 1] = log_sigma_max(s);
                   });
      walk_forward(model, y, ScaledMatrix::from(bases.bases[y][bj]), steps, &pf.projectors[bj],
                   [&](long m, const ScaledMatrix& s) {
                     if (m > 0) out[m - 1] = top[m - 1] - log_sigma_min(s);
                   });
    };
  }
  auto table = sup_table(model.points(), width, row, grid.backend, "ratio test");
  return make_certificate("ratio", pair, m_axis(steps), std::move(table), grid, thresholds, beta, ev);
}

DominationCertificate ratio_domination_all(const OrbitModel& model, const ProjectorFamily& pf,
                                           const GridSpec& grid, const Thresholds& thresholds) {
  std::vector<DominationCertificate> certs;
  const int k = static_cast<int>(pf.blocks());
  for (int i = 1; i <= k; ++i)
    for (int j = i + 1; j <= k; ++j)
      certs.push_back(ratio_domination_test(model, pf, {i, j}, grid, thresholds));
  if (certs.empty())
    return vacuous_certificate("ratio", {0, 0}, thresholds, drift_bound(cocycle_sup_norm(model)));
  if (certs.size() == 1) return certs.front();
  return combine_max("ratio", certs, grid, thresholds);
}

DominationCertificate projector_product_test(const OrbitModel& model, const ProjectorFamily& pf,
                                             int i, const GridSpec& grid,
                                             const Thresholds& thresholds) {
  check_grid(grid);
  check_family(model, pf);
  if (i < 1 || i >= static_cast<int>(pf.blocks()))
    throw Error(ErrorKind::bad_params, "projector test needs 1 <= i <= k-1");
  const Field& pi = pf.projectors[static_cast<std::size_t>(i - 1)];
  const Field& pj = pf.projectors[static_cast<std::size_t>(i)];
  const Evaluation ev = choose_evaluation(model, pf, thresholds.invariance_tol);
  const long steps = grid.m_hi;
  const std::size_t width = static_cast<std::size_t>(steps);
  const double beta = drift_bound(cocycle_sup_norm(model));

  kernels::RowFn row;
  if (ev == Evaluation::projected) {
    // By invariance the (x, n) sup reduces to a sup over y = f^n x of
    // ||Df^m(y) P_i(y)|| ||P_{i+1}(y) Df^{-m}(f^m y)||.
    row = [&](std::size_t y, std::span<double> out) {
      std::vector<double> fwd(width, absent);
      walk_forward(model, y, ScaledMatrix::from(pi[y]), steps, &pi,
                   [&](long m, const ScaledMatrix& s) {
                     if (m > 0) fwd[m - 1] = s.log_norm();
                   });
      walk_backward(model, y, ScaledMatrix::from(pj[y]), steps, &pj,
                    [&](long m, const ScaledMatrix& s) {
                      if (m > 0) out[m - 1] = fwd[m - 1] + s.log_norm();
                    });
    };
  } else {
    const auto [n_lo, n_hi] = offset_range(model, grid);
    row = [&, n_lo = n_lo, n_hi = n_hi](std::size_t x, std::span<double> out) {
      std::vector<double> fwd(width);
      for_each_offset(model, x, n_lo, n_hi,
                      [&](long, std::size_t y, const ScaledMatrix& a, const ScaledMatrix& b) {
                        std::fill(fwd.begin(), fwd.end(), absent);
                        walk_forward(model, y, conjugate(a, pi[x], b), steps, nullptr,
                                     [&](long m, const ScaledMatrix& s) {
                                       if (m > 0) fwd[m - 1] = s.log_norm();
                                     });
                        walk_backward(model, y, conjugate(a, pj[x], b), steps, nullptr,
                                      [&](long m, const ScaledMatrix& s) {
                                        if (m > 0) keep_max(out[m - 1], fwd[m - 1] + s.log_norm());
                                      });
                      });
    };
  }
  auto table = sup_table(model.points(), width, row, grid.backend, "projector test");
  return make_certificate("projector", {i, i + 1}, m_axis(steps), std::move(table), grid,
                          thresholds, beta, ev);
}

DominationCertificate projector_product_all(const OrbitModel& model, const ProjectorFamily& pf,
                                            const GridSpec& grid, const Thresholds& thresholds) {
  std::vector<DominationCertificate> certs;
  for (int i = 1; i < static_cast<int>(pf.blocks()); ++i)
    certs.push_back(projector_product_test(model, pf, i, grid, thresholds));
  if (certs.empty())
    return vacuous_certificate("projector", {0, 0}, thresholds,
                               drift_bound(cocycle_sup_norm(model)));
  if (certs.size() == 1) return certs.front();
  return combine_max("projector", certs, grid, thresholds);
}

PairsReport full_pairs_report(const OrbitModel& model, const ProjectorFamily& pf,
                              const GridSpec& grid, const Thresholds& thresholds) {
  PairsReport report;
  const int k = static_cast<int>(pf.blocks());
  std::vector<DominationCertificate> adjacent;
  for (int i = 1; i < k; ++i) adjacent.push_back(projector_product_test(model, pf, i, grid, thresholds));
  for (int i = 1; i <= k; ++i) {
    for (int j = i + 1; j <= k; ++j) {
      const auto ratio = ratio_domination_test(model, pf, {i, j}, grid, thresholds);
      PairInduction entry;
      entry.i = i;
      entry.j = j;
      entry.alpha_ratio = ratio.alpha;
      entry.max_log_excess = -std::numeric_limits<double>::infinity();
      for (int l = i; l < j; ++l) entry.alpha_chain += adjacent[static_cast<std::size_t>(l - 1)].alpha;
      for (std::size_t t = 0; t < ratio.log_d.size(); ++t) {
        double chain = 0.0;
        for (int l = i; l < j; ++l) chain += adjacent[static_cast<std::size_t>(l - 1)].log_d[t];
        entry.max_log_excess = std::max(entry.max_log_excess, ratio.log_d[t] - chain);
      }
      entry.pass = entry.max_log_excess <= 1e-9;
      report.pass = report.pass && entry.pass;
      report.pairs.push_back(entry);
    }
  }
  return report;
}

ReducibilityCertificate reducibility_test(const OrbitModel& model, const ProjectorFamily& pf,
                                          std::optional<long> range, bool clustered,
                                          kernels::Backend backend, const Thresholds& thresholds) {
  check_family(model, pf);
  const long r = range.value_or(30);
  if (r < 0) throw Error(ErrorKind::bad_params, "n-range must be nonnegative");
  ReducibilityCertificate cert;
  cert.clustered = clustered;
  const bool periodic = model.structure() == Structure::periodic;
  cert.n_lo = periodic ? -r : 0;
  cert.n_hi = r;

  const auto& fields = clustered ? pf.clustered : pf.projectors;
  const std::size_t count = clustered ? pf.blocks() - 1 : pf.blocks();
  const InvarianceReport inv = check_invariance(model, pf, thresholds.invariance_tol);
  cert.invariant = inv.pass;
  cert.invariance_residual = inv.max_residual;
  cert.evaluation = inv.pass ? Evaluation::projected : Evaluation::literal;

  if (count == 0) {
    cert.pass = cert.invariant;
    return cert;
  }

  double log_k = -std::numeric_limits<double>::infinity();
  double log_k2 = log_k;
  if (cert.evaluation == Evaluation::projected) {
    // Df^n P_i(x) Df^{-n}(f^n x) = P_i(f^n x), so the sup is over points.
    for (std::size_t x = 0; x < model.points(); ++x)
      for (std::size_t i = 0; i < count; ++i)
        log_k = std::max(log_k, std::log(operator_norm(fields[i][x])));
    log_k2 = log_k;
  } else {
    const long lo2 = periodic ? -2 * r : 0;
    const long hi2 = 2 * r;
    auto row = [&](std::size_t x, std::span<double> out) {
      for_each_offset(model, x, lo2, hi2,
                      [&](long n, std::size_t, const ScaledMatrix& a, const ScaledMatrix& b) {
                        for (std::size_t i = 0; i < count; ++i) {
                          const double v = conjugate(a, fields[i][x], b).log_norm();
                          keep_max(out[1], v);
                          if (n >= cert.n_lo && n <= cert.n_hi) keep_max(out[0], v);
                        }
                      });
    };
    const auto t = kernels::reduce_rows(model.points(), 2, row, kernels::Reduce::max, backend);
    log_k = t[0];
    log_k2 = t[1];
  }
  cert.K = std::exp(log_k);
  cert.K_doubled = std::exp(log_k2);
  cert.pass = cert.invariant && std::isfinite(cert.K) && std::isfinite(cert.K_doubled) &&
              log_k2 - log_k <= std::log1p(thresholds.growth_tol);
  return cert;
}

double lemma2_bound(double C, double alpha, double beta, long m) {
  const double gain = std::exp(static_cast<double>(m) * alpha) / C;
  if (m < 1 || !(gain > 1.0))
    throw Error(ErrorKind::invalid_m, "C^{-1} e^{m alpha} must exceed 1 (m = " + std::to_string(m) + ")");
  return 2.0 * std::pow(beta, -2.0 * static_cast<double>(m)) / (gain - 1.0);
}

long smallest_valid_m(double C, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw Error(ErrorKind::invalid_m, "no valid m for a nonpositive rate");
  long m = std::max(1L, static_cast<long>(std::floor(std::log(C) / alpha)));
  while (!(std::exp(static_cast<double>(m) * alpha) / C > 1.0)) ++m;
  while (m > 1 && std::exp(static_cast<double>(m - 1) * alpha) / C > 1.0) --m;
  return m;
}

Lemma2Report lemma2_bound_check(const OrbitModel& model, const ProjectorFamily& pf,
                                const DominationCertificate& ratio_cert, long m,
                                std::optional<double> beta, kernels::Backend backend) {
  if (!ratio_cert.pass || ratio_cert.vacuous)
    throw Error(ErrorKind::precondition_failed, "reducibility bound needs a passing, non-vacuous ratio certificate");
  Lemma2Report r;
  r.m = m;
  r.C = ratio_cert.C;
  r.alpha = ratio_cert.alpha;
  r.beta = beta.value_or(ratio_cert.beta);
  r.bound = lemma2_bound(r.C, r.alpha, r.beta, m);
  r.K = reducibility_test(model, pf, std::nullopt, true, backend).K;
  r.margin = r.bound - r.K;
  r.pass = r.K <= r.bound;
  return r;
}

HyperbolicityCertificate hyperbolicity_test(const OrbitModel& model, const Field& q,
                                            const GridSpec& grid, const Thresholds& thresholds) {
  check_grid(grid);
  if (q.size() != model.points()) throw Error(ErrorKind::bad_params, "projector field size mismatch");
  const Field iq = complement(q);
  const bool stable_vacuous = is_zero_field(q);
  const bool unstable_vacuous = is_zero_field(iq);
  const bool invariant = field_invariance(model, q) <= thresholds.invariance_tol;
  const Evaluation ev = invariant ? Evaluation::projected : Evaluation::literal;
  const long steps = grid.m_hi;
  const std::size_t width = static_cast<std::size_t>(steps);
  const double beta = drift_bound(cocycle_sup_norm(model));

  HyperbolicityCertificate cert;
  cert.stable_dim = static_cast<int>(numerical_rank(q.front(), 1e-8));

  if (stable_vacuous) {
    cert.stable = vacuous_certificate("hyperbolicity-stable", {0, 0}, thresholds, beta);
  } else {
    auto row = [&](std::size_t x, std::span<double> out) {
      walk_forward(model, x, ScaledMatrix::from(q[x]), steps, invariant ? &q : nullptr,
                   [&](long m, const ScaledMatrix& s) {
                     if (m > 0) out[m - 1] = s.log_norm();
                   });
    };
    auto t = sup_table(model.points(), width, row, grid.backend, "hyperbolicity test");
    cert.stable = make_certificate("hyperbolicity-stable", {0, 0}, m_axis(steps), std::move(t),
                                   grid, thresholds, beta, ev);
  }
  if (unstable_vacuous) {
    cert.unstable = vacuous_certificate("hyperbolicity-unstable", {0, 0}, thresholds, beta);
  } else {
    auto row = [&](std::size_t x, std::span<double> out) {
      walk_backward(model, x, ScaledMatrix::from(iq[x]), steps, invariant ? &iq : nullptr,
                    [&](long m, const ScaledMatrix& s) {
                      if (m > 0) out[m - 1] = s.log_norm();
                    });
    };
    auto t = sup_table(model.points(), width, row, grid.backend, "hyperbolicity test");
    cert.unstable = make_certificate("hyperbolicity-unstable", {0, 0}, m_axis(steps), std::move(t),
                                     grid, thresholds, beta, ev);
  }
  cert.pass = cert.stable.pass && cert.unstable.pass;
  return cert;
}

HyperbolicityCertificate hyperbolicity_test(const OrbitModel& model, const ProjectorFamily& pf,
                                            std::size_t s, const GridSpec& grid,
                                            const Thresholds& thresholds) {
  check_family(model, pf);
  if (s > pf.blocks()) throw Error(ErrorKind::bad_params, "clustered index out of range");
  Field q;
  if (s == 0) {
    q.assign(model.points(), Matrix::Zero(model.dimension(), model.dimension()));
  } else {
    q = pf.clustered[s - 1];
  }
  auto cert = hyperbolicity_test(model, q, grid, thresholds);
  cert.index = s;
  return cert;
}

HyperbolicityScan hyperbolicity_scan(const OrbitModel& model, const ProjectorFamily& pf,
                                     const GridSpec& grid, const Thresholds& thresholds) {
  HyperbolicityScan scan;
  for (std::size_t s = 0; s <= pf.blocks(); ++s) {
    scan.per_index.push_back(hyperbolicity_test(model, pf, s, grid, thresholds));
    if (scan.per_index.back().pass && !scan.hyperbolic_index) scan.hyperbolic_index = s;
  }
  scan.pass = scan.hyperbolic_index.has_value();
  return scan;
}

}  // namespace domcheck
