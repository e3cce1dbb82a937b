#include "domcheck/rates.hpp"

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
constexpr double inf = std::numeric_limits<double>::infinity();

void keep_max(double& slot, double v) {
  if (std::isnan(v)) return;
  if (std::isnan(slot) || v > slot) slot = v;
}

// g(f^k y) for k = 0..steps-1, stopping where the orbit leaves the data.
std::vector<double> along_orbit(const OrbitModel& model, std::size_t y, long steps,
                                const std::vector<double>& g) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(steps));
  std::optional<std::size_t> p = y;
  for (long k = 0; k < steps && p; ++k) {
    out.push_back(g[*p]);
    p = model.next(*p);
  }
  return out;
}

FunctionCheck function_check(const OrbitModel& model, const ProjectorFamily& pf, std::size_t i,
                             const std::vector<double>& g, const GridSpec& grid,
                             const Thresholds& thresholds, bool upper) {
  if (i < 1 || i > pf.blocks()) throw Error(ErrorKind::bad_params, "bundle index out of range");
  if (g.size() != model.points()) throw Error(ErrorKind::bad_params, "function table size mismatch");
  const Field& p = pf.projectors[i - 1];
  const long steps = 2 * grid.m_hi;
  const long m_hi = grid.m_hi;
  const Evaluation ev = choose_evaluation(model, pf, thresholds.invariance_tol);

  // out[0]: sup over m <= m_hi, out[1]: sup over m <= 2 m_hi.
  auto record = [&](std::span<double> out, const std::vector<double>& gs) {
    return [&, out, sum = 0.0](long m, const ScaledMatrix& s) mutable {
      if (m == 0) return;
      const double gk = gs[static_cast<std::size_t>(m - 1)];
      sum += gk;
      if (std::isnan(sum)) return;
      const double v = upper ? s.log_norm() - sum : s.log_norm() + sum;
      keep_max(out[1], v);
      if (m <= m_hi) keep_max(out[0], v);
    };
  };
  auto walk = [&](std::size_t y, const ScaledMatrix& start, const Field* field, std::span<double> out) {
    const auto gs = along_orbit(model, y, steps, g);
    const long len = static_cast<long>(gs.size());
    if (upper) {
      walk_forward(model, y, start, std::min(steps, len), field, record(out, gs));
    } else {
      walk_backward(model, y, start, std::min(steps, len), field, record(out, gs));
    }
  };

  kernels::RowFn row;
  if (ev == Evaluation::projected) {
    row = [&](std::size_t y, std::span<double> out) { walk(y, ScaledMatrix::from(p[y]), &p, out); };
  } else {
    const auto [n_lo, n_hi] = offset_range(model, grid);
    row = [&, n_lo = n_lo, n_hi = n_hi](std::size_t x, std::span<double> out) {
      for_each_offset(model, x, n_lo, n_hi,
                      [&](long, std::size_t y, const ScaledMatrix& a, const ScaledMatrix& b) {
                        walk(y, conjugate(a, p[x], b), nullptr, out);
                      });
    };
  }
  const auto t = kernels::reduce_rows(model.points(), 2, row, kernels::Reduce::max, grid.backend);
  if (std::isnan(t[0])) throw Error(ErrorKind::window_out_of_range, "no admissible window for the function check");
  FunctionCheck c;
  c.bundle = i;
  c.upper = upper;
  c.m_hi = m_hi;
  c.K = std::exp(t[0]);
  c.K_doubled = std::exp(t[1]);
  c.pass = std::isfinite(c.K) && std::isfinite(c.K_doubled) &&
           t[1] - t[0] <= std::log1p(thresholds.growth_tol);
  return c;
}

}  // namespace

BoundedSeries BoundedSeries::of(std::vector<double> values) {
  double b = 0.0;
  for (double v : values) b = std::max(b, std::abs(v));
  return BoundedSeries{std::move(values), b};
}

std::vector<double> window_average(const BoundedSeries& s, long N) {
  if (N < 1) throw Error(ErrorKind::bad_params, "averaging window must be >= 1");
  const long len = static_cast<long>(s.values.size());
  if (N > len) throw Error(ErrorKind::window_out_of_range, "series shorter than the averaging window");
  std::vector<double> out(static_cast<std::size_t>(len - N + 1));
  for (long k = 0; k + N <= len; ++k) {
    double acc = 0.0;
    for (long j = 0; j < N; ++j) acc += s.values[static_cast<std::size_t>(k + j)];
    out[static_cast<std::size_t>(k)] = acc / static_cast<double>(N);
  }
  return out;
}

AveragingCheck averaging_bound_check(const BoundedSeries& s, long N, long n, long m) {
  if (N < 1 || m < 1) throw Error(ErrorKind::bad_params, "N and m must be >= 1");
  const long len = static_cast<long>(s.values.size());
  if (n < 0 || n + m - 1 + N - 1 >= len)
    throw Error(ErrorKind::window_out_of_range, "averaging windows leave the series");
  const auto avg = window_average(s, N);
  double sum = 0.0;
  for (long k = n; k < n + m; ++k)
    sum += s.values[static_cast<std::size_t>(k)] - avg[static_cast<std::size_t>(k)];
  AveragingCheck c;
  c.measured = std::abs(sum);
  c.limit = s.bound * static_cast<double>(N);
  c.pass = s.bound > 0.0 ? c.measured < c.limit : c.measured == 0.0;
  return c;
}

RateFunctionTable compute_rates(const OrbitModel& model, const ProjectorFamily& pf, long N,
                                double invariance_tol) {
  if (N < 1) throw Error(ErrorKind::bad_params, "rate window must be >= 1");
  if (pf.points() != model.points()) throw Error(ErrorKind::bad_params, "projector family does not match the model");
  const std::size_t k = pf.blocks();
  RateFunctionTable t;
  t.N = N;
  t.evaluation = choose_evaluation(model, pf, invariance_tol);
  const bool projected = t.evaluation == Evaluation::projected;
  const double inv_n = 1.0 / static_cast<double>(N);
  const auto table = kernels::evaluate_rows(
      model.points(), 2 * k,
      [&](std::size_t x, std::span<double> out) {
        for (std::size_t b = 0; b < k; ++b) {
          const Field& p = pf.projectors[b];
          walk_forward(model, x, ScaledMatrix::from(p[x]), N, projected ? &p : nullptr,
                       [&](long m, const ScaledMatrix& s) {
                         if (m == N) out[b] = inv_n * s.log_norm();
                       });
          walk_backward(model, x, ScaledMatrix::from(p[x]), N, projected ? &p : nullptr,
                        [&](long m, const ScaledMatrix& s) {
                          if (m == N) out[k + b] = -inv_n * s.log_norm();
                        });
        }
      },
      kernels::Backend::parallel);
  t.upper.assign(k, std::vector<double>(model.points()));
  t.lower.assign(k, std::vector<double>(model.points()));
  std::size_t valid = 0;
  for (std::size_t x = 0; x < model.points(); ++x) {
    for (std::size_t b = 0; b < k; ++b) {
      t.upper[b][x] = table[x * 2 * k + b];
      t.lower[b][x] = table[x * 2 * k + k + b];
    }
    if (!std::isnan(t.upper[0][x])) ++valid;
  }
  if (valid == 0) throw Error(ErrorKind::window_out_of_range, "no point has a window of length N");
  return t;
}

FunctionCheck upper_function_check(const OrbitModel& model, const ProjectorFamily& pf,
                                   std::size_t i, const std::vector<double>& g,
                                   const GridSpec& grid, const Thresholds& thresholds) {
  return function_check(model, pf, i, g, grid, thresholds, true);
}

FunctionCheck lower_function_check(const OrbitModel& model, const ProjectorFamily& pf,
                                   std::size_t i, const std::vector<double>& g,
                                   const GridSpec& grid, const Thresholds& thresholds) {
  return function_check(model, pf, i, g, grid, thresholds, false);
}

long default_slope_window(double alpha, double K) {
  if (!(alpha > 0.0)) throw Error(ErrorKind::bad_params, "slope window needs a positive rate");
  const double lk = std::log(K);
  if (!(lk > 0.0)) return 1;
  return static_cast<long>(std::floor(2.0 * lk / alpha)) + 1;
}

SlopeReport slope_test(const RateFunctionTable& rates, double alpha_target, double K) {
  SlopeReport r;
  r.N = rates.N;
  r.alpha_target = alpha_target;
  r.K = K;
  r.N_required = alpha_target > 0.0 ? default_slope_window(alpha_target, K) : 0;
  r.window_condition = alpha_target > 0.0 &&
                       static_cast<double>(rates.N) > 2.0 * std::log(K) / alpha_target;
  r.pass = r.window_condition;
  for (std::size_t b = 0; b + 1 < rates.blocks(); ++b) {
    double worst = -inf;
    for (std::size_t x = 0; x < rates.points(); ++x)
      keep_max(worst, rates.upper[b][x] - rates.lower[b + 1][x]);
    r.max_slope.push_back(worst);
    r.margin.push_back(-alpha_target / 2.0 - worst);
    r.pass = r.pass && worst <= -alpha_target / 2.0;
  }
  return r;
}

SlopeDomination slope_implies_domination(const OrbitModel& model, const ProjectorFamily& pf,
                                         const RateFunctionTable& rates, const SlopeReport& slope,
                                         const GridSpec& grid, const Thresholds& thresholds,
                                         long L) {
  if (!slope.pass)
    throw Error(ErrorKind::precondition_failed, "slope test did not pass; domination is not implied");
  if (L < 1) throw Error(ErrorKind::bad_params, "block count must be >= 1");
  const long N = rates.N;
  const double alpha = slope.alpha_target;
  const Evaluation ev = choose_evaluation(model, pf, thresholds.invariance_tol);
  const bool projected = ev == Evaluation::projected;
  const long steps = std::max(L * N, N - 1);

  SlopeDomination out;
  out.blocks_pass = true;
  out.remainder_pass = true;
  out.remainder_excess = -inf;
  for (std::size_t b = 0; b + 1 < pf.blocks(); ++b) {
    const Field& pi = pf.projectors[b];
    const Field& pj = pf.projectors[b + 1];
    const std::size_t width = static_cast<std::size_t>(L + N);
    // out[l-1]: block l at lN; out[L+k]: remainder product at k < N.
    const auto t = kernels::reduce_rows(
        model.points(), width,
        [&](std::size_t y, std::span<double> row) {
          std::vector<double> fwd(static_cast<std::size_t>(steps) + 1, absent);
          walk_forward(model, y, ScaledMatrix::from(pi[y]), steps, projected ? &pi : nullptr,
                       [&](long m, const ScaledMatrix& s) { fwd[static_cast<std::size_t>(m)] = s.log_norm(); });
          walk_backward(model, y, ScaledMatrix::from(pj[y]), steps, projected ? &pj : nullptr,
                        [&](long m, const ScaledMatrix& s) {
                          const double v = fwd[static_cast<std::size_t>(m)] + s.log_norm();
                          if (m > 0 && m % N == 0 && m / N <= L) row[static_cast<std::size_t>(m / N - 1)] = v;
                          if (m < N) row[static_cast<std::size_t>(L + m)] = v;
                        });
        },
        kernels::Reduce::max, grid.backend);

    for (long l = 1; l <= L; ++l) {
      BlockCheck c;
      c.pair = b + 1;
      c.l = l;
      c.log_lhs = t[static_cast<std::size_t>(l - 1)];
      c.log_rhs = -0.5 * static_cast<double>(l * N) * alpha;
      if (std::isnan(c.log_lhs)) continue;  // window leaves a segment
      c.pass = c.log_lhs <= c.log_rhs + 1e-9;
      out.blocks_pass = out.blocks_pass && c.pass;
      out.blocks.push_back(c);
    }
    double log_ct = -inf;
    for (long k = 0; k < N; ++k) keep_max(log_ct, t[static_cast<std::size_t>(L + k)]);
    out.remainder_constant.push_back(std::exp(log_ct));

    const auto pair_cert = projector_product_test(model, pf, static_cast<int>(b + 1), grid, thresholds);
    for (std::size_t j = 0; j < pair_cert.m_values.size(); ++j) {
      const long m = pair_cert.m_values[j];
      const long k = m % N;
      const double bound = log_ct - 0.5 * alpha * static_cast<double>(m - k);
      const double excess = pair_cert.log_d[j] - bound;
      out.remainder_excess = std::max(out.remainder_excess, excess);
      if (excess > 1e-9) out.remainder_pass = false;
    }
  }
  out.certificate = projector_product_all(model, pf, grid, thresholds);
  out.certificate.criterion = "slope";
  out.pass = out.blocks_pass && out.remainder_pass && out.certificate.pass;
  return out;
}

GapCheck adjacent_gap_check(const OrbitModel& model, const RateFunctionTable& rates,
                            const std::vector<double>& K, double alpha, long m_hi) {
  GapCheck out;
  if (K.size() != rates.blocks()) throw Error(ErrorKind::bad_params, "one constant per bundle expected");
  for (std::size_t b = 1; b < rates.blocks(); ++b) {
    std::vector<double> h(rates.points());
    for (std::size_t x = 0; x < rates.points(); ++x) h[x] = rates.upper[b][x] - rates.upper[b - 1][x];
    const double floor0 = -2.0 * std::log(K[b]);
    double worst = inf;
    for (std::size_t y = 0; y < model.points(); ++y) {
      const auto hs = along_orbit(model, y, m_hi, h);
      double sum = 0.0;
      for (std::size_t j = 0; j < hs.size(); ++j) {
        sum += hs[j];
        if (std::isnan(sum)) break;
        const double m = static_cast<double>(j + 1);
        worst = std::min(worst, sum - (floor0 + 0.5 * alpha * m));
      }
    }
    out.min_excess.push_back(worst);
    out.pass = out.pass && worst >= -1e-9;
  }
  return out;
}

}  // namespace domcheck
