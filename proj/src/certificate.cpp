#include "domcheck/certificate.hpp"

#include "domcheck/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace domcheck {

std::pair<long, long> offset_range(const OrbitModel& model, const GridSpec& grid) {
  const long p = static_cast<long>(model.points());
  long lo = 0;
  long hi = p - 1;
  if (model.structure() == Structure::segment) lo = -(p - 1);
  return {grid.n_lo.value_or(lo), grid.n_hi.value_or(hi)};
}

LogLinearFit fit_log_linear(const std::vector<long>& m_values,
                            const std::vector<double>& log_values, long lo, long hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t count = 0;
  for (std::size_t j = 0; j < m_values.size(); ++j) {
    const long m = m_values[j];
    if (m < lo || m > hi) continue;
    const double x = static_cast<double>(m);
    const double y = log_values[j];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  LogLinearFit fit;
  if (count == 0) throw Error(ErrorKind::bad_params, "empty fit range");
  const double n = static_cast<double>(count);
  const double denom = n * sxx - sx * sx;
  const double slope = count > 1 ? (n * sxy - sx * sy) / denom : 0.0;
  const double intercept = (sy - slope * sx) / n;
  double ss = 0;
  for (std::size_t j = 0; j < m_values.size(); ++j) {
    const long m = m_values[j];
    if (m < lo || m > hi) continue;
    const double r = log_values[j] - (intercept + slope * static_cast<double>(m));
    ss += r * r;
  }
  fit.alpha = -slope;
  fit.intercept = intercept;
  fit.C = std::max(1.0, std::exp(intercept));
  fit.residual = std::sqrt(ss / n);
  return fit;
}

double DominationCertificate::d(std::size_t j) const { return std::exp(log_d[j]); }

DominationCertificate make_certificate(std::string criterion, std::pair<int, int> pair,
                                       std::vector<long> m_values, std::vector<double> log_d,
                                       const GridSpec& grid, const Thresholds& thresholds,
                                       double beta, Evaluation evaluation) {
  DominationCertificate c;
  c.criterion = std::move(criterion);
  c.pair = pair;
  c.m_values = std::move(m_values);
  c.log_d = std::move(log_d);
  c.beta = beta;
  c.evaluation = evaluation;
  c.thresholds = thresholds;
  c.fit_lo = grid.m_lo;
  c.fit_hi = grid.m_hi;

  bool finite = true;
  for (std::size_t j = 0; j < c.m_values.size(); ++j)
    if (c.m_values[j] >= grid.m_lo && c.m_values[j] <= grid.m_hi && !std::isfinite(c.log_d[j]))
      finite = false;
  if (!finite) {
    c.alpha = -std::numeric_limits<double>::infinity();
    c.C = std::numeric_limits<double>::infinity();
    c.envelope = std::numeric_limits<double>::infinity();
    c.k_envelope = std::numeric_limits<double>::infinity();
    c.residual = std::numeric_limits<double>::quiet_NaN();
    c.pass = false;
    return c;
  }

  const LogLinearFit fit = fit_log_linear(c.m_values, c.log_d, grid.m_lo, grid.m_hi);
  c.C = fit.C;
  c.alpha = fit.alpha;
  c.residual = fit.residual;
  const double log_c = std::log(c.C);
  double env = -std::numeric_limits<double>::infinity();
  double kenv = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < c.m_values.size(); ++j) {
    const double v = c.log_d[j] + c.alpha * static_cast<double>(c.m_values[j]);
    kenv = std::max(kenv, v);
    if (c.m_values[j] >= grid.m_lo && c.m_values[j] <= grid.m_hi) env = std::max(env, v - log_c);
  }
  c.envelope = std::exp(env);
  c.k_envelope = std::max(1.0, std::exp(kenv));
  c.pass = c.alpha >= thresholds.alpha_min && c.envelope <= 1.0 + thresholds.fit_slack;
  return c;
}

DominationCertificate vacuous_certificate(std::string criterion, std::pair<int, int> pair,
                                          const Thresholds& thresholds, double beta) {
  DominationCertificate c;
  c.criterion = std::move(criterion);
  c.pair = pair;
  c.vacuous = true;
  c.pass = true;
  c.beta = beta;
  c.thresholds = thresholds;
  c.alpha = std::numeric_limits<double>::infinity();
  c.envelope = 0.0;
  return c;
}

DominationCertificate combine_max(std::string criterion, const std::vector<DominationCertificate>& certs,
                                  const GridSpec& grid, const Thresholds& thresholds) {
  std::vector<const DominationCertificate*> live;
  for (const auto& c : certs)
    if (!c.vacuous) live.push_back(&c);
  if (live.empty())
    return vacuous_certificate(std::move(criterion), {0, 0}, thresholds,
                               certs.empty() ? 0.0 : certs.front().beta);
  std::vector<long> m = live.front()->m_values;
  std::vector<double> v(m.size(), -std::numeric_limits<double>::infinity());
  Evaluation ev = Evaluation::projected;
  for (const auto* c : live) {
    if (c->m_values != m) throw Error(ErrorKind::bad_params, "tables over different windows");
    for (std::size_t j = 0; j < m.size(); ++j) v[j] = std::max(v[j], c->log_d[j]);
    if (c->evaluation == Evaluation::literal) ev = Evaluation::literal;
  }
  return make_certificate(std::move(criterion), {0, 0}, std::move(m), std::move(v), grid,
                          thresholds, live.front()->beta, ev);
}

}  // namespace domcheck
