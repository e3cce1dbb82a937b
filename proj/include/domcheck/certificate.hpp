#pragma once

#include "domcheck/kernels.hpp"
#include "domcheck/propagate.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace domcheck {

/// Decision rule constants, surfaced in every certificate.
struct Thresholds {
  double alpha_min = 1e-3;
  double fit_slack = 0.1;
  double gamma_min = 1e-3;
  double invariance_tol = 1e-8;
  double growth_tol = 0.05;  // K(doubled range) / K <= 1 + growth_tol
};

/// Window grid shared by the criteria. Tables span m = 1..m_hi; constants
/// are fitted on [m_lo, m_hi]. The (x, n) scan is only used for literal
/// evaluation; unset bounds default to one full period (periodic) or every
/// admissible offset (segment).
struct GridSpec {
  long m_lo = 5;
  long m_hi = 30;
  std::optional<long> n_lo;
  std::optional<long> n_hi;
  kernels::Backend backend = kernels::Backend::parallel;
};

/// Default (x, n) scan bounds for a model.
std::pair<long, long> offset_range(const OrbitModel& model, const GridSpec& grid);

struct LogLinearFit {
  double C = 1.0;          // max(1, exp(intercept))
  double alpha = 0.0;      // -slope
  double residual = 0.0;   // RMS of log residuals
  double intercept = 0.0;  // unclamped log C
};

/// Least squares of log_values[j] against m_values[j] for m in [lo, hi].
LogLinearFit fit_log_linear(const std::vector<long>& m_values,
                            const std::vector<double>& log_values, long lo, long hi);

struct DominationCertificate {
  std::string criterion;
  std::pair<int, int> pair{0, 0};  // 1-based bundle indices, {0,0} when not applicable
  std::vector<long> m_values;
  std::vector<double> log_d;       // log D(m)
  double C = 1.0;
  double alpha = 0.0;
  double residual = 0.0;
  double beta = 0.0;               // drift bound of the model
  double envelope = 0.0;           // max_{m in fit range} D(m) e^{alpha m} / C
  double k_envelope = 1.0;         // max over the whole table of D(m) e^{alpha m}
  long fit_lo = 0;
  long fit_hi = 0;
  bool vacuous = false;
  bool pass = false;
  Evaluation evaluation = Evaluation::projected;
  Thresholds thresholds;

  double d(std::size_t j) const;
};

/// Fits constants and applies: pass iff alpha >= alpha_min and the envelope
/// over the fit range is <= 1 + fit_slack.
DominationCertificate make_certificate(std::string criterion, std::pair<int, int> pair,
                                       std::vector<long> m_values, std::vector<double> log_d,
                                       const GridSpec& grid, const Thresholds& thresholds,
                                       double beta, Evaluation evaluation);

DominationCertificate vacuous_certificate(std::string criterion, std::pair<int, int> pair,
                                          const Thresholds& thresholds, double beta);

/// Elementwise max of tables over the same m values (for all-pairs reports).
DominationCertificate combine_max(std::string criterion, const std::vector<DominationCertificate>& certs,
                                  const GridSpec& grid, const Thresholds& thresholds);

}  // namespace domcheck
