#pragma once

#include "domcheck/certificate.hpp"
#include "domcheck/model.hpp"
#include "domcheck/propagate.hpp"
#include "domcheck/splitting.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace domcheck {

struct BoundedSeries {
  std::vector<double> values;  // p(0), p(1), ...
  double bound = 0.0;          // ||p||, defaults to max |p(k)|

  static BoundedSeries of(std::vector<double> values);
};

/// p_N(k) = (1/N) sum_{j<N} p(k+j) for every k with a full window.
std::vector<double> window_average(const BoundedSeries& s, long N);

struct AveragingCheck {
  double measured = 0.0;  // |sum_{k=n}^{n+m-1} (p(k) - p_N(k))|
  double limit = 0.0;     // ||p|| N
  bool pass = false;      // strict: measured < limit, or measured == 0 when ||p|| = 0
};

/// Throws WindowOutOfRange unless k..k+N-1 exists for every k in [n, n+m-1].
AveragingCheck averaging_bound_check(const BoundedSeries& s, long N, long n, long m);

/// Rate functions of window N. Bundle b (0-based) stores
///   upper[b][x] = (1/N) log ||Df^N(x) P_b(x)||             (rho+ of E_b)
///   lower[b][x] = -(1/N) log ||P_b(x) Df^{-N}(f^N x)||      (rho- of the pair below E_b)
/// so the slope of the pair (b, b+1) is upper[b] - lower[b+1].
/// Points without a forward window of length N hold NaN.
struct RateFunctionTable {
  long N = 1;
  std::vector<std::vector<double>> upper;
  std::vector<std::vector<double>> lower;
  Evaluation evaluation = Evaluation::projected;

  std::size_t blocks() const { return upper.size(); }
  std::size_t points() const { return upper.empty() ? 0 : upper.front().size(); }
};

RateFunctionTable compute_rates(const OrbitModel& model, const ProjectorFamily& pf, long N,
                                double invariance_tol = 1e-8);

struct FunctionCheck {
  std::size_t bundle = 0;  // 1-based
  bool upper = true;
  double K = 0.0;          // sup over m in [1, m_hi]
  double K_doubled = 0.0;  // sup over m in [1, 2 m_hi]
  long m_hi = 0;
  bool pass = false;
};

/// ||Df^{n+m} P_i Df^{-n}|| <= K exp(sum_{k=n}^{n+m-1} g(f^k x)).
/// Pass iff K is finite and K_doubled / K <= 1 + growth_tol.
FunctionCheck upper_function_check(const OrbitModel& model, const ProjectorFamily& pf,
                                   std::size_t i, const std::vector<double>& g,
                                   const GridSpec& grid, const Thresholds& thresholds = {});

/// ||Df^n P_i Df^{-(n+m)}|| <= K exp(-sum_{k=n}^{n+m-1} g(f^k x)).
FunctionCheck lower_function_check(const OrbitModel& model, const ProjectorFamily& pf,
                                   std::size_t i, const std::vector<double>& g,
                                   const GridSpec& grid, const Thresholds& thresholds = {});

/// Smallest N >= 1 with N > 2 log(K) / alpha (N = 1 when log K <= 0).
long default_slope_window(double alpha, double K);

struct SlopeReport {
  long N = 1;
  double alpha_target = 0.0;
  double K = 1.0;
  long N_required = 1;            // default_slope_window(alpha_target, K)
  bool window_condition = true;   // N > 2 log K / alpha
  std::vector<double> max_slope;  // per adjacent pair: max_x rho+_i - rho-_i
  std::vector<double> margin;     // -alpha/2 - max_slope
  bool pass = false;
};

/// max_x (rho+_{N,i} - rho-_{N,i}) <= -alpha_target / 2 for every i < k.
SlopeReport slope_test(const RateFunctionTable& rates, double alpha_target, double K = 1.0);

struct BlockCheck {
  std::size_t pair = 0;   // 1-based i of (i, i+1)
  long l = 0;
  double log_lhs = 0.0;   // sup_x log ||Df^{lN} P_i|| ||P_{i+1} Df^{-lN}||
  double log_rhs = 0.0;   // -(l N / 2) alpha
  bool pass = false;
};

struct SlopeDomination {
  std::vector<BlockCheck> blocks;
  std::vector<double> remainder_constant;  // per pair, C~ = max_{k<N} sup ||Df^k P_i|| ||P_{i+1} Df^{-k}||
  double remainder_excess = 0.0;           // max over m of log D(m) - log(C~ e^{-alpha (m-k)/2})
  bool blocks_pass = false;
  bool remainder_pass = false;
  DominationCertificate certificate;       // projector-product certificate
  bool pass = false;
};

/// Chains the slope bound over l blocks of length N (l = 1..L) and over the
/// remainder m = lN + k, then runs the projector-product test. Throws
/// PreconditionFailed when the slope test did not pass.
SlopeDomination slope_implies_domination(const OrbitModel& model, const ProjectorFamily& pf,
                                         const RateFunctionTable& rates, const SlopeReport& slope,
                                         const GridSpec& grid, const Thresholds& thresholds = {},
                                         long L = 8);

struct GapCheck {
  std::vector<double> min_excess;  // per pair (i-1, i), i = 2..k
  bool pass = true;
};

/// Window sums of rho+_{N,i} - rho+_{N,i-1} against -2 log K_i + (alpha/2) m
/// for m = 1..m_hi; K[b] is the function-check constant of bundle b (0-based).
GapCheck adjacent_gap_check(const OrbitModel& model, const RateFunctionTable& rates,
                            const std::vector<double>& K, double alpha, long m_hi);

}  // namespace domcheck
