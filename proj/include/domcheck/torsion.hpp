#pragma once

#include "domcheck/certificate.hpp"
#include "domcheck/criteria.hpp"
#include "domcheck/model.hpp"
#include "domcheck/rates.hpp"
#include "domcheck/splitting.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace domcheck {

struct ScalingFamily {
  double lambda = 0.0;
  std::string provenance = "user-supplied";  // or "constructed-from-rates"
  std::vector<std::vector<double>> p;         // p[i][x] > 0, i 0-based

  std::size_t blocks() const { return p.size(); }
  std::size_t points() const { return p.empty() ? 0 : p.front().size(); }
  /// log p_i over points.
  std::vector<double> log_p(std::size_t i) const;
};

/// p_i(x) = exp(-rho+_{N,i}(x) - lambda). Throws LambdaOutOfRange unless
/// 0 < lambda < alpha / 2.
ScalingFamily build_scaling(const RateFunctionTable& rates, double lambda, double alpha);

/// The cocycle generated by A_i(x) = p_i(x) A(x), i 0-based.
OrbitModel scaled_model(const OrbitModel& model, const ScalingFamily& scaling, std::size_t i);

/// A_i^n(x) = (prod_{k<n} p_i(f^k x)) Df^n(x) for n >= 0 and
/// A_i^{-m}(x) = (prod_{k=1}^{m} 1/p_i(f^{-k} x)) Df^{-m}(x), the exact inverse
/// of A_i^m(f^{-m} x).
ScaledMatrix scaled_product(const OrbitModel& model, const ScalingFamily& scaling, std::size_t i,
                            std::size_t x, long n);

/// increasing: sum (q_{i+1} - q_i) >= -beta + gamma m  (as printed)
/// decreasing: sum (q_i - q_{i+1}) >= -beta + gamma m  (constructed scalings)
enum class SeparationOrder { increasing, decreasing };

const char* to_string(SeparationOrder order);

struct SeparationCertificate {
  double beta = 0.0;               // offset >= 0
  double gamma = 0.0;              // fitted rate
  std::vector<long> m_values;
  std::vector<double> min_sums;    // min over pairs and windows of length m
  SeparationOrder order = SeparationOrder::decreasing;
  double gamma_min = 1e-3;
  bool pass = false;
};

/// gamma is the least-squares slope of min_sums over the fit range; beta is
/// the smallest offset with every window sum >= -beta + gamma m (m = 1..m_hi).
SeparationCertificate separation_test(const OrbitModel& model,
                                      const std::vector<std::vector<double>>& q,
                                      SeparationOrder order, const GridSpec& grid,
                                      const Thresholds& thresholds = {});

/// Separation of log p_1, ..., log p_k in decreasing order.
SeparationCertificate separation_test(const OrbitModel& model, const ScalingFamily& scaling,
                                      const GridSpec& grid, const Thresholds& thresholds = {});

struct TorsionForward {
  double lambda = 0.0;
  double alpha = 0.0;
  ScalingFamily scaling;
  std::vector<HyperbolicityCertificate> per_index;  // i = 1..k
  std::vector<Field> q;                             // Q_i used for index i
  bool pass = false;
};

/// For each i, the cocycle p_i Df with Q_i must be hyperbolic with stable
/// rate >= lambda - fit_slack and unstable rate >= alpha/2 - lambda - fit_slack
/// (unstable side vacuous for i = k). Throws CertificateMismatch otherwise.
TorsionForward torsion_forward(const OrbitModel& model, const ProjectorFamily& pf,
                               const RateFunctionTable& rates, double lambda, double alpha,
                               const GridSpec& grid, const Thresholds& thresholds = {});

struct TorsionReverse {
  ProjectorFamily family;          // P_i = Q_i - Q_{i-1}
  double C = 1.0;                  // common hyperbolicity constant
  double alpha = 0.0;              // common hyperbolicity rate
  double max_excess_single = 0.0;  // max log excess over 2 C^2 e^{-m alpha}
  double max_excess_product = 0.0; // max log excess over 4 C^4 e^{-2 m alpha}
  DominationCertificate certificate;
  bool pass = false;
};

/// Rebuilds the splitting from nested hyperbolic projectors and certifies
/// its domination. Throws NestingViolation, ProjectorInvariantViolation, or
/// CertificateMismatch.
TorsionReverse torsion_reverse(const OrbitModel& model, const ScalingFamily& scaling,
                               const SeparationCertificate& separation, const std::vector<Field>& q,
                               const GridSpec& grid, const Thresholds& thresholds = {});

}  // namespace domcheck
