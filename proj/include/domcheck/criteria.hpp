#pragma once

#include "domcheck/certificate.hpp"
#include "domcheck/model.hpp"
#include "domcheck/propagate.hpp"
#include "domcheck/splitting.hpp"

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace domcheck {

/// Growth-ratio test for bundles (i, j), 1-based, i < j:
///   D(m) = sup ||Df^{n+m} P_i u|| ||Df^n P_j v|| / (||Df^n P_i u|| ||Df^{n+m} P_j v||).
/// The supremum over u, v is exact: sigma_max of the cocycle restricted to
/// E_i over sigma_min restricted to E_j, on orthonormal bundle bases.
DominationCertificate ratio_domination_test(const OrbitModel& model, const ProjectorFamily& pf,
                                            std::pair<int, int> pair, const GridSpec& grid,
                                            const Thresholds& thresholds = {});

/// Elementwise max of the ratio tables over all pairs i < j.
DominationCertificate ratio_domination_all(const OrbitModel& model, const ProjectorFamily& pf,
                                           const GridSpec& grid, const Thresholds& thresholds = {});

/// Projector-product test for bundles (i, i+1), 1-based:
///   D(m) = sup ||Df^{n+m} P_i Df^{-n}|| ||Df^n P_{i+1} Df^{-(n+m)}||.
DominationCertificate projector_product_test(const OrbitModel& model, const ProjectorFamily& pf,
                                             int i, const GridSpec& grid,
                                             const Thresholds& thresholds = {});

/// Elementwise max over the adjacent pairs; vacuous pass when k = 1.
DominationCertificate projector_product_all(const OrbitModel& model, const ProjectorFamily& pf,
                                            const GridSpec& grid, const Thresholds& thresholds = {});

/// Non-adjacent pairs: the ratio table of (i, j) is bounded by the product of
/// the adjacent projector-product tables i..j-1 at every m.
struct PairInduction {
  int i = 0;
  int j = 0;
  double max_log_excess = 0.0;  // max_m log D_ratio(i,j) - sum_l log D_proj(l,l+1)
  double alpha_ratio = 0.0;
  double alpha_chain = 0.0;     // sum of adjacent fitted rates
  bool pass = true;
};

struct PairsReport {
  std::vector<PairInduction> pairs;
  bool pass = true;
};

PairsReport full_pairs_report(const OrbitModel& model, const ProjectorFamily& pf,
                              const GridSpec& grid, const Thresholds& thresholds = {});

struct ReducibilityCertificate {
  double K = 1.0;           // sup over the scanned range
  double K_doubled = 1.0;   // sup over the doubled range
  long n_lo = 0;
  long n_hi = 0;
  bool clustered = false;   // Q_i instead of P_i
  bool invariant = true;    // family passes check_invariance
  double invariance_residual = 0.0;
  bool pass = false;
  Evaluation evaluation = Evaluation::projected;
};

/// K = sup_{x, n, i} ||Df^n(x) P_i(x) Df^{-n}(f^n x)||. Periodic models scan
/// n in [-r, r], segments n in [0, r]. Pass iff the family is invariant, K is
/// finite, and K(2r) / K <= 1 + growth_tol. The default r is 30.
ReducibilityCertificate reducibility_test(const OrbitModel& model, const ProjectorFamily& pf,
                                          std::optional<long> range = std::nullopt,
                                          bool clustered = false,
                                          kernels::Backend backend = kernels::Backend::parallel,
                                          const Thresholds& thresholds = {});

struct Lemma2Report {
  long m = 0;
  double C = 1.0;
  double alpha = 0.0;
  double beta = 0.0;
  double bound = 0.0;  // 2 beta^{-2m} (C^{-1} e^{m alpha} - 1)^{-1}
  double K = 0.0;      // measured clustered reducibility constant
  double margin = 0.0; // bound - K
  bool pass = false;
};

/// Smallest m >= 1 with C^{-1} e^{m alpha} > 1.
long smallest_valid_m(double C, double alpha);

/// Throws InvalidM when C^{-1} e^{m alpha} <= 1 and PreconditionFailed when
/// the ratio certificate did not pass. `beta` defaults to the certificate's.
Lemma2Report lemma2_bound_check(const OrbitModel& model, const ProjectorFamily& pf,
                                const DominationCertificate& ratio_cert, long m,
                                std::optional<double> beta = std::nullopt,
                                kernels::Backend backend = kernels::Backend::parallel);

/// Closed-form bound, exposed for tests.
double lemma2_bound(double C, double alpha, double beta, long m);

struct HyperbolicityCertificate {
  std::size_t index = 0;  // clustered index s, Q = P_1 + ... + P_s
  int stable_dim = 0;
  DominationCertificate stable;    // D_s(n) = sup_x ||Df^n(x) Q(x)||
  DominationCertificate unstable;  // D_u(n) = sup_x ||(I - Q(x)) Df^{-n}(f^n x)||
  bool pass = false;
};

/// Hyperbolicity with stable projector field q (one matrix per point).
/// Q = 0 makes the stable side vacuous, Q = I the unstable side.
HyperbolicityCertificate hyperbolicity_test(const OrbitModel& model, const Field& q,
                                            const GridSpec& grid, const Thresholds& thresholds = {});

/// Q = Q_s of the family, s in 0..k (Q_0 = 0).
HyperbolicityCertificate hyperbolicity_test(const OrbitModel& model, const ProjectorFamily& pf,
                                            std::size_t s, const GridSpec& grid,
                                            const Thresholds& thresholds = {});

struct HyperbolicityScan {
  std::vector<HyperbolicityCertificate> per_index;  // s = 0..k
  std::optional<std::size_t> hyperbolic_index;      // first passing s
  bool pass = false;
};

HyperbolicityScan hyperbolicity_scan(const OrbitModel& model, const ProjectorFamily& pf,
                                     const GridSpec& grid, const Thresholds& thresholds = {});

}  // namespace domcheck
