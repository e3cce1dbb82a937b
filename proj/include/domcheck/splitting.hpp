#pragma once

#include "domcheck/linalg.hpp"
#include "domcheck/model.hpp"

#include <cstddef>
#include <vector>

namespace domcheck {

/// Per-point bases of E_1(x) (+) ... (+) E_k(x).
struct Splitting {
  std::vector<int> dims;                   // n_1..n_k, summing to d
  std::vector<std::vector<Matrix>> bases;  // bases[point][block] is d x n_block

  std::size_t blocks() const { return dims.size(); }
  std::size_t points() const { return bases.size(); }
  /// Concatenated d x d basis at a point.
  Matrix concatenated(std::size_t point) const;
};

/// Oblique projectors P_i(x) and clustered projectors Q_i(x) = P_1 + ... + P_i.
/// Stored block-major so that one block is a field over all points.
struct ProjectorFamily {
  std::vector<int> dims;
  std::vector<std::vector<Matrix>> projectors;  // [block][point]
  std::vector<std::vector<Matrix>> clustered;   // [block][point]

  std::size_t blocks() const { return dims.size(); }
  std::size_t points() const { return projectors.empty() ? 0 : projectors.front().size(); }
  Eigen::Index dimension() const;
};

/// Builds the family from explicit projector fields (clustered sums derived).
ProjectorFamily family_from_projectors(std::vector<int> dims,
                                       std::vector<std::vector<Matrix>> projectors);

/// Two-block family (Q_i, I - Q_i) for clustered index i (1-based, 1..k-1).
ProjectorFamily clustered_pair(const ProjectorFamily& pf, std::size_t i);

/// P_i(x) = B(x) Sel_i B(x)^{-1}. Throws DegenerateSplitting when the
/// concatenated basis has condition number above 1e10.
ProjectorFamily projectors_from_bases(const Splitting& s);

/// Column spans of each P_i(x), orthonormalized.
Splitting bases_from_projectors(const ProjectorFamily& pf);

struct InvarianceReport {
  std::vector<double> per_point;  // max_i ||P_i(f x) A(x) - A(x) P_i(x)|| / ||A(x)||
  double max_residual = 0.0;
  double tolerance = 1e-8;
  bool pass = true;
};

InvarianceReport check_invariance(const OrbitModel& model, const ProjectorFamily& pf,
                                  double tolerance = 1e-8);

struct ProjectorResiduals {
  double idempotence = 0.0;       // max ||P_i^2 - P_i||
  double supplementarity = 0.0;   // max ||sum P_i - I||
  double cross = 0.0;             // max_{i != j} ||P_i P_j||
  bool ranks_match = true;        // rank(P_i) == n_i everywhere
};

ProjectorResiduals projector_residuals(const ProjectorFamily& pf);

struct EstimateOptions {
  long window = 40;              // T
  double gap_threshold = 1.0 + 1e-3;
};

/// Finite-time estimate of an invariant splitting with prescribed dims.
/// The slow flag E_1 + ... + E_i is the most contracted subspace over the
/// future window [x, f^T x]; the fast flag E_{i+1} + ... + E_k is the most
/// expanded subspace carried from f^{-T} x; blocks are their intersections.
/// Throws DimensionMismatch when some point lacks a gap at a flag index and
/// WindowOutOfRange when [x - T, x + T] is not available.
Splitting estimate_splitting(const OrbitModel& model, const std::vector<int>& dims,
                             const EstimateOptions& options = {});

/// Coordinate splitting: E_i spanned by consecutive unit vectors.
Splitting coordinate_splitting(std::size_t points, const std::vector<int>& dims);

}  // namespace domcheck
