#pragma once

#include "domcheck/model.hpp"
#include "domcheck/splitting.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace domcheck::zoo {

struct Params {
  std::vector<double> mu;        // diagonal entries (diagonal)
  long q = 0;                    // period (rotation-normal, elliptic, random-triangular)
  long step = 0;                 // base rotation step p of x -> x + p mod q
  std::uint64_t seed = 1;        // random-triangular
  double off_diagonal = 0.25;    // random-triangular, entries uniform in [-b, b]
};

/// Expected verdicts plus closed-form constants where they exist.
struct Oracle {
  bool dominated = false;
  bool hyperbolic = false;
  bool reducible = false;
  std::optional<double> alpha_domination;
  std::optional<double> alpha_hyperbolic;
  std::optional<double> C;
  std::optional<double> K;
  std::optional<std::size_t> hyperbolic_index;  // clustered index of the stable bundle
};

struct ZooModel {
  std::string name;
  std::string description;
  OrbitModel model;
  std::vector<int> dims;                 // default splitting dims
  std::optional<Splitting> exact;        // analytic splitting, if any
  std::string default_splitting;         // "exact" | "coordinate" | "estimate"
  /// Per-point invariant splittings with point-dependent dims, one
  /// single-point model each (mismatched only).
  std::vector<std::pair<OrbitModel, Splitting>> per_point;
  Oracle oracle;
};

/// Throws UnknownModel or BadParams.
ZooModel make_model(const std::string& name, const Params& params = {});

/// Catalog names in a fixed order.
std::vector<std::string> names();

/// Default parameters of a catalog entry.
Params default_params(const std::string& name);

}  // namespace domcheck::zoo
