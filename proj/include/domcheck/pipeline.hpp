#pragma once

#include "domcheck/certificate.hpp"
#include "domcheck/io.hpp"
#include "domcheck/zoo.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace domcheck {

enum class SplittingSource { automatic, exact, coordinate, file, estimate };

struct VerifyRequest {
  std::optional<std::string> zoo_name;
  zoo::Params zoo_params;
  std::optional<std::string> model_file;

  SplittingSource splitting_source = SplittingSource::automatic;
  std::optional<std::string> splitting_file;
  std::vector<int> estimate_dims;
  long estimate_window = 40;
  double gap_threshold = 1.0 + 1e-3;

  /// reducibility, ratio, projector, slope, torsion, hyperbolicity.
  std::set<std::string> criteria;
  GridSpec grid;
  std::optional<long> reducibility_range;
  Thresholds thresholds;
  std::optional<double> lambda;   // empty = alpha / 4
  std::optional<long> slope_window;
  std::uint64_t seed = 0;
  bool expect_pass = false;
};

/// Every criterion name accepted by --criteria, in dependency order.
const std::vector<std::string>& criterion_names();

/// Parses "all" or a comma list; throws BadParams on unknown names.
std::set<std::string> parse_criteria(const std::string& list);

struct VerifyResult {
  io::Json bundle;
  std::optional<std::string> rates_csv;
  int exit_code = 0;  // 0 ok, 2 criteria disagree, 3 verdict differs from expectation
};

/// Runs the requested criteria in dependency order and assembles the bundle.
/// Module errors propagate as domcheck::Error.
VerifyResult run_verify(const VerifyRequest& request);

enum class ScanAxis { lambda, window, dims };

struct ScanRequest {
  VerifyRequest base;
  ScanAxis axis = ScanAxis::lambda;
  long lambda_points = 16;
  long n_lo = 1;
  long n_hi = 16;
};

struct ScanResult {
  std::string csv;
  int exit_code = 0;  // 1 when any row hit an error
};

/// lambda axis: lambda,i,stable_rate,unstable_rate,verdict
/// window axis: N,pair,max_slope,margin,alpha_target,verdict
/// dims axis:   dims,ratio_alpha,projector_alpha,verdict
ScanResult run_scan(const ScanRequest& request);

/// {"error": {"kind", "message"}}.
io::Json error_json(const std::exception& e);

}  // namespace domcheck
