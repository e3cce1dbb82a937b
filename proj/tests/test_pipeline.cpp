#include "domcheck/error.hpp"
#include "domcheck/io.hpp"
#include "domcheck/pipeline.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace domcheck;

namespace {

VerifyRequest zoo_request(const std::string& name, const std::string& criteria) {
  VerifyRequest r;
  r.zoo_name = name;
  r.criteria = parse_criteria(criteria);
  return r;
}

std::string verdict(const io::Json& bundle, const char* c) { return bundle["verdicts"][c]["verdict"]; }

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("criteria lists") {
  CHECK(parse_criteria("all").size() == 6);
  CHECK(parse_criteria("ratio,projector") == std::set<std::string>{"ratio", "projector"});
  CHECK_THROWS_AS(parse_criteria("ratio,bogus"), Error);
  CHECK_THROWS_AS(parse_criteria(""), Error);
}

TEST_CASE("verify examples") {
  auto res = run_verify(zoo_request("diagonal", "all"));
  CHECK(res.exit_code == 0);
  const auto& b = res.bundle;
  CHECK(b["certificates"]["ratio"]["alpha"].get<double>() == doctest::Approx(std::log(4.0)).epsilon(1e-10));
  CHECK(b["certificates"]["projector"]["alpha"].get<double>() == doctest::Approx(std::log(4.0)).epsilon(1e-10));
  CHECK(b["summary"]["classification"] == "hyperbolic");
  CHECK(res.rates_csv.has_value());

  res = run_verify(zoo_request("rotation-normal", "hyperbolicity"));
  CHECK(res.exit_code == 0);
  CHECK(verdict(res.bundle, "hyperbolicity") == "fail");
  CHECK(res.bundle["expectation"]["criteria"]["hyperbolicity"]["match"] == true);

  auto el = zoo_request("elliptic", "ratio,projector");
  el.zoo_params.q = 89;
  el.zoo_params.step = 14;
  res = run_verify(el);
  CHECK(res.exit_code == 0);
  CHECK(verdict(res.bundle, "ratio") == "fail");
  CHECK(verdict(res.bundle, "projector") == "fail");
  CHECK(res.bundle["summary"]["agreement"] == true);
}

TEST_CASE("mismatched model is reducible but not dominated") {
  const auto res = run_verify(zoo_request("mismatched", "all"));
  CHECK(res.exit_code == 0);
  CHECK(res.bundle["summary"]["classification"] == "reducible, not dominated");
  CHECK(res.bundle["splitting"]["diagnosis"]["kind"] == "DimensionMismatch");
  CHECK(verdict(res.bundle, "reducibility") == "pass");
  CHECK(res.bundle["certificates"]["reducibility"]["K"].get<double>() <= 1.0 + 1e-10);
}

TEST_CASE("exit codes") {
  // Expectation mismatch: elliptic cannot pass when every verdict is expected to.
  auto el = zoo_request("elliptic", "ratio");
  el.zoo_params.q = 13;
  el.zoo_params.step = 2;
  el.expect_pass = true;
  CHECK(run_verify(el).exit_code == 3);

  // A user-chosen splitting carries no zoo expectation.
  auto coord = zoo_request("cat-map", "ratio,projector");
  coord.splitting_source = SplittingSource::coordinate;
  const auto rc = run_verify(coord);
  CHECK(rc.exit_code == 0);
  CHECK(rc.bundle["expectation"]["source"] == "none");
  CHECK(rc.bundle["splitting"]["evaluation"] == "literal");

  // Criteria that disagree are reported with exit 2: a tight envelope slack
  // rejects only the ratio certificate of random-triangular (envelope ~ 1.004).
  auto dis = zoo_request("random-triangular", "ratio,projector");
  dis.thresholds.fit_slack = 0.0038;
  const auto rd = run_verify(dis);
  const bool split = verdict(rd.bundle, "ratio") != verdict(rd.bundle, "projector");
  CHECK(split);
  CHECK(rd.exit_code == 2);
  CHECK(rd.bundle["summary"]["agreement"] == false);

  VerifyRequest none;
  none.criteria = parse_criteria("ratio");
  CHECK_THROWS_AS(run_verify(none), Error);
}

TEST_CASE("bundles are deterministic and round-trip") {
  auto r = zoo_request("cat-map", "all");
  r.seed = 7;
  const auto a = io::dump(run_verify(r).bundle);
  const auto b = io::dump(run_verify(r).bundle);
  CHECK(a == b);
  CHECK(io::dump(io::parse(a)) == a);
  CHECK(io::parse(a)["seed"] == 7);
  auto s = r;
  s.grid.backend = kernels::Backend::serial;
  CHECK(io::dump(run_verify(s).bundle) == a);
}

TEST_CASE("scan examples") {
  ScanRequest lam;
  lam.base = zoo_request("diagonal", "all");
  lam.axis = ScanAxis::lambda;
  const auto l = run_scan(lam);
  CHECK(l.exit_code == 0);
  const auto rows = csv_rows(l.csv);
  CHECK(rows[0] == std::vector<std::string>{"lambda", "i", "stable_rate", "unstable_rate", "verdict"});
  int seen = 0;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (rows[k][1] != "1") continue;
    ++seen;
    const double lambda = std::stod(rows[k][0]);
    CHECK(lambda > 0.0);
    CHECK(lambda < std::log(2.0));
    CHECK(std::stod(rows[k][2]) == doctest::Approx(lambda).epsilon(1e-10));
    CHECK(std::stod(rows[k][3]) == doctest::Approx(std::log(4.0) - lambda).epsilon(1e-10));
    CHECK(rows[k][4] == "pass");
  }
  CHECK(seen == 16);

  ScanRequest win;
  win.base = zoo_request("cat-map", "all");
  win.axis = ScanAxis::window;
  win.n_lo = 1;
  win.n_hi = 12;
  const auto w = csv_rows(run_scan(win).csv);
  const double lam_plus = (3.0 + std::sqrt(5.0)) / 2.0;
  for (std::size_t k = 1; k < w.size(); ++k)
    CHECK(std::stod(w[k][2]) == doctest::Approx(-2.0 * std::log(lam_plus)).epsilon(1e-12));

  ScanRequest dims;
  dims.base = zoo_request("random-triangular", "all");
  dims.axis = ScanAxis::dims;
  const auto dr = csv_rows(run_scan(dims).csv);
  CHECK(dr.size() == 4);  // 1-2, 2-1, 1-1-1
}

TEST_CASE("scan on a short segment reports per-row window errors") {
  const std::string model = R"({"dimension": 2, "structure": "segment", "points": 5, "base_map": [1, 2, 3, 4],
                                "generators": [[0.5,0,0,2],[0.5,0,0,2],[0.5,0,0,2],[0.5,0,0,2],[0.5,0,0,2]]})";
  const std::string path = "short_segment_model.json";
  io::write_file(path, model);
  ScanRequest s;
  s.base.model_file = path;
  s.base.splitting_source = SplittingSource::coordinate;
  s.base.estimate_dims = {1, 1};
  s.base.criteria = parse_criteria("all");
  s.axis = ScanAxis::window;
  s.n_lo = 1;
  s.n_hi = 8;
  const auto res = run_scan(s);
  CHECK(res.exit_code == 1);
  const auto rows = csv_rows(res.csv);
  int markers = 0;
  for (const auto& r : rows)
    if (r.back() == "error:WindowOutOfRange") ++markers;
  CHECK(markers == 4);
  std::remove(path.c_str());
}

TEST_CASE("error JSON") {
  const auto j = error_json(Error(ErrorKind::unknown_model, "nope"));
  CHECK(j["error"]["kind"] == "UnknownModel");
  CHECK(j["error"]["message"] == "nope");
}
