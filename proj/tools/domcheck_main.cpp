#include "domcheck/error.hpp"
#include "domcheck/io.hpp"
#include "domcheck/kernels.hpp"
#include "domcheck/pipeline.hpp"
#include "domcheck/zoo.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>

namespace {

using namespace domcheck;

std::pair<long, long> parse_range(const std::string& text, const char* flag) {
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) throw std::invalid_argument(text);
    return {std::stol(text.substr(0, colon)), std::stol(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw Error(ErrorKind::bad_params, std::string(flag) + " expects A:B, got '" + text + "'");
  }
}

std::vector<int> parse_dims(const std::string& text) {
  std::vector<int> dims;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      dims.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw Error(ErrorKind::bad_params, "--estimate expects n1,n2[,..], got '" + text + "'");
    }
  }
  return dims;
}

// Options shared by verify and scan.
struct Common {
  std::string model_file, zoo, splitting_file, estimate, criteria = "all", n_range, m_range, lambda = "auto";
  std::string splitting_kind;
  long window = 40;
  double alpha_min = 1e-3, fit_slack = 0.1, gamma_min = 1e-3, invariance_tol = 1e-8, gap = 1.0 + 1e-3;
  long reducibility_range = 0;
  long q = 0, step = 0;
  std::string mu;
  std::uint64_t seed = 0;
  bool serial = false;

  void attach(CLI::App* app) {
    app->add_option("--model", model_file, "model JSON file");
    app->add_option("--zoo", zoo, "built-in model name (see `zoo list`)");
    app->add_option("--splitting", splitting_file, "splitting JSON file");
    app->add_option("--splitting-source", splitting_kind, "exact | coordinate | estimate (default: per model)");
    app->add_option("--estimate", estimate, "estimate a splitting with dims n1,n2[,..]");
    app->add_option("--window", window, "estimation window T")->capture_default_str();
    app->add_option("--gap-threshold", gap, "singular value gap threshold")->capture_default_str();
    app->add_option("--criteria", criteria,
                    "comma list of reducibility,ratio,projector,slope,torsion,hyperbolicity or all")
        ->capture_default_str();
    app->add_option("--n-range", n_range, "base offsets A:B of the literal grid");
    app->add_option("--m-range", m_range, "fit range A:B (table spans 1..B)");
    app->add_option("--reducibility-range", reducibility_range, "offset radius r for reducibility (0 = default)");
    app->add_option("--alpha-min", alpha_min, "minimal accepted rate")->capture_default_str();
    app->add_option("--fit-slack", fit_slack, "envelope slack")->capture_default_str();
    app->add_option("--gamma-min", gamma_min, "minimal separation rate")->capture_default_str();
    app->add_option("--invariance-tol", invariance_tol, "projector invariance threshold")->capture_default_str();
    app->add_option("--lambda", lambda, "torsion shift X or auto (= alpha/4)")->capture_default_str();
    app->add_option("--seed", seed, "seed for random zoo models")->capture_default_str();
    app->add_option("--q", q, "orbit length for rotation-type zoo models");
    app->add_option("--step", step, "rotation step for rotation-type zoo models");
    app->add_option("--mu", mu, "diagonal zoo entries, comma separated");
    app->add_flag("--serial", serial, "use the serial reference kernels");
  }

  VerifyRequest request() const {
    VerifyRequest r;
    if (!zoo.empty()) r.zoo_name = zoo;
    if (!model_file.empty()) r.model_file = model_file;
    r.zoo_params.q = q;
    r.zoo_params.step = step;
    if (!mu.empty()) {
      std::stringstream ss(mu);
      std::string item;
      while (std::getline(ss, item, ',')) r.zoo_params.mu.push_back(std::stod(item));
    }
    if (!splitting_file.empty()) {
      r.splitting_source = SplittingSource::file;
      r.splitting_file = splitting_file;
    }
    if (!estimate.empty()) {
      r.estimate_dims = parse_dims(estimate);
      if (splitting_file.empty()) r.splitting_source = SplittingSource::estimate;
    }
    if (splitting_kind == "exact") r.splitting_source = SplittingSource::exact;
    else if (splitting_kind == "coordinate") r.splitting_source = SplittingSource::coordinate;
    else if (splitting_kind == "estimate") r.splitting_source = SplittingSource::estimate;
    else if (!splitting_kind.empty())
      throw Error(ErrorKind::bad_params, "unknown splitting source '" + splitting_kind + "'");
    r.estimate_window = window;
    r.gap_threshold = gap;
    r.criteria = parse_criteria(criteria);
    if (!n_range.empty()) {
      const auto [a, b] = parse_range(n_range, "--n-range");
      r.grid.n_lo = a;
      r.grid.n_hi = b;
    }
    if (!m_range.empty()) {
      const auto [a, b] = parse_range(m_range, "--m-range");
      r.grid.m_lo = a;
      r.grid.m_hi = b;
    }
    if (serial) r.grid.backend = kernels::Backend::serial;
    if (reducibility_range > 0) r.reducibility_range = reducibility_range;
    r.thresholds.alpha_min = alpha_min;
    r.thresholds.fit_slack = fit_slack;
    r.thresholds.gamma_min = gamma_min;
    r.thresholds.invariance_tol = invariance_tol;
    if (lambda != "auto") {
      try {
        r.lambda = std::stod(lambda);
      } catch (const std::exception&) {
        throw Error(ErrorKind::bad_params, "--lambda expects a number or auto");
      }
    }
    r.seed = seed;
    return r;
  }
};

void emit(const std::string& out_dir, const std::string& name, const std::string& content) {
  if (out_dir.empty()) {
    std::cout << content;
    return;
  }
  std::filesystem::create_directories(out_dir);
  io::write_file((std::filesystem::path(out_dir) / name).string(), content);
}

}  // namespace

int main(int argc, char** argv) {
  kernels::apply_thread_cap_from_env();

  CLI::App app{"Numerical verification of dominated splittings and hyperbolicity of linear cocycles"};
  app.require_subcommand(1);

  Common verify_opts;
  std::string out_dir;
  bool csv = false, expect_pass = false;
  auto* verify = app.add_subcommand("verify", "run criteria and write a certificate bundle");
  verify_opts.attach(verify);
  verify->add_option("--out", out_dir, "directory for bundle.json (and rates.csv with --csv)");
  verify->add_flag("--csv", csv, "also write rate functions as CSV (point,i,rho_plus,rho_minus,N)");
  verify->add_flag("--expect-pass", expect_pass, "expect every requested criterion to pass");

  Common scan_opts;
  std::string axis = "lambda", scan_out;
  long points = 16;
  std::string scan_n = "1:16";
  auto* scan = app.add_subcommand("scan",
                                  "parameter sweep as CSV\n"
                                  "  lambda: lambda,i,stable_rate,unstable_rate,verdict\n"
                                  "  window: N,pair,max_slope,margin,alpha_target,verdict\n"
                                  "  dims:   dims,ratio_alpha,projector_alpha,verdict");
  scan_opts.attach(scan);
  scan->add_option("--axis", axis, "lambda | window | dims")->capture_default_str();
  scan->add_option("--points", points, "lambda sweep points in (0, alpha/2)")->capture_default_str();
  scan->add_option("--window-range", scan_n, "N sweep A:B")->capture_default_str();
  scan->add_option("--out", scan_out, "directory for scan.csv");

  auto* zoo_cmd = app.add_subcommand("zoo", "built-in oracle models");
  zoo_cmd->require_subcommand(1);
  auto* zoo_list = zoo_cmd->add_subcommand("list", "list model names");
  std::string export_name;
  auto* zoo_export = zoo_cmd->add_subcommand("export", "print a model as JSON");
  zoo_export->add_option("name", export_name, "model name")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*verify) {
      VerifyRequest r = verify_opts.request();
      r.expect_pass = expect_pass;
      const auto result = run_verify(r);
      emit(out_dir, "bundle.json", io::dump(result.bundle));
      if (csv && result.rates_csv) emit(out_dir, "rates.csv", *result.rates_csv);
      return result.exit_code;
    }
    if (*scan) {
      ScanRequest s;
      s.base = scan_opts.request();
      if (axis == "lambda") s.axis = ScanAxis::lambda;
      else if (axis == "window") s.axis = ScanAxis::window;
      else if (axis == "dims") s.axis = ScanAxis::dims;
      else throw Error(ErrorKind::bad_params, "unknown scan axis '" + axis + "'");
      s.lambda_points = points;
      const auto [a, b] = parse_range(scan_n, "--window-range");
      s.n_lo = a;
      s.n_hi = b;
      const auto result = run_scan(s);
      emit(scan_out, "scan.csv", result.csv);
      return result.exit_code;
    }
    if (*zoo_list) {
      for (const auto& name : zoo::names())
        std::cout << name << '\t' << zoo::make_model(name).description << '\n';
      return 0;
    }
    if (*zoo_export) {
      std::cout << io::dump(io::to_json(zoo::make_model(export_name).model));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cout << io::dump(error_json(e));
    return 1;
  }
  return 0;
}
