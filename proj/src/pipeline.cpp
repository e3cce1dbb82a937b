#include "domcheck/pipeline.hpp"

#include "domcheck/criteria.hpp"
#include "domcheck/error.hpp"
#include "domcheck/rates.hpp"
#include "domcheck/torsion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace domcheck {
namespace {

using io::Json;

struct Loaded {
  std::optional<OrbitModel> model;
  std::optional<zoo::ZooModel> zoo;
  std::string model_source;
  std::optional<Splitting> splitting;
  std::string splitting_source;
  std::vector<int> dims;
  std::optional<std::pair<ErrorKind, std::string>> splitting_error;
  bool default_splitting = false;
};

Splitting estimate(const OrbitModel& model, const std::vector<int>& dims, const VerifyRequest& r) {
  EstimateOptions opt;
  opt.window = r.estimate_window;
  opt.gap_threshold = r.gap_threshold;
  return estimate_splitting(model, dims, opt);
}

Loaded load(const VerifyRequest& r) {
  Loaded l;
  if (r.zoo_name && r.model_file) throw Error(ErrorKind::bad_params, "give either a zoo model or a model file");
  if (r.zoo_name) {
    zoo::Params p = r.zoo_params;
    if (*r.zoo_name == "random-triangular" && r.seed != 0) p.seed = r.seed;
    l.zoo = zoo::make_model(*r.zoo_name, p);
    l.model = l.zoo->model;
    l.model_source = "zoo:" + *r.zoo_name;
  } else if (r.model_file) {
    l.model = io::model_from_json(io::parse(io::read_file(*r.model_file)));
    l.model_source = "file";
  } else {
    throw Error(ErrorKind::bad_params, "a model source is required");
  }
  const OrbitModel& model = *l.model;

  auto dims_or_default = [&]() -> std::vector<int> {
    if (!r.estimate_dims.empty()) return r.estimate_dims;
    if (l.zoo) return l.zoo->dims;
    throw Error(ErrorKind::bad_params, "bundle dimensions are required for this model");
  };
  auto run_estimate = [&](const std::vector<int>& dims) {
    l.dims = dims;
    try {
      l.splitting = estimate(model, dims, r);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::dimension_mismatch) throw;
      l.splitting_error = std::make_pair(e.kind(), std::string(e.what()));
    }
  };

  SplittingSource src = r.splitting_source;
  if (src == SplittingSource::automatic) {
    l.default_splitting = true;
    if (l.zoo) {
      const auto& d = l.zoo->default_splitting;
      src = d == "exact" ? SplittingSource::exact
            : d == "coordinate" ? SplittingSource::coordinate
                                : SplittingSource::estimate;
    } else if (!r.estimate_dims.empty()) {
      src = SplittingSource::estimate;
    } else {
      throw Error(ErrorKind::bad_params, "a splitting source is required for model files");
    }
  }
  switch (src) {
    case SplittingSource::exact:
      if (!l.zoo || !l.zoo->exact) throw Error(ErrorKind::bad_params, "no exact splitting for this model");
      l.splitting = *l.zoo->exact;
      l.dims = l.splitting->dims;
      l.splitting_source = "exact";
      break;
    case SplittingSource::coordinate:
      l.dims = dims_or_default();
      l.splitting = coordinate_splitting(model.points(), l.dims);
      l.splitting_source = "coordinate";
      break;
    case SplittingSource::file:
      if (!r.splitting_file) throw Error(ErrorKind::bad_params, "splitting file missing");
      l.splitting = io::splitting_from_json(io::parse(io::read_file(*r.splitting_file)));
      l.dims = l.splitting->dims;
      l.splitting_source = "file";
      break;
    case SplittingSource::estimate:
      run_estimate(dims_or_default());
      l.splitting_source = "estimate";
      break;
    case SplittingSource::automatic:
      break;
  }
  if (l.splitting && l.splitting->points() != model.points())
    throw Error(ErrorKind::dimension_mismatch, "splitting and model have different point counts");
  return l;
}

Json verdict_json(bool pass, const std::string& note = {}) {
  Json j;
  j["verdict"] = pass ? "pass" : "fail";
  if (!note.empty()) j["note"] = note;
  return j;
}

const std::vector<std::string> domination_group{"ratio", "projector", "slope", "torsion"};

}  // namespace

const std::vector<std::string>& criterion_names() {
  static const std::vector<std::string> names{"reducibility", "ratio", "projector",
                                              "slope", "torsion", "hyperbolicity"};
  return names;
}

std::set<std::string> parse_criteria(const std::string& list) {
  std::set<std::string> out;
  if (list == "all") {
    out.insert(criterion_names().begin(), criterion_names().end());
    return out;
  }
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (std::find(criterion_names().begin(), criterion_names().end(), item) == criterion_names().end())
      throw Error(ErrorKind::bad_params, "unknown criterion '" + item + "'");
    out.insert(item);
  }
  if (out.empty()) throw Error(ErrorKind::bad_params, "criteria subset must be nonempty");
  return out;
}

io::Json error_json(const std::exception& e) {
  Json j;
  Json err;
  if (const auto* de = dynamic_cast<const Error*>(&e)) {
    err["kind"] = std::string(to_string(de->kind()));
  } else {
    err["kind"] = "InternalError";
  }
  err["message"] = e.what();
  j["error"] = err;
  return j;
}

VerifyResult run_verify(const VerifyRequest& r) {
  if (r.criteria.empty()) throw Error(ErrorKind::bad_params, "criteria subset must be nonempty");
  if (!(r.thresholds.alpha_min > 0) || !(r.thresholds.fit_slack > 0) || !(r.thresholds.gamma_min > 0))
    throw Error(ErrorKind::bad_params, "thresholds must be positive");
  if (r.grid.m_lo < 1 || r.grid.m_hi < r.grid.m_lo)
    throw Error(ErrorKind::bad_params, "m-range must satisfy 1 <= m_lo <= m_hi");

  const Loaded l = load(r);
  const OrbitModel& model = *l.model;
  const GridSpec& grid = r.grid;
  const Thresholds& th = r.thresholds;
  auto wants = [&](const char* c) { return r.criteria.count(c) > 0; };

  VerifyResult result;
  Json bundle;
  bundle["tool"] = "domcheck";
  bundle["format"] = 1;
  {
    Json m;
    m["source"] = l.model_source;
    m["points"] = model.points();
    m["dimension"] = model.dimension();
    m["structure"] = model.structure() == Structure::periodic ? "periodic" : "segment";
    if (l.zoo) m["description"] = l.zoo->description;
    bundle["model"] = m;
  }
  bundle["seed"] = r.seed;
  {
    Json g;
    g["m_range"] = {grid.m_lo, grid.m_hi};
    const auto [n_lo, n_hi] = offset_range(model, grid);
    g["n_range"] = {n_lo, n_hi};
    bundle["grid"] = g;
  }
  bundle["thresholds"] = io::to_json(th);
  {
    Json c = Json::array();
    for (const auto& name : criterion_names())
      if (wants(name.c_str())) c.push_back(name);
    bundle["criteria"] = c;
  }

  std::optional<ProjectorFamily> pf;
  {
    Json s;
    s["source"] = l.splitting_source;
    s["dims"] = l.dims;
    if (l.splitting) {
      pf = projectors_from_bases(*l.splitting);
      s["invariance"] = io::to_json(check_invariance(model, *pf, th.invariance_tol));
      s["evaluation"] = to_string(choose_evaluation(model, *pf, th.invariance_tol));
    }
    if (l.splitting_error) {
      Json e;
      e["kind"] = std::string(to_string(l.splitting_error->first));
      e["message"] = l.splitting_error->second;
      s["diagnosis"] = e;
    }
    bundle["splitting"] = s;
  }

  Json certs = Json::object();
  std::map<std::string, Json> verdicts;
  const std::string no_splitting = "no invariant splitting with the requested dimensions";

  // Reducibility.
  std::optional<ReducibilityCertificate> red;
  if (pf && (wants("reducibility") || wants("slope"))) {
    red = reducibility_test(model, *pf, r.reducibility_range, false, grid.backend, th);
  }
  if (wants("reducibility")) {
    if (red) {
      certs["reducibility"] = io::to_json(*red);
      verdicts["reducibility"] = verdict_json(red->pass);
    } else if (l.zoo && !l.zoo->per_point.empty()) {
      Json per = Json::array();
      bool all = true;
      double kmax = 0.0;
      for (std::size_t x = 0; x < l.zoo->per_point.size(); ++x) {
        const auto& [sub, split] = l.zoo->per_point[x];
        const auto c = reducibility_test(sub, projectors_from_bases(split), r.reducibility_range, false,
                                         grid.backend, th);
        Json e = io::to_json(c);
        e["point"] = x;
        e["dims"] = split.dims;
        per.push_back(e);
        all = all && c.pass;
        kmax = std::max(kmax, c.K);
      }
      Json c;
      c["criterion"] = "reducibility-per-point";
      c["points"] = per;
      c["K"] = kmax;
      c["verdict"] = all ? "pass" : "fail";
      certs["reducibility"] = c;
      verdicts["reducibility"] = verdict_json(all, "per-point splittings with point-dependent dimensions");
    } else {
      verdicts["reducibility"] = verdict_json(false, no_splitting);
    }
  }

  // Growth ratios and projector products.
  std::optional<DominationCertificate> ratio, proj;
  if (pf && wants("ratio")) {
    ratio = ratio_domination_all(model, *pf, grid, th);
    certs["ratio"] = io::to_json(*ratio);
    if (pf->blocks() >= 3) certs["pairs"] = io::to_json(full_pairs_report(model, *pf, grid, th));
    if (ratio->pass && !ratio->vacuous && wants("reducibility")) {
      const long m = smallest_valid_m(ratio->C, ratio->alpha);
      certs["reducibility_bound"] = io::to_json(lemma2_bound_check(model, *pf, *ratio, m, std::nullopt, grid.backend));
    }
  }
  if (wants("ratio")) verdicts["ratio"] = ratio ? verdict_json(ratio->pass) : verdict_json(false, no_splitting);

  if (pf && (wants("projector") || wants("slope") || wants("torsion"))) {
    proj = projector_product_all(model, *pf, grid, th);
    if (wants("projector")) certs["projector"] = io::to_json(*proj);
  }
  if (wants("projector")) verdicts["projector"] = proj ? verdict_json(proj->pass) : verdict_json(false, no_splitting);

  // Rate functions and slope.
  std::optional<RateFunctionTable> rates;
  const double alpha_target =
      proj ? (proj->vacuous ? th.alpha_min : std::max(proj->alpha, th.alpha_min)) : th.alpha_min;
  if (pf && (wants("slope") || wants("torsion"))) {
    const double K = std::max(red ? red->K : 1.0, proj->vacuous ? 1.0 : proj->k_envelope);
    const long N_default = std::min(default_slope_window(alpha_target, K), grid.m_hi);
    const long N = r.slope_window.value_or(N_default);
    rates = compute_rates(model, *pf, N, th.invariance_tol);
    result.rates_csv = io::rates_csv(*rates);
    if (wants("slope")) {
      Json s;
      const auto slope = slope_test(*rates, alpha_target, K);
      s["test"] = io::to_json(slope);
      s["rates"] = {{"N", N}, {"evaluation", to_string(rates->evaluation)}};
      bool pass = slope.pass;
      if (slope.pass) {
        // Rate functions are certified as upper/lower functions only when the slope bound holds.
        Json up = Json::array(), lo = Json::array();
        std::vector<double> kb;
        for (std::size_t b = 0; b < pf->blocks(); ++b) {
          const auto u = upper_function_check(model, *pf, b + 1, rates->upper[b], grid, th);
          const auto w = lower_function_check(model, *pf, b + 1, rates->lower[b], grid, th);
          up.push_back(io::to_json(u));
          lo.push_back(io::to_json(w));
          pass = pass && u.pass && w.pass;
          kb.push_back(std::max(u.K, w.K));
        }
        s["upper_functions"] = up;
        s["lower_functions"] = lo;
        const auto sd = slope_implies_domination(model, *pf, *rates, slope, grid, th);
        s["domination"] = io::to_json(sd);
        s["adjacent_gap"] = io::to_json(adjacent_gap_check(model, *rates, kb, alpha_target, grid.m_hi));
        pass = pass && sd.pass;
      }
      s["verdict"] = pass ? "pass" : "fail";
      certs["slope"] = s;
      verdicts["slope"] = verdict_json(pass);
    }
  } else if (wants("slope")) {
    verdicts["slope"] = verdict_json(false, no_splitting);
  }

  // Scaling torsion.
  if (wants("torsion")) {
    if (!pf) {
      verdicts["torsion"] = verdict_json(false, no_splitting);
    } else if (!proj->pass || proj->vacuous) {
      verdicts["torsion"] = verdict_json(false, "no domination rate to build scalings from");
    } else {
      const double alpha = proj->alpha;
      const double lambda = r.lambda.value_or(alpha / 4.0);
      Json t;
      t["lambda"] = lambda;
      t["lambda_policy"] = r.lambda ? "user" : "alpha/4";
      bool pass = false;
      try {
        const auto fwd = torsion_forward(model, *pf, *rates, lambda, alpha, grid, th);
        t["forward"] = io::to_json(fwd);
        const auto sep = separation_test(model, fwd.scaling, grid, th);
        t["separation"] = io::to_json(sep);
        const auto rev = torsion_reverse(model, fwd.scaling, sep, fwd.q, grid, th);
        t["reverse"] = io::to_json(rev);
        pass = rev.pass;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::certificate_mismatch && e.kind() != ErrorKind::precondition_failed &&
            e.kind() != ErrorKind::nesting_violation &&
            e.kind() != ErrorKind::projector_invariant_violation)
          throw;
        t["failure"] = {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}};
      }
      t["verdict"] = pass ? "pass" : "fail";
      certs["torsion"] = t;
      verdicts["torsion"] = verdict_json(pass);
    }
  }

  // Hyperbolicity.
  std::optional<HyperbolicityScan> hyp;
  if (wants("hyperbolicity")) {
    if (pf) {
      hyp = hyperbolicity_scan(model, *pf, grid, th);
      Json h;
      Json per = Json::array();
      for (const auto& c : hyp->per_index) per.push_back(io::to_json(c));
      h["per_index"] = per;
      h["hyperbolic_index"] = hyp->hyperbolic_index ? Json(*hyp->hyperbolic_index) : Json(nullptr);
      h["verdict"] = hyp->pass ? "pass" : "fail";
      certs["hyperbolicity"] = h;
      verdicts["hyperbolicity"] = verdict_json(hyp->pass);
    } else {
      verdicts["hyperbolicity"] = verdict_json(false, no_splitting);
    }
  }
  bundle["certificates"] = certs;

  Json vj = Json::object();
  for (const auto& name : criterion_names())
    if (verdicts.count(name)) vj[name] = verdicts[name];
  bundle["verdicts"] = vj;

  auto passed = [&](const std::string& name) { return verdicts.at(name)["verdict"] == "pass"; };

  // Cross-criterion consistency.
  Json summary;
  std::vector<std::string> dom_requested;
  for (const auto& c : domination_group)
    if (verdicts.count(c)) dom_requested.push_back(c);
  std::optional<bool> dominated;
  Json disagreements = Json::array();
  for (const auto& c : dom_requested) {
    if (!dominated) {
      dominated = passed(c);
    } else if (*dominated != passed(c)) {
      disagreements.push_back("domination criteria disagree: " + dom_requested.front() + " vs " + c);
    }
  }
  if (dominated && disagreements.empty() && hyp && hyp->hyperbolic_index && pf && pf->blocks() == 2 &&
      *hyp->hyperbolic_index == 1 && !*dominated)
    disagreements.push_back("hyperbolic splitting reported as not dominated");
  std::optional<bool> hyperbolic, reducible;
  if (verdicts.count("hyperbolicity")) hyperbolic = passed("hyperbolicity");
  if (verdicts.count("reducibility")) reducible = passed("reducibility");

  auto tri = [](const std::optional<bool>& b) { return b ? Json(*b) : Json(nullptr); };
  summary["dominated"] = disagreements.empty() ? tri(dominated) : Json(nullptr);
  summary["hyperbolic"] = tri(hyperbolic);
  summary["reducible"] = tri(reducible);
  summary["agreement"] = disagreements.empty();
  summary["disagreements"] = disagreements;
  std::string cls;
  if (hyperbolic.value_or(false)) {
    cls = "hyperbolic";
  } else if (dominated.value_or(false) && disagreements.empty()) {
    cls = hyperbolic ? "dominated, not hyperbolic" : "dominated";
  } else if (reducible.value_or(false)) {
    cls = dominated ? "reducible, not dominated" : "reducible";
  } else if (reducible) {
    cls = "not reducible";
  } else if (dominated) {
    cls = "not dominated";
  } else {
    cls = "undetermined";
  }
  summary["classification"] = cls;
  bundle["summary"] = summary;

  // Expectations.
  Json expectation;
  std::map<std::string, bool> expected;
  if (r.expect_pass) {
    expectation["source"] = "expect-pass";
    for (const auto& [name, _] : verdicts) expected[name] = true;
  } else if (l.zoo && l.default_splitting) {
    expectation["source"] = "zoo-oracle";
    const auto& o = l.zoo->oracle;
    for (const auto& [name, _] : verdicts) {
      if (name == "hyperbolicity") {
        expected[name] = o.hyperbolic;
      } else if (name == "reducibility") {
        expected[name] = o.reducible;
      } else {
        expected[name] = o.dominated;
      }
    }
  } else {
    expectation["source"] = "none";
  }
  bool matches = true;
  Json ex = Json::object();
  for (const auto& name : criterion_names()) {
    if (!expected.count(name)) continue;
    const bool ok = expected[name] == passed(name);
    matches = matches && ok;
    ex[name] = {{"expected", expected[name] ? "pass" : "fail"},
                {"observed", passed(name) ? "pass" : "fail"},
                {"match", ok}};
  }
  expectation["criteria"] = ex;
  expectation["match"] = matches;
  bundle["expectation"] = expectation;

  result.exit_code = !disagreements.empty() ? 2 : (matches ? 0 : 3);
  bundle["exit_code"] = result.exit_code;
  result.bundle = std::move(bundle);
  return result;
}

ScanResult run_scan(const ScanRequest& s) {
  const VerifyRequest& r = s.base;
  const Loaded l = load(r);
  const OrbitModel& model = *l.model;
  const GridSpec& grid = r.grid;
  const Thresholds& th = r.thresholds;
  ScanResult out;
  std::ostringstream csv;
  csv.precision(17);
  auto marker = [&](const Error& e) {
    out.exit_code = 1;
    return "error:" + std::string(to_string(e.kind()));
  };

  if (s.axis == ScanAxis::dims) {
    csv << "dims,ratio_alpha,projector_alpha,verdict\n";
    const int d = static_cast<int>(model.dimension());
    // Compositions of d into at least two parts.
    std::vector<std::vector<int>> all;
    for (int mask = 0; mask < (1 << (d - 1)); ++mask) {
      std::vector<int> dims{1};
      for (int b = 0; b < d - 1; ++b) {
        if (mask & (1 << b)) {
          dims.push_back(1);
        } else {
          ++dims.back();
        }
      }
      if (dims.size() >= 2) all.push_back(dims);
    }
    for (const auto& dims : all) {
      std::string label;
      for (std::size_t i = 0; i < dims.size(); ++i) label += (i ? "-" : "") + std::to_string(dims[i]);
      try {
        const auto pf = projectors_from_bases(estimate(model, dims, r));
        const auto a = ratio_domination_all(model, pf, grid, th);
        const auto b = projector_product_all(model, pf, grid, th);
        csv << label << ',' << a.alpha << ',' << b.alpha << ',' << (a.pass && b.pass ? "pass" : "fail") << '\n';
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::dimension_mismatch) {
          csv << label << ",,,fail:DimensionMismatch\n";
        } else {
          csv << label << ",,," << marker(e) << '\n';
        }
      }
    }
    out.csv = csv.str();
    return out;
  }

  if (!l.splitting) throw Error(ErrorKind::dimension_mismatch, "no splitting available for the scan");
  const auto pf = projectors_from_bases(*l.splitting);
  // Short data falls back to alpha_min so that rows report their own window errors.
  std::optional<DominationCertificate> proj;
  try {
    proj = projector_product_all(model, pf, grid, th);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::window_out_of_range) throw;
  }
  const double alpha = !proj || proj->vacuous ? th.alpha_min : std::max(proj->alpha, th.alpha_min);

  if (s.axis == ScanAxis::lambda) {
    csv << "lambda,i,stable_rate,unstable_rate,verdict\n";
    if (s.lambda_points < 1) throw Error(ErrorKind::bad_params, "lambda sweep needs at least one point");
    std::optional<RateFunctionTable> rates;
    try {
      if (!proj) throw Error(ErrorKind::window_out_of_range, "no admissible window for the projector test");
      const auto red = reducibility_test(model, pf, r.reducibility_range, false, grid.backend, th);
      const long N = std::min(default_slope_window(alpha, std::max(red.K, proj->k_envelope)), grid.m_hi);
      rates = compute_rates(model, pf, N, th.invariance_tol);
    } catch (const Error& e) {
      csv << ",,,," << marker(e) << '\n';
      out.csv = csv.str();
      return out;
    }
    for (long j = 0; j < s.lambda_points; ++j) {
      const double lambda = static_cast<double>(j + 1) / static_cast<double>(s.lambda_points + 1) * alpha / 2.0;
      try {
        const auto scaling = build_scaling(*rates, lambda, alpha);
        for (std::size_t i = 0; i < pf.blocks(); ++i) {
          const auto c = hyperbolicity_test(scaled_model(model, scaling, i), pf.clustered[i], grid, th);
          csv << lambda << ',' << i + 1 << ',' << c.stable.alpha << ','
              << (c.unstable.vacuous ? std::string("vacuous") : [&] {
                   std::ostringstream v;
                   v.precision(17);
                   v << c.unstable.alpha;
                   return v.str();
                 }())
              << ',' << (c.pass ? "pass" : "fail") << '\n';
        }
      } catch (const Error& e) {
        csv << lambda << ",,,," << marker(e) << '\n';
      }
    }
  } else {
    csv << "N,pair,max_slope,margin,alpha_target,verdict\n";
    if (s.n_lo < 1 || s.n_hi < s.n_lo) throw Error(ErrorKind::bad_params, "N range must satisfy 1 <= A <= B");
    for (long N = s.n_lo; N <= s.n_hi; ++N) {
      try {
        const auto rates = compute_rates(model, pf, N, th.invariance_tol);
        const auto slope = slope_test(rates, alpha);
        for (std::size_t i = 0; i < slope.max_slope.size(); ++i)
          csv << N << ',' << i + 1 << ',' << slope.max_slope[i] << ',' << slope.margin[i] << ',' << alpha << ','
              << (slope.max_slope[i] <= -alpha / 2.0 ? "pass" : "fail") << '\n';
      } catch (const Error& e) {
        csv << N << ",,,,," << marker(e) << '\n';
      }
    }
  }
  out.csv = csv.str();
  return out;
}

}  // namespace domcheck
