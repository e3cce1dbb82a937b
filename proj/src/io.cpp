#include "domcheck/io.hpp"

#include "domcheck/error.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace domcheck::io {
namespace {

Json row_major(const Matrix& m) {
  Json a = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) a.push_back(m(r, c));
  return a;
}

Matrix from_row_major(const Json& a, Eigen::Index rows, Eigen::Index cols) {
  if (!a.is_array() || a.size() != static_cast<std::size_t>(rows * cols))
    throw Error(ErrorKind::parse_error, "matrix entry count does not match its shape");
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = a.at(static_cast<std::size_t>(r * cols + c)).get<double>();
  return m;
}

// Non-finite values have no JSON literal; they are written as strings.
Json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

template <class F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::parse_error, e.what());
  }
}

}  // namespace

Json to_json(const OrbitModel& model) {
  Json j;
  j["dimension"] = model.dimension();
  j["structure"] = model.structure() == Structure::periodic ? "periodic" : "segment";
  j["points"] = model.points();
  Json map = Json::array();
  for (std::size_t x = 0; x < model.points(); ++x)
    if (model.base_map()[x] != OrbitModel::undefined) map.push_back(model.base_map()[x]);
  j["base_map"] = map;
  Json gens = Json::array();
  for (const auto& g : model.generators()) gens.push_back(row_major(g));
  j["generators"] = gens;
  return j;
}

OrbitModel model_from_json(const Json& j) {
  return guarded([&] {
    const auto d = j.at("dimension").get<Eigen::Index>();
    const auto s = j.at("structure").get<std::string>();
    Structure structure;
    if (s == "periodic") {
      structure = Structure::periodic;
    } else if (s == "segment") {
      structure = Structure::segment;
    } else {
      throw Error(ErrorKind::parse_error, "structure must be 'periodic' or 'segment'");
    }
    const auto p = j.at("points").get<std::size_t>();
    auto map = j.at("base_map").get<std::vector<std::ptrdiff_t>>();
    const auto& gj = j.at("generators");
    if (!gj.is_array() || gj.size() != p) throw Error(ErrorKind::parse_error, "one generator per point expected");
    std::vector<Matrix> gens;
    for (const auto& g : gj) gens.push_back(from_row_major(g, d, d));
    return OrbitModel(structure, std::move(map), std::move(gens));
  });
}

Json to_json(const Splitting& s) {
  Json j;
  j["dimension"] = s.bases.empty() ? 0 : s.bases.front().front().rows();
  j["dims"] = s.dims;
  j["points"] = s.points();
  Json bases = Json::array();
  for (const auto& at : s.bases) {
    Json blocks = Json::array();
    for (const auto& b : at) blocks.push_back(row_major(b));
    bases.push_back(blocks);
  }
  j["bases"] = bases;
  return j;
}

Splitting splitting_from_json(const Json& j) {
  return guarded([&] {
    Splitting s;
    const auto d = j.at("dimension").get<Eigen::Index>();
    s.dims = j.at("dims").get<std::vector<int>>();
    const auto p = j.at("points").get<std::size_t>();
    const auto& bj = j.at("bases");
    if (!bj.is_array() || bj.size() != p) throw Error(ErrorKind::parse_error, "one basis set per point expected");
    for (const auto& at : bj) {
      if (!at.is_array() || at.size() != s.dims.size())
        throw Error(ErrorKind::parse_error, "one basis block per bundle expected");
      std::vector<Matrix> blocks;
      for (std::size_t i = 0; i < s.dims.size(); ++i) blocks.push_back(from_row_major(at[i], d, s.dims[i]));
      s.bases.push_back(std::move(blocks));
    }
    return s;
  });
}

Json to_json(const ScalingFamily& s) {
  Json j;
  j["lambda"] = s.lambda;
  j["provenance"] = s.provenance;
  j["points"] = s.points();
  j["p"] = s.p;
  return j;
}

ScalingFamily scaling_from_json(const Json& j) {
  return guarded([&] {
    ScalingFamily s;
    s.lambda = j.at("lambda").get<double>();
    s.provenance = j.value("provenance", std::string("user-supplied"));
    s.p = j.at("p").get<std::vector<std::vector<double>>>();
    for (const auto& row : s.p)
      for (double v : row)
        if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorKind::parse_error, "scalings must be positive");
    return s;
  });
}

Json to_json(const Thresholds& t) {
  Json j;
  j["alpha_min"] = t.alpha_min;
  j["fit_slack"] = t.fit_slack;
  j["gamma_min"] = t.gamma_min;
  j["invariance_tol"] = t.invariance_tol;
  j["growth_tol"] = t.growth_tol;
  return j;
}

Json to_json(const DominationCertificate& c) {
  Json j;
  j["criterion"] = c.criterion;
  if (c.pair.first > 0) {
    j["pair"] = {c.pair.first, c.pair.second};
  } else {
    j["pair"] = nullptr;
  }
  Json table = Json::array();
  for (std::size_t t = 0; t < c.m_values.size(); ++t) table.push_back({c.m_values[t], number(c.d(t))});
  j["D_table"] = table;
  j["C"] = number(c.C);
  j["alpha"] = number(c.alpha);
  j["residual"] = number(c.residual);
  j["beta"] = number(c.beta);
  j["envelope"] = number(c.envelope);
  j["k_envelope"] = number(c.k_envelope);
  j["verdict"] = c.pass ? "pass" : "fail";
  j["vacuous"] = c.vacuous;
  j["m_range"] = {c.fit_lo, c.fit_hi};
  j["evaluation"] = to_string(c.evaluation);
  j["thresholds"] = to_json(c.thresholds);
  return j;
}

Json to_json(const ReducibilityCertificate& c) {
  Json j;
  j["criterion"] = c.clustered ? "reducibility-clustered" : "reducibility";
  j["K"] = number(c.K);
  j["K_doubled"] = number(c.K_doubled);
  j["n_range"] = {c.n_lo, c.n_hi};
  j["invariant"] = c.invariant;
  j["invariance_residual"] = number(c.invariance_residual);
  j["evaluation"] = to_string(c.evaluation);
  j["verdict"] = c.pass ? "pass" : "fail";
  return j;
}

Json to_json(const HyperbolicityCertificate& c) {
  Json j;
  j["criterion"] = "hyperbolicity";
  j["index"] = c.index;
  j["stable_dim"] = c.stable_dim;
  j["stable"] = to_json(c.stable);
  j["unstable"] = to_json(c.unstable);
  j["verdict"] = c.pass ? "pass" : "fail";
  return j;
}

Json to_json(const Lemma2Report& r) {
  Json j;
  j["criterion"] = "reducibility-bound";
  j["m"] = r.m;
  j["C"] = number(r.C);
  j["alpha"] = number(r.alpha);
  j["beta"] = number(r.beta);
  j["bound"] = number(r.bound);
  j["K"] = number(r.K);
  j["margin"] = number(r.margin);
  j["verdict"] = r.pass ? "pass" : "fail";
  return j;
}

Json to_json(const PairsReport& r) {
  Json j;
  j["criterion"] = "pairs-induction";
  Json pairs = Json::array();
  for (const auto& p : r.pairs) {
    Json e;
    e["pair"] = {p.i, p.j};
    e["max_log_excess"] = number(p.max_log_excess);
    e["alpha_ratio"] = number(p.alpha_ratio);
    e["alpha_chain"] = number(p.alpha_chain);
    e["verdict"] = p.pass ? "pass" : "fail";
    pairs.push_back(e);
  }
  j["pairs"] = pairs;
  j["verdict"] = r.pass ? "pass" : "fail";
  return j;
}

Json to_json(const FunctionCheck& c) {
  Json j;
  j["criterion"] = c.upper ? "upper-function" : "lower-function";
  j["bundle"] = c.bundle;
  j["K"] = number(c.K);
  j["K_doubled"] = number(c.K_doubled);
  j["m_hi"] = c.m_hi;
  j["verdict"] = c.pass ? "pass" : "fail";
  return j;
}

Json to_json(const SlopeReport& r) {
  Json j;
  j["criterion"] = "slope";
  j["sign_convention"] = "rho+ - rho- <= -alpha/2";
  j["N"] = r.N;
  j["alpha_target"] = number(r.alpha_target);
  j["K"] = number(r.K);
  j["N_required"] = r.N_required;
  j["window_condition"] = r.window_condition;
  Json pairs = Json::array();
  for (std::size_t i = 0; i < r.max_slope.size(); ++i) {
    Json e;
    e["pair"] = {i + 1, i + 2};
    e["max_slope"] = number(r.max_slope[i]);
    e["margin"] = number(r.margin[i]);
    pairs.push_back(e);
  }
  j["pairs"] = pairs;
  j["verdict"] = r.pass ? "pass" : "fail";
  return j;
}

Json to_json(const SlopeDomination& r) {
  Json j;
  Json blocks = Json::array();
  for (const auto& b : r.blocks) {
    Json e;
    e["pair"] = {b.pair, b.pair + 1};
    e["l"] = b.l;
    e["log_lhs"] = number(b.log_lhs);
    e["log_rhs"] = number(b.log_rhs);
    e["verdict"] = b.pass ? "pass" : "fail";
    blocks.push_back(e);
  }
  j["blocks"] = blocks;
  Json rc = Json::array();
  for (double v : r.remainder_constant) rc.push_back(number(v));
  j["remainder_constant"] = rc;
  j["remainder_excess"] = number(r.remainder_excess);
  j["blocks_verdict"] = r.blocks_pass ? "pass" : "fail";
  j["remainder_verdict"] = r.remainder_pass ? "pass" : "fail";
  j["certificate"] = to_json(r.certificate);
  j["verdict"] = r.pass ? "pass" : "fail";
  return j;
}

Json to_json(const GapCheck& r) {
  Json j;
  j["criterion"] = "adjacent-gap";
  Json e = Json::array();
  for (double v : r.min_excess) e.push_back(number(v));
  j["min_excess"] = e;
  j["verdict"] = r.pass ? "pass" : "fail";
  return j;
}

Json to_json(const SeparationCertificate& c) {
  Json j;
  j["criterion"] = "separation";
  j["order"] = to_string(c.order);
  j["beta"] = number(c.beta);
  j["gamma"] = number(c.gamma);
  j["gamma_min"] = number(c.gamma_min);
  Json t = Json::array();
  for (std::size_t i = 0; i < c.m_values.size(); ++i) t.push_back({c.m_values[i], number(c.min_sums[i])});
  j["min_sum_table"] = t;
  j["verdict"] = c.pass ? "pass" : "fail";
  return j;
}

Json to_json(const TorsionForward& r) {
  Json j;
  j["criterion"] = "torsion-forward";
  j["lambda"] = number(r.lambda);
  j["alpha"] = number(r.alpha);
  j["scaling"] = to_json(r.scaling);
  Json h = Json::array();
  for (const auto& c : r.per_index) h.push_back(to_json(c));
  j["hyperbolicity"] = h;
  j["verdict"] = r.pass ? "pass" : "fail";
  return j;
}

Json to_json(const TorsionReverse& r) {
  Json j;
  j["criterion"] = "torsion-reverse";
  j["dims"] = r.family.dims;
  j["C"] = number(r.C);
  j["alpha"] = number(r.alpha);
  j["max_log_excess_single"] = number(r.max_excess_single);
  j["max_log_excess_product"] = number(r.max_excess_product);
  j["certificate"] = to_json(r.certificate);
  j["verdict"] = r.pass ? "pass" : "fail";
  return j;
}

Json to_json(const InvarianceReport& r) {
  Json j;
  j["max_residual"] = number(r.max_residual);
  j["tolerance"] = number(r.tolerance);
  j["verdict"] = r.pass ? "pass" : "fail";
  return j;
}

std::string rates_csv(const RateFunctionTable& t) {
  std::ostringstream out;
  out.precision(17);
  out << "point,i,rho_plus,rho_minus,N\n";
  for (std::size_t x = 0; x < t.points(); ++x)
    for (std::size_t b = 0; b < t.blocks(); ++b)
      out << x << ',' << b + 1 << ',' << t.upper[b][x] << ',' << t.lower[b][x] << ',' << t.N << '\n';
  return out.str();
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::parse_error, e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::parse_error, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::bad_params, "cannot write '" + path + "'");
  out << content;
}

}  // namespace domcheck::io
