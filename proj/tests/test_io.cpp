#include "domcheck/criteria.hpp"
#include "domcheck/error.hpp"
#include "domcheck/io.hpp"
#include "domcheck/rates.hpp"
#include "domcheck/zoo.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace domcheck;

TEST_CASE("model JSON round trip") {
  for (const auto& name : zoo::names()) {
    const auto z = zoo::make_model(name);
    const auto j = io::to_json(z.model);
    const auto back = io::model_from_json(io::parse(io::dump(j)));
    CHECK(back.points() == z.model.points());
    CHECK(back.base_map() == z.model.base_map());
    for (std::size_t x = 0; x < back.points(); ++x) CHECK((back.generator(x) - z.model.generator(x)).norm() == 0.0);
    CHECK(io::dump(io::to_json(back)) == io::dump(j));
  }
  const OrbitModel seg(Structure::segment, {1, 2, OrbitModel::undefined},
                       std::vector<Matrix>(3, Matrix::Identity(2, 2) * 2.0));
  const auto j = io::to_json(seg);
  CHECK(j["structure"] == "segment");
  CHECK(j["base_map"].size() == 2);
  CHECK(io::model_from_json(j).structure() == Structure::segment);
}

TEST_CASE("generators are row-major") {
  const auto j = io::parse(R"({"dimension": 2, "structure": "periodic", "points": 1,
                               "base_map": [0], "generators": [[1, 2, 3, 4]]})");
  const auto m = io::model_from_json(j);
  CHECK(m.generator(0)(0, 1) == 2.0);
  CHECK(m.generator(0)(1, 0) == 3.0);
}

TEST_CASE("splitting and scaling round trips") {
  const auto z = zoo::make_model("random-triangular");
  const auto j = io::to_json(*z.exact);
  const auto back = io::splitting_from_json(io::parse(io::dump(j)));
  CHECK(back.dims == z.exact->dims);
  for (std::size_t x = 0; x < back.points(); ++x)
    for (std::size_t i = 0; i < back.blocks(); ++i) CHECK((back.bases[x][i] - z.exact->bases[x][i]).norm() == 0.0);

  ScalingFamily s;
  s.lambda = 0.1;
  s.p = {{1.5, 0.25}, {2.0, 3.0}};
  const auto sb = io::scaling_from_json(io::parse(io::dump(io::to_json(s))));
  CHECK(sb.p == s.p);
  CHECK(sb.lambda == 0.1);
  CHECK(sb.provenance == "user-supplied");
}

TEST_CASE("parse errors are typed") {
  for (const char* text : {"{", R"({"dimension": 2})", R"({"dimension": 2, "structure": "torus", "points": 1,
                                                         "base_map": [0], "generators": [[1,0,0,1]]})"}) {
    try {
      io::model_from_json(io::parse(text));
      FAIL("expected ParseError");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::parse_error);
    }
  }
  const auto neg = io::parse(R"({"lambda": 0.1, "p": [[1.0, -2.0]]})");
  CHECK_THROWS_AS(io::scaling_from_json(neg), Error);
}

TEST_CASE("certificate JSON carries the documented fields and non-finite markers") {
  const auto d = zoo::make_model("diagonal");
  const auto pf = projectors_from_bases(*d.exact);
  const auto c = ratio_domination_all(d.model, pf, GridSpec{});
  const auto j = io::to_json(c);
  for (const char* key : {"criterion", "pair", "D_table", "C", "alpha", "residual", "beta", "verdict", "thresholds"})
    CHECK(j.contains(key));
  CHECK(j["D_table"].size() == 30);
  CHECK(j["D_table"][0][0] == 1);
  CHECK(j["verdict"] == "pass");

  const auto v = io::to_json(projector_product_all(d.model, projectors_from_bases(coordinate_splitting(1, {2})), GridSpec{}));
  CHECK(v["alpha"] == "inf");
  // Re-emission is byte-identical.
  CHECK(io::dump(io::parse(io::dump(j))) == io::dump(j));
  CHECK(io::dump(io::parse(io::dump(v))) == io::dump(v));
}

TEST_CASE("doubles round-trip exactly") {
  io::Json j;
  j["x"] = 0.1 + 0.2;
  j["y"] = std::nextafter(1.0, 2.0);
  const auto back = io::parse(io::dump(j));
  CHECK(back["x"].get<double>() == 0.1 + 0.2);
  CHECK(back["y"].get<double>() == std::nextafter(1.0, 2.0));
}

TEST_CASE("rates CSV columns") {
  const auto d = zoo::make_model("diagonal");
  const auto r = compute_rates(d.model, projectors_from_bases(*d.exact), 4);
  std::istringstream in(io::rates_csv(r));
  std::string line;
  std::getline(in, line);
  CHECK(line == "point,i,rho_plus,rho_minus,N");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(line.substr(0, 4) == "0," + std::to_string(rows) + ",");
    CHECK(line.substr(line.size() - 2) == ",4");
  }
  CHECK(rows == 2);
}
