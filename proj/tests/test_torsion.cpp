#include "domcheck/criteria.hpp"
#include "domcheck/error.hpp"
#include "domcheck/rates.hpp"
#include "domcheck/torsion.hpp"
#include "domcheck/zoo.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace domcheck;

namespace {

const double ln2 = std::log(2.0);
const double ln4 = std::log(4.0);
const double ln_lambda = std::log(oracle::golden_lambda);

ProjectorFamily family_of(const zoo::ZooModel& z) {
  return projectors_from_bases(z.exact ? *z.exact : coordinate_splitting(z.model.points(), z.dims));
}

template <class Fn>
ErrorKind kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::bad_params;
}

ScalingFamily constant_scaling(std::size_t points, std::vector<double> values) {
  ScalingFamily s;
  for (double v : values) s.p.emplace_back(points, v);
  return s;
}

}  // namespace

TEST_CASE("build_scaling examples") {
  const auto d = zoo::make_model("diagonal");
  const auto r = compute_rates(d.model, family_of(d), 3);
  const auto s = build_scaling(r, 0.3, ln4);
  CHECK(s.p[0][0] == doctest::Approx(2.0 * std::exp(-0.3)).epsilon(1e-12));
  CHECK(s.p[0][0] == doctest::Approx(1.4816364).epsilon(1e-7));
  CHECK(s.p[1][0] == doctest::Approx(0.3704091).epsilon(1e-6));
  CHECK(s.provenance == "constructed-from-rates");
  CHECK(std::log(s.p[1][0]) == doctest::Approx(-r.upper[1][0] - 0.3).epsilon(1e-12));
  CHECK(kind_of([&] { build_scaling(r, ln2, ln4); }) == ErrorKind::lambda_out_of_range);
  CHECK(kind_of([&] { build_scaling(r, 0.0, ln4); }) == ErrorKind::lambda_out_of_range);
}

TEST_CASE("scaled_product examples") {
  const auto cat = zoo::make_model("cat-map");
  const auto one = constant_scaling(1, {1.0});
  for (long n : {-7L, 0L, 9L})
    CHECK((scaled_product(cat.model, one, 0, 0, n).materialize() - product(cat.model, 0, n)).norm() <=
          1e-12 * oracle::norm(product(cat.model, 0, n)));

  const auto d = zoo::make_model("diagonal");
  const auto s = constant_scaling(1, {2.0 * std::exp(-0.3)});
  const Matrix a2 = scaled_product(d.model, s, 0, 0, 2).materialize();
  CHECK(a2(0, 0) == doctest::Approx(std::exp(-0.6)).epsilon(1e-12));
  CHECK(a2(1, 1) == doctest::Approx(16.0 * std::exp(-0.6)).epsilon(1e-12));
  CHECK(std::abs(a2(0, 1)) + std::abs(a2(1, 0)) == 0.0);
}

TEST_CASE("scaled products compose on 500 random triples") {
  const auto z = zoo::make_model("random-triangular");
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> lp(0.3, 3.0);
  ScalingFamily s;
  s.p.assign(1, std::vector<double>(z.model.points()));
  for (auto& v : s.p[0]) v = lp(rng);
  std::uniform_int_distribution<long> span(-10, 10);
  std::uniform_int_distribution<std::size_t> pt(0, z.model.points() - 1);
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    const std::size_t x = pt(rng);
    const long n = span(rng), m = span(rng);
    const Matrix a = scaled_product(z.model, s, 0, x, n).materialize();
    const Matrix b = scaled_product(z.model, s, 0, *z.model.advance(x, n), m).materialize();
    const Matrix ab = scaled_product(z.model, s, 0, x, n + m).materialize();
    worst = std::max(worst, oracle::rel(ab, b * a, oracle::norm(a) * oracle::norm(b)));
  }
  CHECK(worst <= 1e-10);
  // The scaled-generator model gives the same products.
  const auto sm = scaled_model(z.model, s, 0);
  for (long n : {-5L, 3L, 12L}) {
    const Matrix a = scaled_product(z.model, s, 0, 4, n).materialize();
    CHECK(oracle::rel(a, product(sm, 4, n), oracle::norm(a)) <= 1e-12);
  }
}

TEST_CASE("scalars cancel in conjugations by invariant projectors") {
  const auto z = zoo::make_model("random-triangular");
  const auto pf = family_of(z);
  std::mt19937_64 rng(45);
  std::uniform_real_distribution<double> lp(0.2, 4.0);
  for (int t = 0; t < 50; ++t) {
    ScalingFamily s;
    s.p.assign(1, std::vector<double>(z.model.points()));
    for (auto& v : s.p[0]) v = lp(rng);
    const std::size_t x = static_cast<std::size_t>(t) % z.model.points();
    const long n = 1 + t % 9;
    const std::size_t y = *z.model.advance(x, n);
    const Matrix& R = pf.projectors[static_cast<std::size_t>(t) % 3][x];
    const auto scaled = scaled_product(z.model, s, 0, x, n) * ScaledMatrix::from(R) * scaled_product(z.model, s, 0, y, -n);
    const auto plain = product_scaled(z.model, x, n) * ScaledMatrix::from(R) * product_scaled(z.model, y, -n);
    CHECK(scaled.log_norm() == doctest::Approx(plain.log_norm()).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("changing lambda rescales products by exp((lambda - lambda') m)") {
  const auto z = zoo::make_model("random-triangular");
  const auto pf = family_of(z);
  const auto r = compute_rates(z.model, pf, 4);
  const double alpha = projector_product_all(z.model, pf, GridSpec{}).alpha;
  const auto a = build_scaling(r, 0.05, alpha);
  const auto b = build_scaling(r, 0.2, alpha);
  for (std::size_t i = 0; i < 3; ++i)
    for (long m = 1; m <= 20; ++m) {
      const double diff = scaled_product(z.model, a, i, 2, m).log_norm() - scaled_product(z.model, b, i, 2, m).log_norm();
      CHECK(std::exp(diff) == doctest::Approx(std::exp((0.2 - 0.05) * static_cast<double>(m))).epsilon(1e-10));
    }
}

TEST_CASE("separation_test examples") {
  const auto d = zoo::make_model("diagonal");
  const std::vector<std::vector<double>> gap{{0.0}, {1.0}};
  const auto c = separation_test(d.model, gap, SeparationOrder::increasing, GridSpec{});
  CHECK(c.gamma == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.beta == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(c.pass);
  CHECK(std::string(to_string(c.order)) == "increasing");

  const std::vector<std::vector<double>> same{{0.7}, {0.7}};
  const auto e = separation_test(d.model, same, SeparationOrder::increasing, GridSpec{});
  CHECK(e.gamma == 0.0);
  CHECK_FALSE(e.pass);

  const auto s = build_scaling(compute_rates(d.model, family_of(d), 3), 0.3, ln4);
  const auto cs = separation_test(d.model, s, GridSpec{});
  CHECK(cs.order == SeparationOrder::decreasing);
  CHECK(cs.gamma == doctest::Approx(2.0 * ln2).epsilon(1e-12));
  CHECK(cs.beta <= 1e-12);
  CHECK(cs.pass);
  for (std::size_t j = 0; j < cs.min_sums.size(); ++j)
    CHECK(cs.min_sums[j] == doctest::Approx(2.0 * ln2 * static_cast<double>(cs.m_values[j])).epsilon(1e-12));
}

TEST_CASE("torsion_forward examples") {
  const auto d = zoo::make_model("diagonal");
  const auto pd = family_of(d);
  const auto fd = torsion_forward(d.model, pd, compute_rates(d.model, pd, 3), 0.3, ln4, GridSpec{});
  REQUIRE(fd.per_index.size() == 2);
  CHECK(fd.per_index[0].stable.alpha == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(fd.per_index[0].unstable.alpha == doctest::Approx(ln4 - 0.3).epsilon(1e-10));
  CHECK(fd.per_index[0].stable_dim == 1);
  CHECK(fd.per_index[1].stable_dim == 2);
  CHECK(fd.per_index[1].unstable.vacuous);
  CHECK(fd.per_index[1].stable.alpha == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(fd.pass);

  const auto cat = zoo::make_model("cat-map");
  const auto pc = family_of(cat);
  const auto fc = torsion_forward(cat.model, pc, compute_rates(cat.model, pc, 2), 0.48, 2.0 * ln_lambda, GridSpec{});
  CHECK(fc.per_index[0].stable.alpha == doctest::Approx(0.48).epsilon(1e-10));
  CHECK(fc.per_index[0].unstable.alpha == doctest::Approx(2.0 * ln_lambda - 0.48).epsilon(1e-10));
  CHECK(fc.pass);
}

TEST_CASE("torsion_reverse examples") {
  const auto d = zoo::make_model("diagonal");
  const auto pd = family_of(d);
  const auto fd = torsion_forward(d.model, pd, compute_rates(d.model, pd, 3), ln4 / 4.0, ln4, GridSpec{});
  const auto sep = separation_test(d.model, fd.scaling, GridSpec{});
  const auto rd = torsion_reverse(d.model, fd.scaling, sep, fd.q, GridSpec{});
  CHECK((rd.family.projectors[0][0] - Eigen::Vector2d(1, 0).asDiagonal().toDenseMatrix()).norm() <= 1e-12);
  CHECK((rd.family.projectors[1][0] - Eigen::Vector2d(0, 1).asDiagonal().toDenseMatrix()).norm() <= 1e-12);
  CHECK(rd.certificate.alpha == doctest::Approx(ln4).epsilon(1e-10));
  CHECK(rd.certificate.criterion == "torsion");
  CHECK(rd.pass);

  std::vector<Field> nested{fd.q[0], fd.q[0]};
  CHECK(kind_of([&] { torsion_reverse(d.model, fd.scaling, sep, nested, GridSpec{}); }) == ErrorKind::nesting_violation);

  const Matrix g = Eigen::Vector3d(0.25, 1.0, 4.0).asDiagonal();
  const OrbitModel three(Structure::periodic, {0}, {g});
  const auto p3 = projectors_from_bases(coordinate_splitting(1, {1, 1, 1}));
  const auto f3 = torsion_forward(three, p3, compute_rates(three, p3, 2), ln4 / 4.0, ln4, GridSpec{});
  const auto r3 = torsion_reverse(three, f3.scaling, separation_test(three, f3.scaling, GridSpec{}), f3.q, GridSpec{});
  for (std::size_t i = 0; i < 3; ++i) {
    Matrix e = Matrix::Zero(3, 3);
    e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
    CHECK((r3.family.projectors[i][0] - e).norm() <= 1e-12);
  }
  for (std::size_t i = 1; i <= 2; ++i)
    CHECK(projector_product_test(three, r3.family, static_cast<int>(i), GridSpec{}).alpha ==
          doctest::Approx(ln4).epsilon(1e-10));
  CHECK(r3.certificate.alpha == doctest::Approx(ln4).epsilon(1e-10));
  CHECK(r3.pass);
}

TEST_CASE("torsion round trip on dominated zoo models") {
  for (const char* name : {"diagonal", "cat-map", "rotation-normal", "random-triangular"}) {
    CAPTURE(name);
    const auto z = zoo::make_model(name);
    const auto pf = family_of(z);
    const auto proj = projector_product_all(z.model, pf, GridSpec{});
    const double alpha = proj.alpha;
    const auto r = compute_rates(z.model, pf, default_slope_window(alpha, proj.k_envelope));
    const auto f = torsion_forward(z.model, pf, r, alpha / 4.0, alpha, GridSpec{});
    for (const auto& h : f.per_index) {
      CHECK(h.pass);
      CHECK(h.stable.alpha >= alpha / 4.0 - 0.05);
      if (!h.unstable.vacuous) CHECK(h.unstable.alpha >= alpha / 4.0 - 0.05);
    }
    const auto sep = separation_test(z.model, f.scaling, GridSpec{});
    CHECK(sep.pass);
    const auto rev = torsion_reverse(z.model, f.scaling, sep, f.q, GridSpec{});
    CHECK(rev.pass);
    CHECK(rev.max_excess_single <= 1e-9);
    CHECK(rev.max_excess_product <= 1e-9);
    for (std::size_t i = 0; i < pf.blocks(); ++i)
      for (std::size_t x = 0; x < z.model.points(); ++x)
        CHECK((rev.family.projectors[i][x] - pf.projectors[i][x]).norm() <= 1e-8);
  }
}

TEST_CASE("torsion_forward rejects a cocycle that is not dominated") {
  const auto id = zoo::make_model("identity");
  const auto pi = family_of(id);
  CHECK(kind_of([&] { torsion_forward(id.model, pi, compute_rates(id.model, pi, 2), 0.1, 1.0, GridSpec{}); }) ==
        ErrorKind::certificate_mismatch);
}
