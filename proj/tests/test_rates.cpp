#include "domcheck/criteria.hpp"
#include "domcheck/error.hpp"
#include "domcheck/rates.hpp"
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

}  // namespace

TEST_CASE("window_average examples") {
  for (long N : {1L, 3L, 7L}) {
    const auto a = window_average(BoundedSeries::of(std::vector<double>(10, 2.5)), N);
    for (double v : a) CHECK(v == doctest::Approx(2.5).epsilon(1e-15));
  }
  std::vector<double> alt;
  for (int k = 0; k < 12; ++k) alt.push_back(k % 2 ? -1.0 : 1.0);
  for (double v : window_average(BoundedSeries::of(alt), 2)) CHECK(v == 0.0);
  std::vector<double> mod3;
  for (int k = 0; k < 9; ++k) mod3.push_back(k % 3);
  const auto a3 = window_average(BoundedSeries::of(mod3), 3);
  CHECK(a3.size() == 7);
  for (double v : a3) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(kind_of([] { window_average(BoundedSeries::of({1.0, 2.0}), 3); }) == ErrorKind::window_out_of_range);
}

TEST_CASE("averaging_bound_check examples") {
  const auto c = averaging_bound_check(BoundedSeries::of(std::vector<double>(20, 5.0)), 4, 3, 6);
  CHECK(c.measured == doctest::Approx(0.0).scale(1.0));
  CHECK(c.limit == 20.0);
  CHECK(c.pass);
  std::vector<double> alt;
  for (int k = 0; k < 12; ++k) alt.push_back(k % 2 ? -1.0 : 1.0);
  const auto a = averaging_bound_check(BoundedSeries::of(alt), 2, 0, 7);
  CHECK(a.measured <= 1.0);
  CHECK(a.limit == 2.0);
  CHECK(a.pass);
  CHECK(kind_of([&] { averaging_bound_check(BoundedSeries::of(alt), 2, 5, 7); }) == ErrorKind::window_out_of_range);
}

TEST_CASE("averaging bound holds on 1000 random series") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  int passed = 0;
  for (int t = 0; t < 1000; ++t) {
    const long N = std::uniform_int_distribution<long>(1, 20)(rng);
    const long m = std::uniform_int_distribution<long>(1, 60)(rng);
    const long n = std::uniform_int_distribution<long>(0, 30)(rng);
    std::vector<double> v(static_cast<std::size_t>(n + m + N));
    for (auto& x : v) x = val(rng);
    const auto s = BoundedSeries::of(v);
    const auto c = averaging_bound_check(s, N, n, m);
    // Independent evaluation of the same sum.
    double sum = 0.0;
    for (long k = n; k < n + m; ++k) {
      double avg = 0.0;
      for (long j = 0; j < N; ++j) avg += v[static_cast<std::size_t>(k + j)];
      sum += v[static_cast<std::size_t>(k)] - avg / static_cast<double>(N);
    }
    CHECK(c.measured == doctest::Approx(std::abs(sum)).epsilon(1e-12).scale(1.0));
    CHECK(std::abs(sum) < s.bound * static_cast<double>(N));
    passed += c.pass ? 1 : 0;
  }
  CHECK(passed == 1000);
}

TEST_CASE("compute_rates examples") {
  const auto d = zoo::make_model("diagonal");
  for (long N : {1L, 4L, 25L}) {
    const auto r = compute_rates(d.model, family_of(d), N);
    CHECK(r.upper[0][0] == doctest::Approx(-ln2).epsilon(1e-14));
    CHECK(r.lower[1][0] == doctest::Approx(ln2).epsilon(1e-14));
    CHECK(r.upper[1][0] == doctest::Approx(ln2).epsilon(1e-14));
    CHECK(r.lower[0][0] == doctest::Approx(-ln2).epsilon(1e-14));
  }
  const auto id = zoo::make_model("identity");
  const auto ri = compute_rates(id.model, family_of(id), 5);
  for (const auto* t : {&ri.upper, &ri.lower})
    for (const auto& row : *t)
      for (double v : row) CHECK(std::abs(v) < 1e-15);
  const auto cat = zoo::make_model("cat-map");
  for (long N : {1L, 10L, 40L}) {
    const auto rc = compute_rates(cat.model, family_of(cat), N);
    CHECK(rc.upper[0][0] == doctest::Approx(-ln_lambda).epsilon(1e-12));
    CHECK(rc.lower[1][0] == doctest::Approx(ln_lambda).epsilon(1e-12));
  }
}

TEST_CASE("rates match the line-bundle oracle and stay within the norm bound") {
  const auto z = zoo::make_model("random-triangular");
  const auto pf = family_of(z);
  const oracle::LineBundles lb(z.model, *z.exact);
  const double bound = std::log(cocycle_sup_norm(z.model).forward);
  for (long N : {1L, 6L, 20L}) {
    const auto r = compute_rates(z.model, pf, N);
    for (std::size_t b = 0; b < 3; ++b)
      for (std::size_t x = 0; x < z.model.points(); ++x) {
        const double up = lb.log_forward_projected(b, x, N) / static_cast<double>(N);
        const double lo = -lb.log_backward_projected(b, x, N) / static_cast<double>(N);
        CHECK(r.upper[b][x] == doctest::Approx(up).epsilon(1e-12).scale(1.0));
        CHECK(r.lower[b][x] == doctest::Approx(lo).epsilon(1e-12).scale(1.0));
        // Definitional round trip exp(N rho+) = ||Df^N P||.
        const double direct = oracle::norm(oracle::naive_product(z.model, x, N) * pf.projectors[b][x]);
        if (N <= 6) CHECK(std::exp(static_cast<double>(N) * r.upper[b][x]) == doctest::Approx(direct).epsilon(1e-12));
        CHECK(std::abs(r.upper[b][x]) <= bound + 1e-12 + std::log(pf.projectors[b][x].norm()) / static_cast<double>(N));
      }
  }
}

TEST_CASE("vector growth over a window is bounded by the rate function") {
  const auto z = zoo::make_model("random-triangular");
  const auto pf = family_of(z);
  const long N = 5;
  const auto r = compute_rates(z.model, pf, N);
  std::mt19937_64 rng(8);
  for (int t = 0; t < 300; ++t) {
    const std::size_t x = std::uniform_int_distribution<std::size_t>(0, z.model.points() - 1)(rng);
    const long k = std::uniform_int_distribution<long>(0, 10)(rng);
    const std::size_t i = static_cast<std::size_t>(t % 3);
    const Vector u = pf.projectors[i][x] * oracle::random_matrix(rng, 3, 1);
    const Vector a = oracle::naive_product(z.model, x, k) * u;
    const Vector b = oracle::naive_product(z.model, x, k + N) * u;
    const std::size_t y = oracle::step(z.model, x, k);
    CHECK(std::log(b.norm() / a.norm()) / static_cast<double>(N) <= r.upper[i][y] + 1e-10);
  }
}

TEST_CASE("rates shift by log c under uniform scaling") {
  const auto z = zoo::make_model("random-triangular");
  const auto pf = family_of(z);
  std::vector<Matrix> g;
  for (const auto& a : z.model.generators()) g.push_back(1.9 * a);
  const auto zs = z.model.with_generators(g);
  const auto r = compute_rates(z.model, pf, 7);
  const auto rs = compute_rates(zs, pf, 7);
  for (std::size_t b = 0; b < 3; ++b)
    for (std::size_t x = 0; x < z.model.points(); ++x) {
      CHECK(rs.upper[b][x] - r.upper[b][x] == doctest::Approx(std::log(1.9)).epsilon(1e-10));
      CHECK(rs.lower[b][x] - r.lower[b][x] == doctest::Approx(std::log(1.9)).epsilon(1e-10));
    }
}

TEST_CASE("rates on segments leave windowless points empty") {
  const Matrix a = Eigen::Vector2d(0.5, 2.0).asDiagonal();
  const OrbitModel seg(Structure::segment, {1, 2, 3, OrbitModel::undefined}, std::vector<Matrix>(4, a));
  const auto pf = projectors_from_bases(coordinate_splitting(4, {1, 1}));
  const auto r = compute_rates(seg, pf, 2);
  CHECK(r.upper[0][1] == doctest::Approx(-ln2));
  CHECK(std::isnan(r.upper[0][2]));
  CHECK(std::isnan(r.upper[0][3]));
  CHECK(kind_of([&] { compute_rates(seg, pf, 4); }) == ErrorKind::window_out_of_range);
}

TEST_CASE("upper and lower function checks") {
  const auto d = zoo::make_model("diagonal");
  const auto pf = family_of(d);
  const auto up = upper_function_check(d.model, pf, 1, {-ln2}, GridSpec{});
  CHECK(up.K == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(up.pass);
  const auto lo = lower_function_check(d.model, pf, 2, {ln2}, GridSpec{});
  CHECK(lo.K == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lo.pass);

  // g = log sup ||Df|| is an upper function for every bundle of every model.
  for (const char* name : {"diagonal", "cat-map", "rotation-normal", "random-triangular"}) {
    const auto z = zoo::make_model(name);
    const auto pz = family_of(z);
    const double g = std::log(cocycle_sup_norm(z.model).forward);
    for (std::size_t i = 1; i <= pz.blocks(); ++i)
      CHECK(upper_function_check(z.model, pz, i, std::vector<double>(z.model.points(), g), GridSpec{}).pass);
  }

  // Too small: the required constant grows like e^m.
  const auto bad = upper_function_check(d.model, pf, 1, {-ln2 - 1.0}, GridSpec{});
  CHECK(std::log(bad.K) == doctest::Approx(30.0).epsilon(1e-10));
  CHECK(std::log(bad.K_doubled) == doctest::Approx(60.0).epsilon(1e-10));
  CHECK_FALSE(bad.pass);
}

TEST_CASE("slope_test examples") {
  const auto d = zoo::make_model("diagonal");
  const auto r = compute_rates(d.model, family_of(d), 3);
  const auto s = slope_test(r, ln4);
  REQUIRE(s.max_slope.size() == 1);
  CHECK(s.max_slope[0] == doctest::Approx(-ln4).epsilon(1e-14));
  CHECK(s.pass);

  const auto id = zoo::make_model("identity");
  const auto si = slope_test(compute_rates(id.model, family_of(id), 3), 1e-3);
  CHECK(std::abs(si.max_slope[0]) < 1e-15);
  CHECK_FALSE(si.pass);

  const auto cat = zoo::make_model("cat-map");
  const auto sc = slope_test(compute_rates(cat.model, family_of(cat), 2), 2.0 * ln_lambda);
  CHECK(sc.max_slope[0] == doctest::Approx(-2.0 * ln_lambda).epsilon(1e-12));
  CHECK(sc.pass);

  CHECK(default_slope_window(ln4, 1.0) == 1);
  CHECK(default_slope_window(1.0, std::exp(2.0)) == 5);
  CHECK(default_slope_window(1.0, std::exp(2.1)) == 5);
  const auto w = slope_test(r, ln4, std::exp(10.0));
  CHECK_FALSE(w.window_condition);
  CHECK_FALSE(w.pass);
}

TEST_CASE("slope_implies_domination examples") {
  const auto d = zoo::make_model("diagonal");
  const auto pd = family_of(d);
  const auto rd = compute_rates(d.model, pd, 4);
  const auto sd = slope_implies_domination(d.model, pd, rd, slope_test(rd, ln4), GridSpec{});
  bool found = false;
  for (const auto& b : sd.blocks) {
    if (b.l != 3) continue;
    found = true;
    CHECK(b.log_lhs == doctest::Approx(-12.0 * ln4).epsilon(1e-12));
    CHECK(b.log_rhs == doctest::Approx(-6.0 * ln4).epsilon(1e-12));
    CHECK(b.pass);
  }
  CHECK(found);
  CHECK(sd.pass);
  CHECK(sd.certificate.criterion == "slope");

  const auto cat = zoo::make_model("cat-map");
  const auto pc = family_of(cat);
  const auto rc = compute_rates(cat.model, pc, 2);
  const auto sc = slope_implies_domination(cat.model, pc, rc, slope_test(rc, 2.0 * ln_lambda), GridSpec{});
  for (const auto& b : sc.blocks)
    if (b.l == 5) CHECK(b.log_lhs == doctest::Approx(-20.0 * ln_lambda).epsilon(1e-12));
  CHECK(sc.pass);

  const auto id = zoo::make_model("identity");
  const auto pi = family_of(id);
  const auto ri = compute_rates(id.model, pi, 2);
  CHECK(kind_of([&] { slope_implies_domination(id.model, pi, ri, slope_test(ri, 1e-3), GridSpec{}); }) ==
        ErrorKind::precondition_failed);
}

TEST_CASE("slope bound and adjacent gaps on dominated zoo models") {
  for (const char* name : {"diagonal", "cat-map", "rotation-normal", "random-triangular"}) {
    CAPTURE(name);
    const auto z = zoo::make_model(name);
    const auto pf = family_of(z);
    const auto proj = projector_product_all(z.model, pf, GridSpec{});
    const auto red = reducibility_test(z.model, pf);
    const double K = std::max(red.K, proj.k_envelope);
    const long N = default_slope_window(proj.alpha, K);
    const auto r = compute_rates(z.model, pf, N);
    const auto s = slope_test(r, proj.alpha, K);
    for (double v : s.max_slope) CHECK(v <= -proj.alpha / 2.0 + 1e-9);
    CHECK(s.pass);
    std::vector<double> kb;
    for (std::size_t b = 1; b <= pf.blocks(); ++b) {
      const auto u = upper_function_check(z.model, pf, b, r.upper[b - 1], GridSpec{});
      const auto l = lower_function_check(z.model, pf, b, r.lower[b - 1], GridSpec{});
      CHECK(u.pass);
      CHECK(l.pass);
      kb.push_back(std::max(u.K, l.K));
    }
    CHECK(adjacent_gap_check(z.model, r, kb, proj.alpha, 30).pass);
  }
}
