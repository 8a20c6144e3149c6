#include <cmath>
#include <random>

#include "doctest.h"
#include "wparab/error.hpp"
#include "wparab/geometry.hpp"

using namespace wparab;

TEST_CASE("psi and height closed forms") {
  const Weight one = Weight::constant(interval(-4, 4));
  for (double r : {0.1, 0.5, 2.0}) {
    CHECK(psi(one, {0.3}, r) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(height(one, {0.3}, r) == doctest::Approx(r * r).epsilon(1e-14));
  }
  CHECK(height(one, {0.0}, 0.0) == 0.0);

  // beta = |x|^{1/2}: average over (-r,r) is (2/3) r^{1/2}.
  const Weight half = Weight::power(interval(-4, 4), {0.0}, 0.5);
  for (double r : {0.25, 1.0, 2.0}) {
    CHECK(psi(half, {0.0}, r) == doctest::Approx(2.0 / 3.0 * std::sqrt(r)).epsilon(1e-13));
    CHECK(height(half, {0.0}, r) == doctest::Approx(2.0 / 3.0 * std::pow(r, 2.5)).epsilon(1e-13));
  }
  // beta = |x|: average r/2, so h = r^3/2.
  const Weight lin = Weight::power(interval(-4, 4), {0.0}, 1.0);
  CHECK(psi(lin, {0.0}, 2.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(height(lin, {0.0}, 2.0) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("one-dimensional height equals half the weighted ball mass times r") {
  const Weight w = Weight::power(interval(-1, 1), {0.2}, -0.3);
  for (double x0 : {-0.5, 0.1, 0.4})
    for (double r : {0.05, 0.3, 0.5}) {
      const double mass = w.ball_mass({x0}, r).integral;
      CHECK(height(w, {x0}, r) == doctest::Approx(0.5 * r * mass).epsilon(1e-12));
    }
}

TEST_CASE("height_inverse closed forms") {
  const Weight one = Weight::constant(interval(-4, 4));
  CHECK(height_inverse(one, {0.0}, 4.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(height_inverse(one, {0.0}, 0.0) == 0.0);

  const Weight lin = Weight::power(interval(-4, 4), {0.0}, 1.0);
  CHECK(height_inverse(lin, {0.0}, 4.0) == doctest::Approx(2.0).epsilon(1e-12));
  const Weight half = Weight::power(interval(-4, 4), {0.0}, 0.5);
  for (double s : {1e-4, 0.01, 0.5, 4.0}) {
    CHECK(std::abs(height_inverse(lin, {0.0}, s) - std::cbrt(2.0 * s)) <= 1e-10);
    CHECK(std::abs(height_inverse(half, {0.0}, s) - std::pow(1.5 * s, 0.4)) <= 1e-10);
  }
}

TEST_CASE("height_inverse errors") {
  const Weight one = Weight::constant(interval(-1, 1));
  CHECK_THROWS_AS(height_inverse(one, {0.0}, 2.0), Error);
  try {
    height_inverse(one, {0.0}, 2.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoBracket);
  }
  try {
    height_inverse(one, {1.0}, 0.1);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoBracket);
  }
  CHECK_THROWS_AS(height_inverse(one, {0.0}, -1.0), Error);
}

TEST_CASE("height is strictly increasing and inverts on a log grid") {
  for (double a : {-0.4, 0.0, 0.3, 1.0}) {
    const Weight w = Weight::power(interval(-1, 1), {0.1}, a);
    const Point x0{-0.05};
    double prev = 0.0;
    for (int k = 39; k >= 0; --k) {
      const double r = 0.9 * std::pow(2.0, -k / 4.0);
      const double h = height(w, x0, r);
      CHECK(h > prev);
      prev = h;
      CHECK(height_inverse(w, x0, h) == doctest::Approx(r).epsilon(1e-10));
    }
  }
}

TEST_CASE("quasi_distance: classical form for beta = 1") {
  const Weight one = Weight::constant(interval(-2, 2));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(-0.9, 0.9), ut(0.0, 0.8);
  double worst = 0.0;
  for (int k = 0; k < 2000; ++k) {
    SpaceTimePoint z{{ux(rng)}, ut(rng)}, z0{{ux(rng)}, ut(rng)};
    const double want = std::max(std::abs(z.x[0] - z0.x[0]), std::sqrt(std::abs(z.t - z0.t)));
    worst = std::max(worst, std::abs(quasi_distance(one, z, z0) - want));
  }
  CHECK(worst <= 1e-12);
  CHECK(quasi_distance(one, {{0.2}, 0.1}, {{0.2}, 0.1}) == 0.0);
}

TEST_CASE("quasi_distance: power weight and symmetry") {
  const Weight lin = Weight::power(interval(-4, 4), {0.0}, 1.0);
  CHECK(quasi_distance(lin, {{0.0}, -4.0}, {{0.0}, 0.0}) == doctest::Approx(2.0).epsilon(1e-12));
  const Weight half = Weight::power(interval(-4, 4), {0.0}, 0.5);
  CHECK(quasi_distance(half, {{0.0}, -4.0}, {{0.0}, 0.0}) ==
        doctest::Approx(std::pow(6.0, 0.4)).epsilon(1e-12));

  const Weight w = Weight::power(interval(-1, 1), {0.0}, 0.3);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(-0.5, 0.5), ut(0.0, 0.05);
  for (int k = 0; k < 200; ++k) {
    SpaceTimePoint a{{ux(rng)}, ut(rng)}, b{{ux(rng)}, ut(rng)};
    const double d = quasi_distance(w, a, b);
    CHECK(d == quasi_distance(w, b, a));
    CHECK(d >= std::abs(a.x[0] - b.x[0]));
    CHECK(d > 0.0);
  }
}

TEST_CASE("dilation covariance of the height normalization") {
  // beta~(y) = beta(r y) / Psi(r) has Psi~(1) = 1.
  for (double a : {-0.4, 0.5}) {
    const Weight w = Weight::power(interval(-1, 1), {0.0}, a);
    for (double r : {0.1, 0.5}) {
      const double p = psi(w, {0.2 * r}, r);
      const double s = std::pow(r, a) / p;
      const Weight scaled = Weight::power(interval(-1.0 / r, 1.0 / r), {0.0}, a).scaled(s);
      CHECK(psi(scaled, {0.2}, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("QuasiMetricParams formula") {
  CHECK(QuasiMetricParams::formula(0.5, 1.0, 1) == doctest::Approx(2.0));
  CHECK(QuasiMetricParams::formula(0.25, 2.0, 1) == doctest::Approx(4.0 * 16.0));
  CHECK(QuasiMetricParams::formula(0.9, 1.0, 2) == 2.0);
  CHECK_THROWS_AS(QuasiMetricParams::from_constants(1.5, 2.0, 1), Error);
  const QuasiMetricParams p = QuasiMetricParams::estimate(
      Weight::power(interval(-1, 1), {0.0}, 0.3), WeightContext{1, 10.0});
  CHECK(p.Lambda >= 2.0);
  CHECK(p.zeta0 > 0.0);
  CHECK(p.zeta0 < 1.0);
}

TEST_CASE("quasi_triangle_audit") {
  const Weight one = Weight::constant(interval(-1, 1));
  const AuditReport r1 = quasi_triangle_audit(one, QuasiMetricParams{}, 2000, 3);
  CHECK(r1.pass);
  CHECK(r1.values.at("worst_ratio") <= 1.0 + 1e-12);
  CHECK(r1.values.at("seed") == 3.0);
  CHECK(r1.notes.count("worst_triple") == 1);

  const Weight w = Weight::power(interval(-1, 1), {0.0}, 0.3);
  const QuasiMetricParams p = QuasiMetricParams::estimate(w, WeightContext{1, 10.0});
  const AuditReport r2 = quasi_triangle_audit(w, p, 2000, 5);
  CHECK(r2.pass);
  // Same seed, same report.
  const AuditReport r3 = quasi_triangle_audit(w, p, 2000, 5);
  CHECK(r3.values.at("worst_ratio") == r2.values.at("worst_ratio"));
  CHECK_THROWS_AS(quasi_triangle_audit(w, p, 0, 5), Error);
}

TEST_CASE("cylinder membership conventions") {
  const Weight one = Weight::constant(interval(-2, 2));
  const auto Q = WeightedCylinder::make(one, {{0.0}, 1.0}, 0.5);
  CHECK(Q.h == doctest::Approx(0.25));
  CHECK(Q.contains({{0.5}, 1.0}));
  CHECK(Q.contains({{-0.5}, 0.75}));
  CHECK_FALSE(Q.contains({{0.0}, 1.01}));
  const auto C = WeightedCylinder::make(one, {{0.0}, 1.0}, 0.5, CylinderKind::Centered);
  CHECK(C.t_lo() == doctest::Approx(0.875));
  CHECK(C.t_hi() == doctest::Approx(1.125));
  const auto H = WeightedCylinder::make(one, {{0.0}, 1.0}, 0.5, CylinderKind::Half, 0.0);
  CHECK_FALSE(H.contains({{-0.1}, 1.0}));
  CHECK(H.contains({{0.1}, 1.0}));
  CHECK_THROWS_AS(WeightedCylinder::make(one, {{0.0}, 1.0}, 0.0), Error);
}

TEST_CASE("cylinder_relations_audit") {
  const Weight one = Weight::constant(interval(-4, 4));
  CHECK(cylinder_relations_audit(one, {{0.0}, 0.0}, 1.0).pass);
  const Weight half = Weight::power(interval(-1, 1), {0.0}, 0.5);
  const AuditReport r = cylinder_relations_audit(half, {{0.5}, 0.0}, 0.25);
  CHECK(r.pass);
  CHECK(r.values.at("points_checked") >= 1e4);
  const Weight w2 = Weight::power(rectangle(-1, 1, -1, 1), {0.0, 0.0}, 0.4);
  CHECK(cylinder_relations_audit(w2, {{0.2, 0.1}, 0.0}, 0.3, 36).pass);
}
