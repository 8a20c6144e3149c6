#include <cmath>

#include "doctest.h"
#include "wparab/error.hpp"
#include "wparab/inequality.hpp"

using namespace wparab;

TEST_CASE("test functions agree with finite differences") {
  const TestFunction p = TestFunction::polynomial({1.0, -2.0, 0.5, 3.0});
  const TestFunction s = TestFunction::trigonometric(1.5, 32 * M_PI, 0.3, 0.2);
  const TestFunction l = TestFunction::piecewise_linear({-1.0, 0.0, 0.3, 1.0}, {0.0, 2.0, -1.0, 1.0});
  for (const TestFunction* f : {&p, &s, &l}) {
    CHECK(f->max_fd_error(7, 200, -1.0, 1.0) < 1e-6);
    CHECK(f->scaled(-2.0).max_fd_error(8, 50, -1.0, 1.0) < 1e-6);
  }
  CHECK(p.value(2.0) == doctest::Approx(1 - 4 + 2 + 24));
  CHECK(p.gradient(2.0) == doctest::Approx(-2 + 2 + 36));
  CHECK(l.value(0.15) == doctest::Approx(0.5));
  CHECK(l.value(-3.0) == 0.0);
  CHECK(l.gradient(-3.0) == 0.0);
  CHECK(l.kinks().size() == 4);
  CHECK(s.scaled(2.0).value(0.1) == doctest::Approx(2 * s.value(0.1)));
  CHECK_THROWS_AS(TestFunction::piecewise_linear({0.0, 0.0}, {1.0, 2.0}), Error);
}

TEST_CASE("composite quadrature handles singular weights and oscillation") {
  CHECK(integrate_1d([](double x) { return std::pow(std::abs(x), -0.5); }, -1, 1, {0.0}) ==
        doctest::Approx(4.0).epsilon(1e-10));
  CHECK(integrate_1d([](double x) { return std::pow(std::sin(32 * M_PI * x), 2); }, -1, 1, {},
                     32 * M_PI) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("weighted L^q control") {
  const Weight one = Weight::constant(interval(-1, 1));
  const TestFunction c = TestFunction::polynomial({1.0});
  const AuditReport r1 = weighted_lq_control_audit(c, one, 2.0, 0.0, 1.0, 0.1, 1.5);
  CHECK(r1.pass);
  CHECK(r1.values.at("N_emp") == doctest::Approx(1.0).epsilon(1e-10));

  // g = x, mu = |x|^{1/2}: avg |x|^p = 1/(p+1); int x^2 |x|^{1/2} = 4/7, mu(B) = 4/3.
  const Weight mu = Weight::power(interval(-1, 1), {0.0}, 0.5);
  const TestFunction x = TestFunction::polynomial({0.0, 1.0});
  const AuditReport r2 = weighted_lq_control_audit(x, mu, 2.0, 0.0, 1.0, 0.1, 10.0);
  const double p = 2.0 / 1.9;
  const double lhs = std::pow(1.0 / (p + 1.0), 1.0 / p), rhs = std::sqrt(3.0 / 7.0);
  const auto& row = r2.tables.at("dilation_sweep").rows.front();
  CHECK(row[1] == doctest::Approx(lhs).epsilon(1e-9));
  CHECK(row[2] == doctest::Approx(rhs).epsilon(1e-9));
  CHECK(r2.values.at("N_emp") == doctest::Approx(lhs / rhs).epsilon(1e-9));
  CHECK(r2.pass);
  // Both g = x and mu are homogeneous about 0, so every dilation gives the same constant.
  CHECK(r2.values.at("N_spread") == doctest::Approx(1.0).epsilon(1e-8));

  // Homogeneity in g.
  const AuditReport r3 = weighted_lq_control_audit(x.scaled(-7.0), mu, 2.0, 0.0, 1.0, 0.1, 10.0);
  CHECK(r3.values.at("N_emp") == doctest::Approx(r2.values.at("N_emp")).epsilon(1e-10));

  // g concentrated away from where mu is large.
  const Weight sing = Weight::power(interval(-1, 1), {0.0}, -0.6);
  const TestFunction bump = TestFunction::piecewise_linear({-1, -0.05, 0.05, 1}, {1, 0, 0, 1});
  const AuditReport r4 = weighted_lq_control_audit(bump, sing, 2.0, 0.0, 1.0, 0.2, 50.0);
  CHECK(r4.pass);
  CHECK(std::isfinite(r4.values.at("N_emp")));

  CHECK_THROWS_AS(weighted_lq_control_audit(x, mu, 2.0, 0.0, 1.0, 1.0, 10.0), Error);
  try {
    weighted_lq_control_audit(x, Weight::power(interval(-1, 1), {0.0}, 1.5), 2.0, 0.0, 1.0, 0.1, 10.0);
    FAIL("expected a gate failure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::GateFailed);
  }
  try {
    weighted_lq_control_audit(x, mu, 2.0, 0.0, 1.0, 0.1, 1.0);
    FAIL("expected a gate failure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::GateFailed);
  }
}

TEST_CASE("weighted embedding") {
  const Weight one = Weight::constant(interval(-1, 1));
  const AuditReport r1 =
      weighted_embedding_audit(TestFunction::polynomial({2.0}), one, EmbeddingCase::LowDimension, 0.5, 0.0, 1.0);
  CHECK(r1.values.at("N_emp") == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r1.pass);

  // beta = |x|^{0.2}, g = 1 + x, gamma = 0.5 so s = 6.
  const Weight beta = Weight::power(interval(-1, 1), {0.0}, 0.2);
  const TestFunction g = TestFunction::polynomial({1.0, 1.0});
  const AuditReport r2 = weighted_embedding_audit(g, beta, EmbeddingCase::LowDimension, 0.5, 0.0, 1.0);
  const double lhs = (2 / 1.2 + 2 / 3.2) / (2 / 1.2);
  const double rhs = std::pow(64.0 / 7.0, 1.0 / 3.0);
  CHECK(r2.values.at("s") == doctest::Approx(6.0));
  CHECK(r2.values.at("lhs") == doctest::Approx(lhs).epsilon(1e-10));
  CHECK(r2.values.at("rhs") == doctest::Approx(rhs).epsilon(1e-10));
  CHECK(r2.pass);

  // Invariance under g -> c g and beta -> c beta.
  const AuditReport r3 =
      weighted_embedding_audit(g.scaled(0.01), beta.scaled(40.0), EmbeddingCase::LowDimension, 0.5, 0.0, 1.0);
  CHECK(r3.values.at("N_emp") == doctest::Approx(r2.values.at("N_emp")).epsilon(1e-10));

  // Unweighted case is Jensen: the constant never exceeds 1.
  const AuditReport r4 = weighted_embedding_audit(g, one, EmbeddingCase::LowDimension, 0.5, 0.0, 1.0);
  CHECK(r4.values.at("N_emp") <= 1.0 + 1e-12);
  CHECK(r4.values.at("holder_bound") == doctest::Approx(1.0));

  const TestFunction osc = TestFunction::trigonometric(1.0, 32 * M_PI);
  const AuditReport r5 = weighted_embedding_audit(osc, beta, EmbeddingCase::LowDimension, 0.5, 0.0, 1.0);
  CHECK(r5.pass);
  CHECK(std::isfinite(r5.values.at("N_emp")));

  CHECK_THROWS_AS(weighted_embedding_audit(g, beta, EmbeddingCase::HighDimension, 0.5, 0.0, 1.0), Error);
  CHECK_THROWS_AS(weighted_embedding_audit(g, beta, EmbeddingCase::LowDimension, 0.0, 0.0, 1.0), Error);

  const AuditReport r6 = weighted_embedding_audit(g, beta, EmbeddingCase::LowDimension, 50.0, 0.0, 1.0, 1.01);
  CHECK(r6.values.at("gamma_exceeds_reverse_holder") == 1.0);
  CHECK(r6.notes.count("reverse_holder") == 1);
}

TEST_CASE("interpolation inequality") {
  const Weight beta = Weight::power(interval(-1, 1), {0.0}, 0.2);
  SpaceTimeFunction c;
  c.space = TestFunction::polynomial({3.0});
  const AuditReport r0 = interpolation_audit(c, beta, 0.0, 1.0);
  for (const auto& row : r0.tables.at("theta_grid").rows) {
    CHECK(row[1] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(row[2] == doctest::Approx(1.0).epsilon(1e-10));
  }
  CHECK(r0.pass);
  CHECK(r0.notes.count("r_sweep") == 1);

  // beta = 1, u = x on (-1,1): lhs = A = 1/3, G = 1.
  SpaceTimeFunction lin;
  lin.space = TestFunction::polynomial({0.0, 1.0});
  const AuditReport r1 = interpolation_audit(lin, Weight::constant(interval(-1, 1)), 0.0, 1.0);
  for (const auto& row : r1.tables.at("theta_grid").rows)
    CHECK(row[1] == doctest::Approx((1.0 / 3) / (1.0 / 3 + std::pow(1.0 / 3, 1 - row[0]))).epsilon(1e-10));
  CHECK(r1.values.at("theta_min_full") == doctest::Approx(0.95));

  SpaceTimeFunction u;
  u.space = TestFunction::trigonometric(1.0, M_PI);
  u.time_poly = {1.0, 1.0};
  InterpolationOptions opt;
  opt.r_sweep = {1.0, 0.5, 0.25};
  const AuditReport r2 = interpolation_audit(u, beta, 0.0, 1.0, opt);
  CHECK(r2.pass);
  CHECK(std::isfinite(r2.values.at("N_emp_full")));
  CHECK(std::isfinite(r2.values.at("N_emp_half")));
  CHECK(std::abs(r2.values.at("r_exponent_fit") - r2.values.at("r_exponent_expected")) <= 0.1);
  // beta is homogeneous about x0, so the dilated sweep reproduces one constant.
  const auto& sw = r2.tables.at("r_sweep").rows;
  for (const auto& row : sw) CHECK(row[4] == doctest::Approx(sw.front()[4]).epsilon(1e-8));
  CHECK(r2.values.at("theta_proof") == doctest::Approx(1.0 / 2.2));

  // Homogeneity in u.
  SpaceTimeFunction u3 = u;
  u3.space = u.space.scaled(3.0);
  const AuditReport r3 = interpolation_audit(u3, beta, 0.0, 1.0, opt);
  CHECK(r3.values.at("N_emp_full") == doctest::Approx(r2.values.at("N_emp_full")).epsilon(1e-10));

  // Smooth u with u(x0) != 0: the gradient term fades as r shrinks.
  SpaceTimeFunction v;
  v.space = TestFunction::trigonometric(1.0, M_PI, 0.0, 2.0);
  const AuditReport r4 = interpolation_audit(v, beta, 0.0, 1.0, opt);
  const auto& lim = r4.tables.at("fixed_u").rows;
  CHECK(lim.back()[3] < lim.front()[3]);
  CHECK(lim.back()[3] < 0.1);
}
