#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "doctest.h"
#include "wparab/error.hpp"
#include "wparab/solver.hpp"

using namespace wparab;

namespace {

const double kPi = std::acos(-1.0);

Matrix scalar(double a) { return a * Matrix::Identity(1, 1); }

CoefficientField unit_A(double T) {
  return CoefficientField::constant(interval(0, 1), {1}, T, 1, scalar(1.0), 0.5);
}

Grid1D grid(int nx, double T, int nt) {
  Grid1D g;
  g.nx = nx;
  g.t1 = T;
  g.nt = nt;
  return g;
}

double manufactured_error(const Weight& beta, int nx, double T) {
  const Grid1D g = grid(nx, T, static_cast<int>(std::lround(T * nx * nx)));
  const SpaceTimeField F = manufactured_forcing(beta, g);
  const SolutionField u =
      solve_ivbp(beta, unit_A(T), F, g, [](double x) { return std::sin(kPi * x); });
  return l2_error(u, [&](double x, double t) { return manufactured_exact(g, x, t); });
}

}  // namespace

TEST_CASE("zero data gives the zero solution") {
  const Grid1D g = grid(16, 0.5, 20);
  const Weight b = Weight::power(interval(0, 1), {0.5}, 0.2);
  const SolutionField u = solve_ivbp(b, unit_A(0.5), SpaceTimeField(g), g, [](double) { return 0.0; });
  for (double v : u.values()) CHECK(v == 0.0);
}

TEST_CASE("manufactured forcing for beta = 1 matches the closed form up to a constant") {
  const Grid1D g = grid(32, 0.5, 8);
  const SpaceTimeField F = manufactured_forcing(Weight::constant(interval(0, 1)), g);
  for (int k = 0; k < g.nt; ++k) {
    const double t = g.t(k + 1);
    for (int i = 0; i < g.nx; ++i) {
      const double x = 0.5 * (g.x(i) + g.x(i + 1));
      // (pi^2 - 1) e^{-t} (-cos(pi x) / pi) plus the constant (pi^2 - 1) e^{-t} / pi.
      const double closed = (kPi * kPi - 1.0) * std::exp(-t) * (1.0 - std::cos(kPi * x)) / kPi;
      CHECK(F.at(i, k) == doctest::Approx(closed).epsilon(1e-12));
    }
  }
}

TEST_CASE("manufactured solution converges at second order for beta = 1") {
  const Weight one = Weight::constant(interval(0, 1));
  const double e1 = manufactured_error(one, 16, 0.25);
  const double e2 = manufactured_error(one, 32, 0.25);
  const double e3 = manufactured_error(one, 64, 0.25);
  CHECK(std::log2(e1 / e2) >= 1.9);
  CHECK(std::log2(e2 / e3) >= 1.9);
}

TEST_CASE("manufactured solution converges for a degenerate power weight") {
  const Weight w = Weight::power(interval(0, 1), {0.5}, 0.2);
  const double e1 = manufactured_error(w, 16, 0.25);
  const double e2 = manufactured_error(w, 32, 0.25);
  const double e3 = manufactured_error(w, 64, 0.25);
  CHECK(std::log2(e1 / e2) >= 1.0);
  CHECK(std::log2(e2 / e3) >= 1.0);
}

TEST_CASE("discrete maximum principle and flux telescoping") {
  const Grid1D g = grid(40, 0.3, 30);
  const Weight w = Weight::power(interval(0, 1), {0.3}, -0.4);
  const auto A = CoefficientField::sample(
      interval(0, 1), {40}, 0.3, 6,
      [](const Point& x, double t) { return scalar(1.0 + 0.5 * std::sin(9 * x[0] + 4 * t)); }, 0.4);
  const SolutionField u =
      solve_ivbp(w, A, SpaceTimeField(g), g, [](double x) { return x * (1 - x) * (x > 0.5); });
  for (double v : u.values()) CHECK(v >= 0.0);

  // With forcing: sum of beta_i h (u^{k+1}-u^k)/tau equals the boundary fluxes.
  const SpaceTimeField F = SpaceTimeField::sample(g, [](double x, double t) { return std::cos(5 * x) * t; });
  const SolutionField v = solve_ivbp(w, A, F, g, [](double x) { return std::sin(kPi * x); });
  const auto& bn = v.beta_nodes();
  for (int k : {0, 7, 29}) {
    double lhs = 0.0;
    for (int i = 1; i < g.nx; ++i) lhs += bn[i] * g.hx() * (v.at(i, k + 1) - v.at(i, k)) / g.tau();
    auto flux = [&](int i) {
      const double a = A.value({0.5 * (g.x(i) + g.x(i + 1))}, g.t(k + 1))(0, 0);
      return a * v.grad(i, k) + F.at(i, k);
    };
    CHECK(lhs == doctest::Approx(flux(g.nx - 1) - flux(0)).epsilon(1e-9));
  }
}

TEST_CASE("dilation reproduces the solution") {
  // u~(x,t) = u(x/2, t/4) solves the same equation on (0,2) x (0,4T).
  const Weight one = Weight::constant(interval(0, 1));
  const Weight one2 = Weight::constant(interval(0, 2));
  const Grid1D g = grid(32, 0.2, 25);
  Grid1D g2 = g;
  g2.b = 2.0;
  g2.t1 = 0.8;
  const SolutionField u = solve_ivbp(one, unit_A(0.2), SpaceTimeField(g), g,
                                     [](double x) { return std::sin(kPi * x) + x * (1 - x); });
  const SolutionField v = solve_ivbp(
      one2, CoefficientField::constant(interval(0, 2), {1}, 0.8, 1, scalar(1.0), 0.5),
      SpaceTimeField(g2), g2, [](double x) { return std::sin(kPi * x / 2) + x / 2 * (1 - x / 2); });
  for (std::size_t j = 0; j < u.values().size(); ++j)
    CHECK(v.values()[j] == doctest::Approx(u.values()[j]).epsilon(1e-11));
}

TEST_CASE("frozen solves: zero data, caloric polynomial, time rescaling") {
  FrozenProblem p;
  p.grid = grid(20, 0.5, 10);
  p.a_bar = [](double) { return 1.0; };
  p.initial = p.left = p.right = [](double) { return 0.0; };
  const SolutionField zero = solve_frozen(p);
  for (double v : zero.values()) CHECK(v == 0.0);

  // x^2 + 2t lies in the kernel of the discrete operator.
  p.grid.a = -0.3;
  p.grid.b = 0.9;
  p.grid.t0 = 0.1;
  p.grid.t1 = 0.6;
  p.initial = [](double x) { return x * x + 0.2; };
  p.left = [](double t) { return 0.09 + 2 * t; };
  p.right = [](double t) { return 0.81 + 2 * t; };
  const SolutionField v = solve_frozen(p);
  double worst = 0.0;
  for (int k = 0; k <= p.grid.nt; ++k)
    for (int i = 0; i <= p.grid.nx; ++i) {
      const double x = p.grid.x(i), t = p.grid.t(k);
      worst = std::max(worst, std::abs(v.at(i, k) - (x * x + 2 * t)));
    }
  CHECK(worst < 1e-13);

  // beta_bar = 2 on [0,T] equals beta_bar = 1 on [0,T/2] with the same number of steps.
  FrozenProblem q;
  q.grid = grid(24, 0.4, 16);
  q.beta_bar = 2.0;
  q.a_bar = [](double) { return 1.0; };
  q.initial = [](double x) { return std::sin(3 * x) + x; };
  q.left = [](double) { return 0.0; };
  q.right = [](double) { return std::sin(3.0) + 1.0; };
  FrozenProblem q1 = q;
  q1.beta_bar = 1.0;
  q1.grid.t1 = 0.2;
  const SolutionField a = solve_frozen(q), b = solve_frozen(q1);
  for (std::size_t j = 0; j < a.values().size(); ++j)
    CHECK(a.values()[j] == doctest::Approx(b.values()[j]).epsilon(1e-12));
}

TEST_CASE("frozen_from interpolates data from the coarse solution") {
  const Grid1D g = grid(32, 0.25, 32);
  const Weight one = Weight::constant(interval(0, 1));
  const SpaceTimeField F = manufactured_forcing(one, g);
  const SolutionField u = solve_ivbp(one, unit_A(0.25), F, g, [](double x) { return std::sin(kPi * x); });
  const NodeCylinder c = node_cylinder(g, 0.3, 0.7, 0.1, 0.2);
  CHECK(c.i0 == 10);  // round(0.3 * 32) = 10
  CHECK(c.i1 == 22);
  const FrozenProblem p = frozen_from(u, one, unit_A(0.25), {{0.5}, 0.2}, 0.2, c, 2, 3);
  CHECK(p.beta_bar == doctest::Approx(1.0));
  CHECK(p.grid.nx == 24);
  CHECK(p.grid.nt == 3 * (c.k1 - c.k0));
  CHECK(p.initial(g.x(12)) == doctest::Approx(u.at(12, c.k0)));
  CHECK(p.left(g.t(c.k0 + 1)) == doctest::Approx(u.at(c.i0, c.k0 + 1)));
  const double tm = 0.5 * (g.t(c.k0) + g.t(c.k0 + 1));
  CHECK(p.right(tm) == doctest::Approx(0.5 * (u.at(c.i1, c.k0) + u.at(c.i1, c.k0 + 1))));
  CHECK_THROWS_AS(node_cylinder(g, 0.5, 0.51, 0.1, 0.2), Error);
}

TEST_CASE("solution dumps round-trip") {
  const Grid1D g = grid(8, 0.5, 4);
  const Weight one = Weight::constant(interval(0, 1));
  SolutionField u = solve_ivbp(one, unit_A(0.5), manufactured_forcing(one, g), g,
                               [](double x) { return std::sin(kPi * x); });
  const std::string bin = "solver_roundtrip.bin", csv = "solver_roundtrip.csv";
  u.write_binary(bin);
  const SolutionField r = SolutionField::read_binary(bin);
  CHECK(r.grid().nx == 8);
  CHECK(r.grid().nt == 4);
  CHECK(r.grid().t1 == 0.5);
  CHECK(r.values() == u.values());
  std::ifstream is(bin, std::ios::binary);
  char head[12];
  is.read(head, 12);
  CHECK(std::string(head, 8) == "WPARABU1");
  CHECK(static_cast<unsigned char>(head[8]) == 0x04);  // little-endian tag
  u.write_csv(csv);
  std::ifstream c(csv);
  std::string line;
  std::getline(c, line);
  CHECK(line == "x,t,u");
  int rows = 0;
  while (std::getline(c, line)) ++rows;
  CHECK(rows == 9 * 5);
  std::remove(bin.c_str());
  std::remove(csv.c_str());
  CHECK_THROWS_AS(SolutionField::read_binary("missing.bin"), Error);
}

TEST_CASE("energy audit: zero, homogeneity, refinement") {
  const Weight one = Weight::constant(interval(0, 1));
  const Grid1D g0 = grid(16, 0.5, 128);
  SolutionField z(g0, nodal_beta(one, g0));
  CHECK(energy_audit(z, SpaceTimeField(g0), one, {{0.5}, 0.45}, 0.1, 10, 10).pass);

  std::vector<double> N;
  for (int nx : {16, 32, 64}) {
    const Grid1D g = grid(nx, 0.5, nx * nx / 2);
    const SpaceTimeField F = manufactured_forcing(one, g);
    const SolutionField u = solve_ivbp(one, unit_A(0.5), F, g, [](double x) { return std::sin(kPi * x); });
    const AuditReport r = energy_audit(u, F, one, {{0.5}, 0.45}, 0.1, 100, 100);
    CHECK(r.pass);
    N.push_back(r.values.at("N_emp"));
    const AuditReport s = energy_audit(u.scaled(3.5), F.scaled(3.5), one, {{0.5}, 0.45}, 0.1, 100, 100);
    CHECK(s.values.at("N_emp") == doctest::Approx(r.values.at("N_emp")).epsilon(1e-10));
  }
  CHECK(std::abs(N[2] / N[1] - 1) < 0.1);
  CHECK(std::abs(N[1] / N[0] - 1) < 0.1);
}

TEST_CASE("poincare audit") {
  const Weight one = Weight::constant(interval(0, 1));
  const Grid1D g = grid(32, 0.5, 256);
  SolutionField c(g, nodal_beta(one, g));
  for (int k = 0; k <= g.nt; ++k)
    for (int i = 0; i <= g.nx; ++i) c.at(i, k) = 2.0;
  const AuditReport r0 = poincare_audit(c, SpaceTimeField(g), one, {{0.5}, 0.4}, 0.2,
                                        PoincareVariant::Interior, 5.0);
  CHECK(r0.rows[0].lhs == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r0.pass);

  const SpaceTimeField F = manufactured_forcing(one, g);
  const SolutionField u = solve_ivbp(one, unit_A(0.5), F, g, [](double x) { return std::sin(kPi * x); });
  for (double r : {0.1, 0.2}) {
    const AuditReport a = poincare_audit(u, F, one, {{0.5}, 0.4}, r, PoincareVariant::Interior, 5.0);
    CHECK(a.pass);
    CHECK(a.values.at("theta_beta") == 0.0);
    // Classical scaling: ratio of order one after dividing by r^2.
    CHECK(a.values.at("classical_ratio") < 1.0);
    const AuditReport b = poincare_audit(u, F, one, {{0.0}, 0.4}, r, PoincareVariant::Boundary, 5.0);
    CHECK(b.pass);
  }
  const Weight rough = Weight::power(interval(0, 1), {0.5}, -0.9);
  CHECK_THROWS_AS(poincare_audit(u, F, rough, {{0.5}, 0.4}, 0.2, PoincareVariant::Interior, 50.0),
                  Error);
  try {
    poincare_audit(u, F, rough, {{0.5}, 0.4}, 0.2, PoincareVariant::Interior, 50.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::GateFailed);
  }
}

TEST_CASE("lipschitz audit") {
  const Weight one = Weight::constant(interval(-1, 1));
  FrozenProblem p;
  p.grid.a = -1;
  p.grid.b = 1;
  p.grid.nx = 40;
  p.grid.t1 = 1;
  p.grid.nt = 40;
  p.a_bar = [](double) { return 1.0; };
  p.initial = p.left = p.right = [](double) { return 0.7; };
  const AuditReport c = lipschitz_audit(solve_frozen(p), 1.0, one, {{0.0}, 1.0}, 0.25, 10.0);
  CHECK(c.rows[0].lhs == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(c.pass);

  std::vector<double> N;
  for (int nx : {20, 40, 80}) {
    p.grid.nx = nx;
    p.grid.nt = nx;
    p.initial = [](double x) { return x * x; };
    p.left = [](double t) { return 1 + 2 * t; };
    p.right = [](double t) { return 1 + 2 * t; };
    const AuditReport r = lipschitz_audit(solve_frozen(p), 1.0, one, {{0.0}, 1.0}, 0.25, 10.0);
    CHECK(r.pass);
    N.push_back(r.values.at("N_emp"));
  }
  CHECK(std::abs(N[2] / N[1] - 1) < 0.1);
}

TEST_CASE("apriori ratio") {
  const Weight one = Weight::constant(interval(0, 1));
  const Grid1D g = grid(32, 0.5, 64);
  const SolutionField z(g, nodal_beta(one, g));
  const AuditReport r0 = apriori_ratio(z, unit_A(0.5), SpaceTimeField(g), 2.0, 10.0);
  CHECK(r0.values.at("ratio") == 0.0);
  CHECK(r0.pass);

  std::vector<double> ratios;
  for (int nx : {16, 32, 64}) {
    const Grid1D gg = grid(nx, 0.5, nx * nx / 2);
    const SpaceTimeField F = SpaceTimeField::sample(
        gg, [](double x, double t) { return std::sin(3 * x + 1) * (1 + t); });
    const SolutionField u = solve_ivbp(one, unit_A(0.5), F, gg, [](double) { return 0.0; });
    const AuditReport r = apriori_ratio(u, unit_A(0.5), F, 2.0, 10.0);
    CHECK(r.pass);
    CHECK(r.rows.size() == 2);
    ratios.push_back(r.values.at("ratio"));
  }
  CHECK(std::abs(ratios[2] / ratios[1] - 1) < 0.1);
  CHECK_THROWS_AS(apriori_ratio(z, unit_A(0.5), SpaceTimeField(g), 1.5, 10.0), Error);
}

TEST_CASE("time shift audit") {
  const Weight one = Weight::constant(interval(0, 1));
  const Grid1D g = grid(32, 0.5, 512);
  const auto phi = [](double x) { return x > 0.2 && x < 0.8 ? std::sin(kPi * (x - 0.2) / 0.6) : 0.0; };
  const SolutionField z(g, nodal_beta(one, g));
  const AuditReport r0 = time_shift_audit(z, unit_A(0.5), SpaceTimeField(g), phi, 2, 1.0);
  CHECK(r0.rows[0].lhs == 0.0);
  CHECK(r0.pass);

  const SpaceTimeField F = manufactured_forcing(one, g);
  const SolutionField u = solve_ivbp(one, unit_A(0.5), F, g, [](double x) { return std::sin(kPi * x); });
  CHECK(time_shift_audit(u, unit_A(0.5), F, [](double) { return 0.0; }, 2, 1.0).rows[0].rhs == 0.0);
  std::vector<double> lhs, hs;
  for (int s : {1, 2, 4}) {
    const AuditReport r = time_shift_audit(u, unit_A(0.5), F, phi, s, 1.0);
    CHECK(r.pass);
    lhs.push_back(r.rows[0].lhs);
    hs.push_back(r.values.at("h"));
  }
  const double slope = std::log(lhs[2] / lhs[0]) / std::log(hs[2] / hs[0]);
  CHECK(slope >= 0.5);
}

TEST_CASE("freeze compare") {
  const Weight one = Weight::constant(interval(0, 1));
  const Grid1D g = grid(64, 0.4, 256);
  const auto init = [](double x) { return std::sin(kPi * x); };
  auto run = [&](double amp) {
    const auto A = CoefficientField::sample(
        interval(0, 1), {64}, 0.4, 1,
        [&](const Point& x, double) { return scalar(1.0 + amp * std::sin(8 * kPi * x[0])); }, 0.5);
    const SolutionField u = solve_ivbp(one, A, SpaceTimeField(g), g, init);
    return freeze_compare(u, one, A, SpaceTimeField(g), {{0.5}, 0.2}, 0.4);
  };
  const AuditReport base = run(0.0);
  CHECK(base.pass);
  CHECK(base.values.at("delta") == 0.0);
  CHECK(base.values.at("epsilon") < 0.05);
  double prev = 1e300;
  for (double a : {0.4, 0.2, 0.1}) {
    const AuditReport r = run(a);
    CHECK(r.values.at("epsilon") < prev);
    CHECK(r.values.at("delta") > 0.0);
    prev = r.values.at("epsilon");
  }
  SolutionField z(g, nodal_beta(one, g));
  const AuditReport t = freeze_compare(z, one, unit_A(0.4), SpaceTimeField(g), {{0.5}, 0.2}, 0.4);
  CHECK(t.pass);
  CHECK(t.notes.count("trivial") == 1);
}
