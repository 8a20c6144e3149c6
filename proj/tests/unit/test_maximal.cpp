#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "wparab/error.hpp"
#include "wparab/maximal.hpp"

using namespace wparab;

namespace {

Grid1D grid(int nx, double T, int nt) {
  Grid1D g;
  g.nx = nx;
  g.t1 = T;
  g.nt = nt;
  return g;
}

// Independent cell-by-cell average of |g| over a clipped rectangle.
double brute_average(const SpaceTimeField& g, double x0, double x1, double s0, double s1) {
  const Grid1D& G = g.grid();
  double num = 0.0, den = 0.0;
  for (int k = 0; k < G.nt; ++k) {
    const double ot = std::max(0.0, std::min(s1, G.t(k + 1)) - std::max(s0, G.t(k)));
    for (int i = 0; i < G.nx; ++i) {
      const double ox = std::max(0.0, std::min(x1, G.x(i + 1)) - std::max(x0, G.x(i)));
      num += std::abs(g.at(i, k)) * ox * ot;
      den += ox * ot;
    }
  }
  return den > 0.0 ? num / den : 0.0;
}

SpaceTimeField random_field(const Grid1D& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  SpaceTimeField f(g);
  for (double& v : f.values()) v = d(rng) * d(rng) * 3.0;
  return f;
}

}  // namespace

TEST_CASE("rectangle integrator is exact for piecewise constants") {
  const Grid1D g = grid(7, 0.9, 5);
  const SpaceTimeField f = random_field(g, 3);
  const RectIntegrator I(f.abs());
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ux(-0.2, 1.2), ut(-0.2, 1.1);
  for (int j = 0; j < 200; ++j) {
    double a = ux(rng), b = ux(rng), s = ut(rng), t = ut(rng);
    if (a > b) std::swap(a, b);
    if (s > t) std::swap(s, t);
    const double ca = std::max(a, 0.0), cb = std::min(b, 1.0), cs = std::max(s, 0.0), ct = std::min(t, 0.9);
    const double m = std::max(0.0, cb - ca) * std::max(0.0, ct - cs);
    CHECK(I.integral(a, b, s, t) == doctest::Approx(brute_average(f, a, b, s, t) * m).epsilon(1e-12));
  }
}

TEST_CASE("maximal function of constants and indicators") {
  const Grid1D g = grid(16, 1.0, 16);
  const Weight one = Weight::constant(interval(0, 1));
  const auto radii = default_maximal_radii(g);
  CHECK(radii.size() == 24);
  const SpaceTimeField c(g, -2.5);
  const SpaceTimeField M = MaximalOperator(c, one, radii).on_cells();
  for (double v : M.values()) CHECK(v == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(maximal_function(c, one, {{0.0}, 1.0}, radii) == doctest::Approx(2.5).epsilon(1e-12));

  SpaceTimeField e(g);
  e.at(5, 7) = 1.0;
  const double xc = (5.5) / 16, tc = 7.5 / 16;
  // A radius small enough that the cylinder sits inside the cell.
  CHECK(maximal_function(e, one, {{xc}, tc}, {0.01}) == doctest::Approx(1.0).epsilon(1e-12));
  // Far away with one radius: cell measure over the clipped cylinder measure.
  const double r = 0.5;
  const double h = r * r;  // beta = 1 in one dimension
  const double x = 0.7, t = 0.5;
  const double clip = (std::min(1.0, x + r) - std::max(0.0, x - r)) *
                      (std::min(1.0, t + h / 2) - std::max(0.0, t - h / 2));
  CHECK(maximal_function(e, one, {{x}, t}, {r}) == doctest::Approx(1.0 / 256 / clip).epsilon(1e-12));
  // One huge radius: the global average.
  const SpaceTimeField f = random_field(g, 11);
  CHECK(maximal_function(f, one, {{0.3}, 0.4}, {50.0}) ==
        doctest::Approx(f.abs().integral()).epsilon(1e-12));
}

TEST_CASE("maximal function against the brute-force average with a weight") {
  const Grid1D g = grid(12, 0.6, 9);
  const Weight w = Weight::power(interval(0, 1), {0.4}, 0.5);
  const SpaceTimeField f = random_field(g, 5);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> ux(0.0, 1.0), ut(0.0, 0.6), ur(0.02, 0.6);
  for (int j = 0; j < 50; ++j) {
    const double x = ux(rng), t = ut(rng), r = ur(rng);
    const double h = height(w, {x}, r);
    CHECK(maximal_function(f, w, {{x}, t}, {r}) ==
          doctest::Approx(brute_average(f, x - r, x + r, t - h / 2, t + h / 2)).epsilon(1e-11));
  }
}

TEST_CASE("maximal function: sub-pointwise bound, homogeneity, sublinearity") {
  const Grid1D g = grid(10, 1.0, 10);
  const Weight one = Weight::constant(interval(0, 1));
  std::vector<double> radii{0.02, 0.05, 0.2, 0.6};  // h(0.02) = 4e-4 fits inside a slab
  const SpaceTimeField f = random_field(g, 1), k = random_field(g, 2);
  SpaceTimeField sum(g);
  for (std::size_t j = 0; j < sum.values().size(); ++j) sum.values()[j] = f.values()[j] + k.values()[j];
  const SpaceTimeField Mf = MaximalOperator(f, one, radii).on_cells();
  const SpaceTimeField Mk = MaximalOperator(k, one, radii).on_cells();
  const SpaceTimeField Ms = MaximalOperator(sum, one, radii).on_cells();
  const SpaceTimeField M3 = MaximalOperator(f.scaled(3.0), one, radii).on_cells();
  for (std::size_t j = 0; j < Mf.values().size(); ++j) {
    CHECK(Mf.values()[j] >= std::abs(f.values()[j]) * (1 - 1e-12));
    CHECK(M3.values()[j] == doctest::Approx(3.0 * Mf.values()[j]).epsilon(1e-9));
    CHECK(Ms.values()[j] <= (Mf.values()[j] + Mk.values()[j]) * (1 + 1e-12));
  }
}

TEST_CASE("weak (1,1) audit") {
  const Grid1D g = grid(24, 0.5, 24);
  const Weight w = Weight::power(interval(0, 1), {0.5}, 0.2);
  const auto radii = default_maximal_radii(g);
  const std::vector<double> lambdas{0.05, 0.1, 0.3, 1.0, 3.0, 1e6};
  const AuditReport z = weak_1_1_audit(SpaceTimeField(g), w, lambdas, radii);
  CHECK(z.pass);
  for (const auto& row : z.tables.at("levels").rows) CHECK(row[1] == 0.0);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const AuditReport r = weak_1_1_audit(random_field(g, seed), w, lambdas, radii);
    CHECK(r.pass);
    const auto& rows = r.tables.at("levels").rows;
    CHECK(rows.back()[1] == 0.0);
    for (std::size_t j = 1; j < rows.size(); ++j) CHECK(rows[j][1] <= rows[j - 1][1]);
  }
  // Single cell, lambda = 1/2: only cells whose cylinders can see half the mass.
  SpaceTimeField e(g);
  e.at(12, 12) = 1.0;
  const AuditReport s = weak_1_1_audit(e, w, {0.5}, radii);
  CHECK(s.pass);
  const SpaceTimeField M = MaximalOperator(e, w, radii).on_cells();
  double brute = 0.0;
  for (double v : M.values())
    if (v > 0.5) brute += g.hx() * g.tau();
  CHECK(s.tables.at("levels").rows[0][1] == brute);
  CHECK(brute <= 9 * g.hx() * g.tau());
}

TEST_CASE("vitali selection") {
  const Weight one = Weight::constant(interval(0, 1));
  const auto c1 = centered_cylinder(one, {{0.25}, 0.5}, 0.25);
  CoveringFamily f1 = vitali_select({c1});
  CHECK(f1.selected == std::vector<bool>{true});
  CoveringFamily f2 = vitali_select({c1, c1});
  CHECK(f2.selected == std::vector<bool>{true, false});
  CHECK(f2.witness[1] == 0);

  // Touching cylinders are disjoint as open sets.
  const auto c2 = centered_cylinder(one, {{0.75}, 0.5}, 0.25);
  CHECK(disjoint(c1, c2));
  CHECK(vitali_select({c1, c2}).selected_indices().size() == 2);

  for (double alpha : {0.0, 0.5, -0.3}) {
    const Weight w = Weight::power(interval(-1, 1), {0.1}, alpha);
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> ux(-0.5, 0.5), ut(0.0, 0.5), ur(0.01, 0.2);
    std::vector<CenteredCylinder> fam;
    for (int j = 0; j < 100; ++j) fam.push_back(centered_cylinder(w, {{ux(rng)}, ut(rng)}, ur(rng)));
    const CoveringFamily cf = vitali_select(fam);
    const AuditReport rep = verify_covering(cf, w);
    CHECK(rep.pass);
    CHECK(rep.values.at("selected") >= 1);

    // Permutation invariance (radii are distinct almost surely).
    std::vector<int> perm(fam.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<CenteredCylinder> shuffled;
    for (int p : perm) shuffled.push_back(fam[p]);
    const CoveringFamily sf = vitali_select(shuffled);
    for (std::size_t j = 0; j < perm.size(); ++j) CHECK(sf.selected[j] == cf.selected[perm[j]]);
  }
}

TEST_CASE("level-set decay audit") {
  const Weight one = Weight::constant(interval(0, 1));
  const Grid1D g = grid(32, 0.25, 256);
  LevelsetOptions opt;
  const SolutionField z(g, nodal_beta(one, g));
  const AuditReport r0 = levelset_decay_audit(z, SpaceTimeField(g), one, opt);
  CHECK(r0.pass);
  CHECK(r0.values.at("gamma1") == 0.0);

  const auto A = CoefficientField::constant(interval(0, 1), {1}, 0.25, 1, 1.0 * Matrix::Identity(1, 1), 0.5);
  const SpaceTimeField F = manufactured_forcing(one, g);
  const SolutionField u =
      solve_ivbp(one, A, F, g, [](double x) { return std::sin(std::acos(-1.0) * x); });
  const AuditReport r = levelset_decay_audit(u, F, one, opt);
  CHECK(r.pass);
  CHECK(std::isfinite(r.values.at("gamma1")));
  const auto& t = r.tables.at("decay");
  CHECK(t.columns == std::vector<std::string>{"m", "lhs", "rhs", "gamma1_fit"});
  CHECK(t.rows.size() == 5);
  for (std::size_t j = 1; j < t.rows.size(); ++j) CHECK(t.rows[j][1] <= t.rows[j - 1][1]);
  for (const auto& row : t.rows) CHECK(row[1] <= row[2] * (1 + 1e-12));
  CHECK(r.values.at("precondition_pass") == 1.0);

  opt.K = 0.5;
  CHECK_THROWS_AS(levelset_decay_audit(u, F, one, opt), Error);
}
