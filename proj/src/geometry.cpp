#include "wparab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <boost/math/tools/toms748_solve.hpp>

#include "wparab/error.hpp"

namespace wparab {

namespace {

double spatial_distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

double psi(const Weight& beta, const Point& x0, double r) {
  const int n0 = beta.dim() < 2 ? 2 : beta.dim();
  const double avg = beta.pow(0.5 * n0).ball_mass(x0, r).average();
  return std::pow(avg, 2.0 / n0);
}

double height(const Weight& beta, const Point& x0, double r) {
  if (r == 0.0) return 0.0;
  return r * r * psi(beta, x0, r);
}

double domain_radius(const Weight& beta, const Point& x0) {
  const Box& d = beta.domain();
  double R = std::numeric_limits<double>::infinity();
  for (int i = 0; i < d.dim(); ++i) R = std::min({R, x0[i] - d.lo[i], d.hi[i] - x0[i]});
  return std::max(R, 0.0);
}

double height_inverse(const Weight& beta, const Point& x0, double s) {
  if (s < 0.0) fail(ErrorKind::InvalidInput, "height_inverse needs s >= 0");
  if (s == 0.0) return 0.0;
  const double R = domain_radius(beta, x0);
  if (!(R > 0.0)) fail(ErrorKind::NoBracket, "center lies on the domain boundary");
  const double fR = height(beta, x0, R) - s;
  if (fR < 0.0) {
    std::ostringstream os;
    os << "time gap " << s << " exceeds the height " << fR + s << " at radius " << R;
    fail(ErrorKind::NoBracket, os.str());
  }
  if (fR == 0.0) return R;
  auto f = [&](double r) { return height(beta, x0, r) - s; };
  // Shrink the lower end dyadically so the solver never probes radii whose
  // ball measure underflows.
  double lo = R, flo = fR, hi = R, fhi = fR;
  while (flo >= 0.0) {
    hi = lo;
    fhi = flo;
    lo *= 0.5;
    if (lo < 1e-100) {
      lo = 0.0;
      flo = -s;
      break;
    }
    flo = f(lo);
  }
  if (flo == 0.0) return lo;
  std::uintmax_t iters = 80;
  auto bracket = boost::math::tools::toms748_solve(
      f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (bracket.first + bracket.second);
}

double quasi_distance(const Weight& beta, const SpaceTimePoint& z, const SpaceTimePoint& z0) {
  const double dx = spatial_distance(z.x, z0.x);
  const double dt = std::abs(z.t - z0.t);
  if (dt == 0.0) return dx;
  const Point& base = z.t > z0.t ? z.x : z0.x;
  return std::max(dx, height_inverse(beta, base, dt));
}

WeightedCylinder WeightedCylinder::make(const Weight& beta, SpaceTimePoint z0, double r,
                                        CylinderKind kind, double flat) {
  if (!(r > 0.0)) fail(ErrorKind::InvalidInput, "cylinder radius must be positive");
  WeightedCylinder c;
  c.h = height(beta, z0.x, r);
  c.z0 = std::move(z0);
  c.r = r;
  c.kind = kind;
  c.flat = flat;
  return c;
}

double WeightedCylinder::t_lo() const {
  return kind == CylinderKind::Centered ? z0.t - 0.5 * h : z0.t - h;
}

double WeightedCylinder::t_hi() const {
  return kind == CylinderKind::Centered ? z0.t + 0.5 * h : z0.t;
}

bool WeightedCylinder::contains(const SpaceTimePoint& z, double rel_tol) const {
  if (spatial_distance(z.x, z0.x) > r * (1.0 + rel_tol)) return false;
  const double slack = rel_tol * h;
  if (z.t < t_lo() - slack || z.t > t_hi() + slack) return false;
  if (kind == CylinderKind::Half && z.x.back() < flat - rel_tol * r) return false;
  return true;
}

double QuasiMetricParams::formula(double zeta0, double N2, int n) {
  return std::max(std::pow(2.0, 1.0 / (2.0 * zeta0)) * std::pow(N2, 1.0 / (n * zeta0)), 2.0);
}

QuasiMetricParams QuasiMetricParams::from_constants(double zeta0, double N2, int n) {
  if (!(zeta0 > 0.0 && zeta0 < 1.0)) fail(ErrorKind::InvalidInput, "zeta0 must lie in (0,1)");
  if (!(N2 > 0.0)) fail(ErrorKind::InvalidInput, "N2 must be positive");
  return {formula(zeta0, N2, n), zeta0, N2};
}

QuasiMetricParams QuasiMetricParams::estimate(const Weight& beta, const WeightContext& ctx) {
  const Weight wbar = beta.pow(0.5 * ctx.n0());
  const PropertyConstants pc = estimate_property_constants(wbar, BallFamily::default_for(beta, 17, 12));
  return from_constants(pc.zeta0, pc.N2, beta.dim());
}

TriangleSampling TriangleSampling::default_for(const Weight& beta) {
  const Box& d = beta.domain();
  TriangleSampling s;
  s.space = d;
  double extent = 0.0;
  Point mid(d.dim());
  for (int i = 0; i < d.dim(); ++i) {
    const double c = 0.5 * (d.lo[i] + d.hi[i]), q = 0.25 * (d.hi[i] - d.lo[i]);
    s.space.lo[i] = c - q;
    s.space.hi[i] = c + q;
    mid[i] = c;
    extent = std::max(extent, d.hi[i] - d.lo[i]);
  }
  s.t_lo = 0.0;
  s.t_hi = 0.5 * height(beta, mid, extent / 8.0);
  return s;
}

AuditReport quasi_triangle_audit(const Weight& beta, const QuasiMetricParams& params,
                                 std::int64_t samples, std::uint64_t seed,
                                 std::optional<TriangleSampling> sampling) {
  if (samples < 1) fail(ErrorKind::InvalidInput, "samples must be >= 1");
  const TriangleSampling S = sampling ? *sampling : TriangleSampling::default_for(beta);
  const int n = beta.dim();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&]() {
    SpaceTimePoint z;
    z.x.resize(n);
    for (int i = 0; i < n; ++i) z.x[i] = S.space.lo[i] + (S.space.hi[i] - S.space.lo[i]) * unit(rng);
    z.t = S.t_lo + (S.t_hi - S.t_lo) * unit(rng);
    return z;
  };
  double worst = 0.0;
  SpaceTimePoint w0, w1, w2;
  std::int64_t skipped = 0, degenerate = 0;
  for (std::int64_t k = 0; k < samples; ++k) {
    SpaceTimePoint z0 = draw(), z1 = draw(), zb = draw();
    try {
      const double a = quasi_distance(beta, z0, z1);
      const double b = quasi_distance(beta, z1, zb);
      const double c = quasi_distance(beta, z0, zb);
      if (a + b == 0.0) {
        ++degenerate;
        continue;
      }
      const double ratio = c / (a + b);
      if (ratio > worst) {
        worst = ratio;
        w0 = z0;
        w1 = z1;
        w2 = zb;
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoBracket) throw;
      ++skipped;
    }
  }
  AuditReport rep;
  rep.name = "quasi_triangle";
  rep.anchor = "quasi-triangle inequality for the weighted parabolic distance";
  rep.values["seed"] = static_cast<double>(seed);
  rep.values["samples"] = static_cast<double>(samples);
  rep.values["skipped_no_bracket"] = static_cast<double>(skipped);
  rep.values["degenerate"] = static_cast<double>(degenerate);
  rep.values["Lambda"] = params.Lambda;
  rep.values["zeta0"] = params.zeta0;
  rep.values["N2"] = params.N2;
  rep.values["worst_ratio"] = worst;
  if (worst > 0.0) {
    std::ostringstream os;
    os.precision(17);
    auto put = [&](const SpaceTimePoint& z) {
      os << "(";
      for (double x : z.x) os << x << ", ";
      os << z.t << ")";
    };
    put(w0);
    os << " ";
    put(w1);
    os << " ";
    put(w2);
    rep.notes["worst_triple"] = os.str();
  }
  rep.add_row({"rho(z0,zb) <= Lambda (rho(z0,z1) + rho(z1,zb))", worst, 1.0, worst, params.Lambda,
               worst <= params.Lambda});
  return rep;
}

AuditReport cylinder_relations_audit(const Weight& beta, const SpaceTimePoint& z0, double r,
                                     int lattice) {
  if (beta.dim() != 1 && beta.dim() != 2) fail(ErrorKind::InvalidInput, "dimension 1 or 2");
  const double tol = 1e-9;
  const int n = beta.dim();
  const WeightedCylinder Q = WeightedCylinder::make(beta, z0, r, CylinderKind::Backward);
  const WeightedCylinder C2 = WeightedCylinder::make(beta, z0, 2.0 * r, CylinderKind::Centered);
  const WeightedCylinder C1 = WeightedCylinder::make(beta, z0, r, CylinderKind::Centered);

  // Lattice over the spatial ball (a segment in 1D, a square clipped to the disc in 2D).
  std::vector<Point> xs;
  const int m = n == 1 ? lattice : std::max(2, static_cast<int>(std::sqrt(double(lattice))));
  if (n == 1) {
    for (int i = 0; i <= m; ++i) xs.push_back({z0.x[0] - r + 2.0 * r * i / m});
  } else {
    for (int i = 0; i <= m; ++i)
      for (int j = 0; j <= m; ++j) {
        Point x{z0.x[0] - r + 2.0 * r * i / m, z0.x[1] - r + 2.0 * r * j / m};
        if (spatial_distance(x, z0.x) <= r) xs.push_back(x);
      }
  }
  const int mt = n == 1 ? lattice : m;
  std::int64_t checked = 0, bad_q = 0, bad_rho = 0, bad_c = 0;
  double max_rho_q = 0.0, max_rho_c = 0.0, max_t_excess = 0.0;

  // Q_r subset of {rho <= r}.
  for (const Point& x : xs) {
    for (int k = 0; k <= mt; ++k) {
      SpaceTimePoint z{x, Q.t_lo() + (Q.t_hi() - Q.t_lo()) * k / mt};
      const double d = quasi_distance(beta, z, z0);
      max_rho_q = std::max(max_rho_q, d / r);
      ++checked;
      if (d > r * (1.0 + tol)) ++bad_q;
    }
  }
  // {rho <= r} subset of C_{2r}: scan the bounding box of the rho-ball.
  double up = 0.0;
  for (const Point& x : xs) up = std::max(up, height(beta, x, r));
  const double down = Q.h;
  for (const Point& x : xs) {
    for (int k = 0; k <= 2 * mt; ++k) {
      SpaceTimePoint z{x, z0.t - down + (down + up) * k / (2 * mt)};
      double d;
      try {
        d = quasi_distance(beta, z, z0);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoBracket) throw;
        continue;
      }
      if (d > r) continue;
      ++checked;
      const double excess = std::abs(z.t - z0.t) / (0.5 * C2.h);
      max_t_excess = std::max(max_t_excess, excess);
      if (!C2.contains(z, tol)) ++bad_rho;
    }
  }
  // rho <= 2r on C_r.
  for (const Point& x : xs) {
    for (int k = 0; k <= mt; ++k) {
      SpaceTimePoint z{x, C1.t_lo() + (C1.t_hi() - C1.t_lo()) * k / mt};
      double d;
      try {
        d = quasi_distance(beta, z, z0);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoBracket) throw;
        ++bad_c;
        continue;
      }
      max_rho_c = std::max(max_rho_c, d / r);
      ++checked;
      if (d > 2.0 * r * (1.0 + tol)) ++bad_c;
    }
  }
  AuditReport rep;
  rep.name = "cylinder_relations";
  rep.anchor = "cylinder and quasi-ball inclusions";
  rep.values["points_checked"] = static_cast<double>(checked);
  rep.values["r"] = r;
  rep.values["height"] = Q.h;
  rep.add_row({"Q_r within {rho <= r}", max_rho_q, 1.0, static_cast<double>(bad_q), 1.0, bad_q == 0});
  rep.add_row({"{rho <= r} within C_2r (time ratio)", max_t_excess, 1.0,
               static_cast<double>(bad_rho), 1.0, bad_rho == 0});
  rep.add_row({"rho <= 2r on C_r", max_rho_c, 2.0, static_cast<double>(bad_c), 2.0, bad_c == 0});
  return rep;
}

}  // namespace wparab
