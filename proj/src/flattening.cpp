#include "wparab/flattening.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wparab/error.hpp"
#include "wparab/oscillation.hpp"

namespace wparab {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

void require_2d(const Point& p) {
  if (p.size() != 2) fail(ErrorKind::InvalidInput, "flattening works in two dimensions");
}

// Points of the open unit disc: a lattice plus a ring just inside the boundary.
std::vector<Point> disc_samples(int samples) {
  if (samples < 2) fail(ErrorKind::InvalidInput, "need at least two samples per axis");
  std::vector<Point> pts;
  for (int i = 0; i < samples; ++i)
    for (int j = 0; j < samples; ++j) {
      const double a = -1.0 + 2.0 * i / (samples - 1), b = -1.0 + 2.0 * j / (samples - 1);
      if (a * a + b * b < 1.0) pts.push_back({a, b});
    }
  constexpr int kRing = 64;
  const double rad = 1.0 - 1e-12;
  for (int k = 0; k < kRing; ++k) {
    const double th = 2.0 * kPi * k / kRing;
    pts.push_back({rad * std::cos(th), rad * std::sin(th)});
  }
  return pts;
}

double dist(const Point& a, const Point& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t j = 0; j < x.size(); ++j) mx += x[j] / n, my += y[j] / n;
  double sxy = 0, sxx = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    sxy += (x[j] - mx) * (y[j] - my);
    sxx += (x[j] - mx) * (x[j] - mx);
  }
  return sxy / sxx;
}

template <class F>
void for_each_ball(const BallFamily& fam, F&& f) {
  for (const Point& c : fam.centers)
    for (double r : fam.radii) {
      try {
        f(c, r);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::EmptyBall) throw;
      }
    }
}

double sup_theta_beta(const Weight& w, const BallFamily& fam) {
  double best = 0.0;
  for_each_ball(fam, [&](const Point& c, double r) { best = std::max(best, theta_beta_ms(w, c, r)); });
  return best;
}

}  // namespace

BoundaryChart::BoundaryChart(ChartKind kind, double delta, double base, double width)
    : kind_(kind), delta_(delta), base_(base), width_(width) {
  if (!(delta >= 0.0 && delta < 1.0))
    fail(ErrorKind::InvalidInput, "chart Lipschitz bound must lie in [0, 1)");
  if (!(width > 0.0)) fail(ErrorKind::InvalidInput, "bump width must be positive");
}

BoundaryChart BoundaryChart::flat() { return {ChartKind::Affine, 0.0, 0.0, 1.0}; }
BoundaryChart BoundaryChart::affine(double delta, double base) {
  return {ChartKind::Affine, delta, base, 1.0};
}
BoundaryChart BoundaryChart::bump(double delta, double base, double width) {
  return {ChartKind::Bump, delta, base, width};
}

double BoundaryChart::phi(double s) const {
  if (kind_ == ChartKind::Affine) return delta_ * (s - base_);
  return delta_ * width_ * (1.0 - std::cos((s - base_) / width_));
}

double BoundaryChart::dphi(double s) const {
  if (kind_ == ChartKind::Affine) return delta_;
  return delta_ * std::sin((s - base_) / width_);
}

BoundaryChart BoundaryChart::with_delta(double delta) const {
  return {kind_, delta, base_, width_};
}

Point phi_map(const BoundaryChart& c, const Point& x) {
  require_2d(x);
  return {x[0], x[1] - c.phi(x[0])};
}

Point phi_inverse(const BoundaryChart& c, const Point& y) {
  require_2d(y);
  return {y[0], y[1] + c.phi(y[0])};
}

Matrix phi_jacobian(const BoundaryChart& c, const Point& x) {
  require_2d(x);
  Matrix J = Matrix::Identity(2, 2);
  J(1, 0) = -c.dphi(x[0]);
  return J;
}

AuditReport inclusion_audit(const BoundaryChart& c, const Point& y0, double r, int samples) {
  require_2d(y0);
  if (!(r > 0.0)) fail(ErrorKind::InvalidInput, "radius must be positive");
  const Point x0 = phi_inverse(c, y0);
  double inner = 0.0, outer = 0.0;
  const auto pts = disc_samples(samples);
  for (const Point& p : pts) {
    const Point x{x0[0] + 0.5 * r * p[0], x0[1] + 0.5 * r * p[1]};
    inner = std::max(inner, dist(phi_map(c, x), y0) / r);
    const Point y{y0[0] + r * p[0], y0[1] + r * p[1]};
    outer = std::max(outer, dist(phi_inverse(c, y), x0) / (2.0 * r));
  }
  AuditReport rep;
  rep.name = "inclusion";
  rep.anchor = "inclusion of balls under the flattening map";
  rep.values["delta"] = c.delta();
  rep.values["r"] = r;
  rep.values["samples"] = double(pts.size());
  rep.values["inner_ratio"] = inner;
  rep.values["outer_ratio"] = outer;
  rep.values["lipschitz_bound"] = 0.5 * (1.0 + c.delta());
  rep.values["slack"] = 1.0 / std::max(inner, outer);
  rep.add_row({"B_{r/2}(x0) inside Phi^-1(B_r(y0))", inner, 1.0, inner, 1.0, inner < 1.0});
  rep.add_row({"Phi^-1(B_r(y0)) inside B_{2r}(x0)", outer, 1.0, outer, 1.0, outer < 1.0});
  return rep;
}

AuditReport rho_search(const BoundaryChart& c, const Point& y0, double R, double Lambda,
                       const std::vector<double>& radii, int samples) {
  require_2d(y0);
  if (!(R > 0.0 && Lambda >= 1.0)) fail(ErrorKind::InvalidInput, "need R > 0 and Lambda >= 1");
  std::vector<double> grid = radii;
  std::sort(grid.begin(), grid.end(), std::greater<>());
  const Point x0 = phi_inverse(c, y0);
  const auto pts = disc_samples(samples);
  double found = 0.0;
  for (double rho : grid) {
    const double s = 2.0 * Lambda * rho;
    bool ok = true;
    for (const Point& p : pts) {
      if (p[1] <= 0.0) continue;
      const Point y{y0[0] + s * p[0], y0[1] + s * p[1]};
      if (!(dist(phi_inverse(c, y), x0) < R)) {
        ok = false;
        break;
      }
    }
    if (ok) {
      found = rho;
      break;
    }
  }
  AuditReport rep;
  rep.name = "rho_search";
  rep.anchor = "choice of the flattened cylinder radius";
  rep.values["rho"] = found;
  rep.values["rho_sufficient"] = R / (2.0 * Lambda * (1.0 + c.delta()));
  rep.values["R"] = R;
  rep.values["Lambda"] = Lambda;
  rep.notes["rho"] = "first radius on the decreasing grid whose flattened upper half ball pulls back into B_R";
  rep.add_row({"admissible rho found", found, 0.0, found, 0.0, found > 0.0});
  return rep;
}

Matrix flattening_B(const Matrix& A, double dphi) {
  if (A.rows() != 2 || A.cols() != 2) fail(ErrorKind::InvalidInput, "B formula is for 2x2 matrices");
  Matrix B = Matrix::Zero(2, 2);
  B(0, 1) = -A(0, 0) * dphi;
  B(1, 0) = -A(0, 0) * dphi;
  B(1, 1) = A(0, 0) * dphi * dphi - (A(1, 0) + A(0, 1)) * dphi;
  return B;
}

Pushforward pushforward_coefficients(const BoundaryChart& c, const CoefficientField& A) {
  if (A.dim() != 2) fail(ErrorKind::InvalidInput, "flattening works in two dimensions");
  const int cells = A.cell_count();
  std::vector<Matrix> vals;
  vals.reserve(std::size_t(cells) * A.slabs());
  const double nu_t = A.nu() * (1.0 - c.delta()) * (1.0 - c.delta());
  double b_norm = 0.0, formula_gap = 0.0, cert = std::numeric_limits<double>::infinity();
  bool symmetric_in = true, symmetric_out = true;
  constexpr int kDirections = 16;
  for (int k = 0; k < A.slabs(); ++k) {
    const double t = A.slab_hi(k);
    for (int cell = 0; cell < cells; ++cell) {
      const Box b = A.cell_box(cell);
      const Point y{0.5 * (b.lo[0] + b.hi[0]), 0.5 * (b.lo[1] + b.hi[1])};
      const Point x = phi_inverse(c, y);
      const Matrix& Ax = A.value(x, t);
      const Matrix J = phi_jacobian(c, x);
      Matrix At = J * Ax * J.transpose();
      const Matrix B = At - Ax;
      b_norm = std::max(b_norm, B.cwiseAbs().maxCoeff());
      formula_gap = std::max(formula_gap, (B - flattening_B(Ax, c.dphi(x[0]))).cwiseAbs().maxCoeff());
      symmetric_in = symmetric_in && Ax.isApprox(Ax.transpose(), 0.0);
      symmetric_out = symmetric_out && (At - At.transpose()).cwiseAbs().maxCoeff() <= 1e-15;
      for (int d = 0; d < kDirections; ++d) {
        const double th = 2.0 * kPi * d / kDirections;
        Eigen::Vector2d xi(std::cos(th), std::sin(th));
        cert = std::min(cert, xi.dot(At * xi) / nu_t);
      }
      vals.push_back(std::move(At));
    }
  }
  if (!(cert >= 1.0 - 1e-12))
    fail(ErrorKind::EllipticityViolation, "flattened coefficients fail the nu (1 - delta)^2 certificate");
  CoefficientField At = CoefficientField::from_values(A.domain(), A.shape(), A.T(), A.slabs(),
                                                      std::move(vals), nu_t);
  At.validate();

  const double budget = 3.0 / A.nu();
  AuditReport rep;
  rep.name = "pushforward_coefficients";
  rep.anchor = "flattened coefficient decomposition A~ = A + B";
  rep.values["delta"] = c.delta();
  rep.values["B_norm"] = b_norm;
  rep.values["B_formula_gap"] = formula_gap;
  rep.values["certificate_min"] = cert;
  rep.values["nu_tilde"] = nu_t;
  const double n_emp = c.delta() > 0.0 ? b_norm / c.delta() : 0.0;
  rep.values["N_emp"] = n_emp;
  rep.add_row({"||B||_inf <= N delta", b_norm, c.delta(), n_emp, budget, n_emp <= budget});
  rep.add_row({"<A~ xi, xi> >= nu (1-delta)^2 |xi|^2", cert, 1.0, cert, 1.0, true});
  if (symmetric_in) rep.add_row({"A symmetric gives A~ symmetric", 0.0, 0.0, 0.0, 0.0, symmetric_out});
  return {std::move(At), b_norm, std::move(rep)};
}

Weight pushforward_weight(const BoundaryChart& c, const Weight& beta, std::vector<int> shape) {
  if (beta.dim() != 2) fail(ErrorKind::InvalidInput, "flattening works in two dimensions");
  if (shape.size() != 2 || shape[0] < 1 || shape[1] < 1)
    fail(ErrorKind::InvalidInput, "weight grid shape must have two positive entries");
  const Box& dom = beta.domain();
  const double hx = (dom.hi[0] - dom.lo[0]) / shape[0], hy = (dom.hi[1] - dom.lo[1]) / shape[1];
  static const double g[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
  static const double w[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  return Weight::sample(dom, shape, [&](const Point& y) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        s += w[i] * w[j] * beta.value(phi_inverse(c, {y[0] + 0.5 * hx * g[i], y[1] + 0.5 * hy * g[j]}));
    return s / 4.0;
  });
}

AuditReport pushforward_weight_audit(const BoundaryChart& c, const Weight& beta,
                                     const WeightContext& ctx, const BallFamily& fam,
                                     std::vector<int> shape) {
  const AuditReport pre = check_beta_condition(beta, ctx, fam);
  if (!pre.pass) fail(ErrorKind::PreconditionFailed, "beta fails the inverse A_{1+2/n0} condition at M0");
  const int n = beta.dim(), n0 = ctx.n0();
  const double q = 1.0 + 2.0 / n0;
  const Box& dom = beta.domain();
  const double cell = std::max((dom.hi[0] - dom.lo[0]) / shape.at(0), (dom.hi[1] - dom.lo[1]) / shape.at(1));
  const Weight bt = pushforward_weight(c, beta, shape);
  const double est_t = aq_characteristic(bt.pow(-1.0), q, fam);
  const double est_b = aq_characteristic(beta.pow(-1.0), q, fam);
  const double budget = std::ldexp(ctx.M0, n + 2);

  AuditReport rep;
  rep.name = "pushforward_weight";
  rep.anchor = "flattened weight condition and oscillation";
  rep.values["delta"] = c.delta();
  rep.values["est_inverse_A_beta"] = est_b;
  rep.values["est_inverse_A_beta_tilde"] = est_t;
  rep.values["inflation"] = est_b > 0.0 ? est_t / est_b : 0.0;
  rep.values["budget"] = budget;
  rep.add_row({"[beta~^-1]_{A_{1+2/n0}} <= 2^{n+2} M0", est_t, budget, est_t, budget, est_t <= budget});

  // Per ball: Theta(beta~; B_r(y0)) <= N0 beta(B_2r(x0)) / beta(B_{r/2}(x0)) Theta(beta; B_2r(x0)),
  // x0 = Phi^-1(y0), N0 = 2 + 2 [beta~]_{A_2}.
  const double a2 = aq_characteristic(bt, 2.0, fam);
  const double N0 = 2.0 + 2.0 * a2;
  double sup_t = 0.0, sup_b = 0.0, worst = 0.0;
  bool ok = true;
  int skipped = 0;
  for_each_ball(fam, [&](const Point& y0, double r) {
    // Below two cells the sampled weight shows its own jumps, not the oscillation of beta.
    if (r < 2.0 * cell) {
      ++skipped;
      return;
    }
    const double tt = theta_beta_ms(bt, y0, r);
    const Point x0 = phi_inverse(c, y0);
    const double tb = theta_beta_ms(beta, x0, 2.0 * r);
    const double dbl = beta.ball_mass(x0, 2.0 * r).integral / beta.ball_mass(x0, 0.5 * r).integral;
    sup_t = std::max(sup_t, tt);
    sup_b = std::max(sup_b, tb);
    const double bound = N0 * dbl * tb;
    if (tt > bound * (1.0 + 1e-9) + 1e-14) ok = false;
    if (bound > 0.0) worst = std::max(worst, tt / bound);
  });
  rep.values["theta_beta_tilde_sup"] = sup_t;
  rep.values["theta_beta_sup"] = sup_b;
  rep.values["N0"] = N0;
  rep.values["worst_fraction_of_bound"] = worst;
  rep.values["balls_below_resolution"] = skipped;
  rep.add_row({"Theta_beta~ <= N0 doubling Theta_beta on the doubled ball", sup_t, sup_b,
               sup_b > 0.0 ? sup_t / sup_b : 0.0, N0, ok});
  return rep;
}

AuditReport flattening_delta_sweep(const BoundaryChart& shape, const CoefficientField& A,
                                   const BallFamily& fam, const DeltaSweepOptions& opt) {
  if (opt.deltas.size() < 2) fail(ErrorKind::InvalidInput, "delta sweep needs at least two values");
  AuditReport rep;
  rep.name = "flattening_delta_sweep";
  rep.anchor = "delta dependence of the flattened coefficients and weight";
  Table t{{"delta", "B_norm", "theta_beta_tilde", "theta_beta"}, {}};
  std::vector<double> ld, lb, lo;
  for (double d : opt.deltas) {
    const BoundaryChart c = shape.with_delta(d);
    const double bn = pushforward_coefficients(c, A).B_norm;
    const Weight beta = Weight::power(A.domain(), opt.weight_center, opt.alpha_per_delta * d);
    const Weight bt = pushforward_weight(c, beta, opt.shape);
    const double ot = sup_theta_beta(bt, fam), ob = sup_theta_beta(beta, fam);
    t.rows.push_back({d, bn, ot, ob});
    ld.push_back(std::log(d));
    lb.push_back(std::log(bn));
    lo.push_back(std::log(ot));
  }
  rep.tables["delta_sweep"] = t;
  const double eb = fit_slope(ld, lb), eo = fit_slope(ld, lo);
  rep.values["B_exponent"] = eb;
  rep.values["oscillation_exponent"] = eo;
  rep.add_row({"||B|| ~ delta^e, e >= " + std::to_string(opt.B_exponent_min), eb, opt.B_exponent_min,
               eb, opt.B_exponent_min, std::isfinite(eb) && eb >= opt.B_exponent_min});
  rep.add_row({"Theta_beta~ ~ delta^e, e >= " + std::to_string(opt.oscillation_exponent_min), eo,
               opt.oscillation_exponent_min, eo, opt.oscillation_exponent_min,
               std::isfinite(eo) && eo >= opt.oscillation_exponent_min});
  return rep;
}

}  // namespace wparab
