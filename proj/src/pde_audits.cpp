#include <algorithm>
#include <cmath>

#include <boost/math/constants/constants.hpp>

#include "wparab/error.hpp"
#include "wparab/oscillation.hpp"
#include "wparab/solver.hpp"

namespace wparab {

namespace {

double overlap(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

// Overlap lengths of a space-time rectangle with the cells and slabs of a grid.
struct Window {
  std::vector<double> wx, wt;
  double xl = 0, xh = 0, tl = 0, th = 0;
  double measure() const {
    double a = 0, b = 0;
    for (double w : wx) a += w;
    for (double w : wt) b += w;
    return a * b;
  }
  template <class F>
  double sum(F&& f) const {
    double s = 0.0;
    for (std::size_t k = 0; k < wt.size(); ++k) {
      if (wt[k] <= 0.0) continue;
      double row = 0.0;
      for (std::size_t i = 0; i < wx.size(); ++i)
        if (wx[i] > 0.0) row += wx[i] * f(static_cast<int>(i), static_cast<int>(k));
      s += wt[k] * row;
    }
    return s;
  }
};

Window window(const Grid1D& g, double xl, double xh, double tl, double th) {
  Window w;
  w.xl = std::max(xl, g.a);
  w.xh = std::min(xh, g.b);
  w.tl = std::max(tl, g.t0);
  w.th = std::min(th, g.t1);
  w.wx.resize(g.nx);
  w.wt.resize(g.nt);
  for (int i = 0; i < g.nx; ++i) w.wx[i] = overlap(g.x(i), g.x(i + 1), w.xl, w.xh);
  for (int k = 0; k < g.nt; ++k) w.wt[k] = overlap(g.t(k), g.t(k + 1), w.tl, w.th);
  return w;
}

Window cylinder_window(const Grid1D& g, const Weight& beta, const SpaceTimePoint& z0, double r,
                       double x_left) {
  const double h = height(beta, z0.x, r);
  return window(g, std::max(x_left, z0.x[0] - r), z0.x[0] + r, z0.t - h, z0.t);
}

// Levels whose times lie in [tl, th]; falls back to the level nearest th.
std::vector<int> levels_in(const Grid1D& g, double tl, double th) {
  std::vector<int> ks;
  for (int k = 0; k <= g.nt; ++k)
    if (g.t(k) >= tl - 1e-12 * g.tau() && g.t(k) <= th + 1e-12 * g.tau()) ks.push_back(k);
  if (ks.empty())
    ks.push_back(std::clamp(static_cast<int>(std::lround((th - g.t0) / g.tau())), 0, g.nt));
  return ks;
}

double ratio_or_zero(double lhs, double rhs) {
  if (rhs > 0.0) return lhs / rhs;
  return lhs > 0.0 ? INFINITY : 0.0;
}

double face_a(const CoefficientField& A, const Grid1D& g, int i, int k) {
  return A.value({0.5 * (g.x(i) + g.x(i + 1))}, g.t(k + 1))(0, 0);
}

void put_cylinder(AuditReport& rep, const SpaceTimePoint& z0, double r) {
  rep.values["x0"] = z0.x[0];
  rep.values["t0"] = z0.t;
  rep.values["r"] = r;
}

}  // namespace

std::map<std::string, double> NormReport::as_values() const {
  return {{"p", p},
          {"u_lp", u_lp},
          {"grad_lp", grad_lp},
          {"proxy_lp", proxy_lp},
          {"forcing_lp", forcing_lp},
          {"u_l2_beta", u_l2_beta},
          {"sup_energy", sup_energy}};
}

NormReport compute_norms(const SolutionField& u, const CoefficientField& A, const SpaceTimeField& F,
                         double p) {
  if (!(p >= 1.0)) fail(ErrorKind::InvalidInput, "p must be >= 1");
  const Grid1D& g = u.grid();
  const double h = g.hx(), tau = g.tau();
  const auto& bn = u.beta_nodes();
  NormReport n;
  n.p = p;
  double su = 0, sg = 0, sp = 0, sf = 0, sb = 0;
  for (int k = 0; k <= g.nt; ++k) {
    double e = 0.0;
    for (int i = 0; i <= g.nx; ++i) {
      const double w = (i == 0 || i == g.nx) ? 0.5 : 1.0;
      const double v = u.at(i, k);
      e += w * (bn.empty() ? 1.0 : bn[i]) * v * v * h;
      if (k > 0) su += w * std::pow(std::abs(v), p) * h * tau;
    }
    if (k > 0) sb += e * tau;
    n.sup_energy = std::max(n.sup_energy, e);
  }
  for (int k = 0; k < g.nt; ++k)
    for (int i = 0; i < g.nx; ++i) {
      const double du = u.grad(i, k), f = F.at(i, k);
      sg += std::pow(std::abs(du), p);
      sp += std::pow(std::abs(face_a(A, g, i, k) * du + f), p);
      sf += std::pow(std::abs(f), p);
    }
  n.u_lp = std::pow(su, 1.0 / p);
  n.grad_lp = std::pow(sg * h * tau, 1.0 / p);
  n.proxy_lp = std::pow(sp * h * tau, 1.0 / p);
  n.forcing_lp = std::pow(sf * h * tau, 1.0 / p);
  n.u_l2_beta = std::sqrt(sb);
  return n;
}

AuditReport energy_audit(const SolutionField& u, const SpaceTimeField& F, const Weight& beta,
                         const SpaceTimePoint& z0, double r, double budget, double basic_budget) {
  const Grid1D& g = u.grid();
  const double lo = g.a - 1.0;
  const Window in = cylinder_window(g, beta, z0, 1.5 * r, lo);
  const Window out = cylinder_window(g, beta, z0, 2.0 * r, lo);

  std::vector<double> mass_in(g.nx), mass_out(g.nx);
  for (int i = 0; i < g.nx; ++i) {
    if (in.wx[i] > 0.0)
      mass_in[i] = beta.box_mass({std::max(g.x(i), in.xl)}, {std::min(g.x(i + 1), in.xh)}).integral;
    if (out.wx[i] > 0.0)
      mass_out[i] =
          beta.box_mass({std::max(g.x(i), out.xl)}, {std::min(g.x(i + 1), out.xh)}).integral;
  }
  double sup_e = 0.0;
  for (int k : levels_in(g, in.tl, in.th)) {
    double e = 0.0;
    for (int i = 0; i < g.nx; ++i) e += mass_in[i] * u.cell_sq(i, k);
    sup_e = std::max(sup_e, e);
  }
  const double grad_in = in.sum([&](int i, int k) { return u.grad(i, k) * u.grad(i, k); });
  const double lhs = sup_e + grad_in;
  const double u2 = out.sum([&](int i, int k) { return u.cell_sq(i, k + 1); });
  const double f2 = out.sum([&](int i, int k) { return F.at(i, k) * F.at(i, k); });
  const double rhs = u2 + f2;

  double u2beta = 0.0;
  for (int k = 0; k < g.nt; ++k) {
    if (out.wt[k] <= 0.0) continue;
    double row = 0.0;
    for (int i = 0; i < g.nx; ++i) row += mass_out[i] * u.cell_sq(i, k + 1);
    u2beta += out.wt[k] * row;
  }
  const double psi2 = psi(beta, z0.x, 2.0 * r);
  const double rhs_basic = u2 * (1.0 + 1.0 / (r * r)) + u2beta / (r * r * psi2) + f2;

  AuditReport rep;
  rep.name = "energy";
  rep.anchor = "improved Caccioppoli estimate on Q_{3r/2} against Q_{2r}";
  put_cylinder(rep, z0, r);
  const double N = ratio_or_zero(lhs, rhs), Nb = ratio_or_zero(lhs, rhs_basic);
  rep.values["N_emp"] = N;
  rep.values["N_basic_emp"] = Nb;
  rep.values["sup_energy"] = sup_e;
  rep.values["gradient_energy"] = grad_in;
  rep.values["psi_2r"] = psi2;
  rep.add_row({"sup int u^2 beta + int |grad u|^2 <= N int (u^2 + |F|^2)", lhs, rhs, N, budget,
               N <= budget});
  rep.add_row({"Caccioppoli with weights 1 + 1/r^2 + beta/(r^2 Psi(2r))", lhs, rhs_basic, Nb,
               basic_budget, Nb <= basic_budget});
  return rep;
}

AuditReport poincare_audit(const SolutionField& u, const SpaceTimeField& F, const Weight& beta,
                           const SpaceTimePoint& z0, double r, PoincareVariant variant,
                           double budget) {
  const Grid1D& g = u.grid();
  const bool boundary = variant == PoincareVariant::Boundary;
  const Window Q = cylinder_window(g, beta, z0, r, boundary ? z0.x[0] : g.a - 1.0);
  const double theta = theta_beta_ms(beta, z0.x, r);
  AuditReport rep;
  rep.name = boundary ? "poincare_boundary" : "poincare_interior";
  rep.anchor = boundary ? "weighted parabolic Poincare inequality with zero trace on the flat part"
                        : "weighted parabolic Poincare inequality with the mean oscillation of beta";
  put_cylinder(rep, z0, r);
  rep.values["theta_beta"] = theta;
  rep.values["budget"] = budget;
  if (budget * theta >= 1.0)
    fail(ErrorKind::GateFailed, "poincare gate: N_budget * Theta_beta = " +
                                    std::to_string(budget * theta) + " >= 1");

  const double measure = Q.measure();
  if (!(measure > 0.0)) fail(ErrorKind::EmptyRegion, "cylinder misses the grid");
  double mean = 0.0;
  if (!boundary) mean = Q.sum([&](int i, int k) { return u.cell_mean(i, k + 1); }) / measure;
  const double lhs = Q.sum([&](int i, int k) {
    return u.cell_sq(i, k + 1) - 2.0 * mean * u.cell_mean(i, k + 1) + mean * mean;
  });
  const double grad = Q.sum([&](int i, int k) { return u.grad(i, k) * u.grad(i, k); });
  const double f2 = Q.sum([&](int i, int k) { return F.at(i, k) * F.at(i, k); });
  const double A = r * r * (grad + f2);
  const double lhs_clamped = std::max(0.0, lhs);
  const double N = ratio_or_zero(lhs_clamped, A + theta * lhs_clamped);
  rep.values["N_emp"] = N;
  rep.values["classical_ratio"] = ratio_or_zero(lhs_clamped, r * r * grad);
  rep.values["mean"] = mean;
  rep.add_row({"int |u - (u)_Q|^2 <= N r^2 int (|grad u|^2 + |F|^2) + N Theta int |u - (u)_Q|^2",
               lhs_clamped, A + theta * lhs_clamped, N, budget, N <= budget});
  const double moved_lhs = lhs_clamped * (1.0 - budget * theta);
  rep.add_row({"(1 - N Theta) int |u - (u)_Q|^2 <= N r^2 int (|grad u|^2 + |F|^2)", moved_lhs,
               budget * A, ratio_or_zero(moved_lhs, A), budget,
               moved_lhs <= budget * A * (1.0 + 1e-12)});
  return rep;
}

AuditReport lipschitz_audit(const SolutionField& v, double beta_bar, const Weight& beta,
                            const SpaceTimePoint& z0, double r, double budget) {
  const Grid1D& g = v.grid();
  const double h = height(beta, z0.x, r);
  const Window inner = window(g, z0.x[0] - r, z0.x[0] + r, z0.t - h, z0.t);
  const Window outer = cylinder_window(g, beta, z0, 2.0 * r, g.a - 1.0);

  double vt = 0.0, grad = 0.0;
  for (int k : levels_in(g, inner.tl, inner.th)) {
    if (k == 0) continue;
    for (int i = 0; i <= g.nx; ++i)
      if (g.x(i) >= inner.xl && g.x(i) <= inner.xh)
        vt = std::max(vt, std::abs(v.at(i, k) - v.at(i, k - 1)) / g.tau());
  }
  for (int k = 0; k < g.nt; ++k) {
    if (inner.wt[k] <= 0.0) continue;
    for (int i = 0; i < g.nx; ++i)
      if (inner.wx[i] > 0.0) grad = std::max(grad, std::abs(v.grad(i, k)));
  }
  const double om = outer.measure();
  if (!(om > 0.0)) fail(ErrorKind::EmptyRegion, "outer cylinder misses the grid");
  const double rhs =
      std::sqrt(outer.sum([&](int i, int k) { return v.grad(i, k) * v.grad(i, k); }) / om);
  const double lhs = r * beta_bar * vt + grad;
  const double N = ratio_or_zero(lhs, rhs);
  AuditReport rep;
  rep.name = "lipschitz";
  rep.anchor = "interior Lipschitz estimate for the frozen-coefficient equation";
  put_cylinder(rep, z0, r);
  rep.values["beta_bar"] = beta_bar;
  rep.values["sup_vt"] = vt;
  rep.values["sup_grad"] = grad;
  rep.values["N_emp"] = N;
  rep.add_row({"r (beta)_B ||v_t||_inf + ||grad v||_inf <= N (avg_{Q_2r} |grad v|^2)^{1/2}", lhs,
               rhs, N, budget, N <= budget});
  return rep;
}

AuditReport freeze_compare(const SolutionField& u, const Weight& beta, const CoefficientField& A,
                           const SpaceTimeField& F, const SpaceTimePoint& z0, double R,
                           const FreezeOptions& opt) {
  const Grid1D& g = u.grid();
  const double hR = height(beta, z0.x, R);
  const NodeCylinder c = node_cylinder(g, z0.x[0] - R, z0.x[0] + R, z0.t - hR, z0.t);
  const Window QR = window(g, g.x(c.i0), g.x(c.i1), g.t(c.k0), g.t(c.k1));
  const double hh = height(beta, z0.x, 0.5 * R);
  const Window Qh = window(g, std::max(z0.x[0] - 0.5 * R, g.x(c.i0)),
                           std::min(z0.x[0] + 0.5 * R, g.x(c.i1)),
                           std::max(z0.t - hh, g.t(c.k0)), std::min(z0.t, g.t(c.k1)));

  AuditReport rep;
  rep.name = opt.half ? "freeze_compare_boundary" : "freeze_compare";
  rep.anchor = "L2 gradient comparison with the frozen-coefficient solution";
  put_cylinder(rep, z0, R);
  rep.values["i0"] = c.i0;
  rep.values["i1"] = c.i1;
  rep.values["k0"] = c.k0;
  rep.values["k1"] = c.k1;

  const double mR = QR.measure(), mh = Qh.measure();
  if (!(mR > 0.0) || !(mh > 0.0)) fail(ErrorKind::EmptyRegion, "comparison cylinder is empty");
  const double grad2 = QR.sum([&](int i, int k) { return u.grad(i, k) * u.grad(i, k); }) / mR;
  const double lambda = std::sqrt(grad2);
  rep.values["lambda"] = lambda;
  if (!(lambda > 0.0)) {
    rep.notes["trivial"] = "grad u vanishes on the cylinder";
    rep.values["epsilon"] = 0.0;
    rep.values["delta"] = 0.0;
    rep.add_row({"epsilon_emp <= budget", 0.0, opt.epsilon_budget, 0.0, opt.epsilon_budget, true});
    return rep;
  }
  if (!std::isfinite(lambda)) fail(ErrorKind::PreconditionFailed, "normalization is not finite");

  const FrozenProblem fp =
      frozen_from(u, beta, A, z0, R, c, opt.refine_x, opt.refine_t, opt.half);
  const SolutionField v = solve_frozen(fp);
  const int rx = opt.refine_x, rt = opt.refine_t;
  auto grad_v = [&](int i, int k) {
    const int fi = (i - c.i0) * rx, fk = (k - c.k0 + 1) * rt;
    return (v.at(fi + rx, fk) - v.at(fi, fk)) / g.hx();
  };
  const double gap = Qh.sum([&](int i, int k) {
    const double d = u.grad(i, k) - grad_v(i, k);
    return d * d;
  });
  const double eps = std::sqrt(gap / mh) / lambda;

  const double thA = theta_A_ms(A, beta, z0, R);
  const double thB = theta_beta_ms(beta, z0.x, R);
  const double f2 = QR.sum([&](int i, int k) { return F.at(i, k) * F.at(i, k); }) / mR;
  const double delta = std::sqrt(thA + thB + f2 / (lambda * lambda));
  rep.values["epsilon"] = eps;
  rep.values["delta"] = delta;
  rep.values["theta_A"] = thA;
  rep.values["theta_beta"] = thB;
  rep.values["forcing"] = f2 / (lambda * lambda);
  rep.values["beta_bar"] = fp.beta_bar;
  rep.values["refine_x"] = rx;
  rep.values["refine_t"] = rt;
  rep.add_row({"(avg_{Q_{R/2}} |grad u - grad v|^2)^{1/2} / lambda <= epsilon budget", eps,
               opt.epsilon_budget, eps, opt.epsilon_budget, eps <= opt.epsilon_budget});
  return rep;
}

AuditReport apriori_ratio(const SolutionField& u, const CoefficientField& A,
                          const SpaceTimeField& F, double p, double budget) {
  if (!(p >= 2.0)) fail(ErrorKind::InvalidInput, "apriori_ratio needs p >= 2");
  const NormReport n = compute_norms(u, A, F, p);
  AuditReport rep;
  rep.name = "apriori";
  rep.anchor = "global W^{1,p} estimate with the negative-norm proxy for beta u_t";
  for (const auto& [k, v] : n.as_values()) rep.values[k] = v;
  const double total = n.u_lp + n.grad_lp + n.proxy_lp;
  const double ratio = n.forcing_lp > 0.0 ? total / n.forcing_lp : 0.0;
  rep.values["ratio"] = ratio;
  rep.values["u_ratio"] = n.forcing_lp > 0.0 ? n.u_lp / n.forcing_lp : 0.0;
  rep.add_row({"||u|| + ||grad u|| + ||A grad u + F|| <= N ||F||", total, n.forcing_lp, ratio,
               budget, n.forcing_lp > 0.0 ? ratio <= budget : total == 0.0});

  if (p == 2.0 && n.forcing_lp > 0.0) {
    // Discrete energy identity: E^N/2 + nu ||D u||^2 <= E^0/2 + ||F|| ||D u||.
    const Grid1D& g = u.grid();
    const double nu = A.nu();
    double e0 = 0.0;
    const auto& bn = u.beta_nodes();
    for (int i = 1; i < g.nx; ++i) e0 += (bn.empty() ? 1.0 : bn[i]) * u.at(i, 0) * u.at(i, 0) * g.hx();
    const double Fn = n.forcing_lp;
    const double X = (Fn + std::sqrt(Fn * Fn + 2.0 * nu * e0)) / (2.0 * nu);
    const double L = g.b - g.a;
    const double s = std::sin(boost::math::constants::pi<double>() * g.hx() / (2.0 * L));
    const double lambda1 = 4.0 / (g.hx() * g.hx()) * s * s;
    const double bound = (1.0 + 1.0 / std::sqrt(lambda1) + 1.0 / nu) * X + Fn;
    rep.values["energy_bound_ratio"] = bound / Fn;
    rep.values["discrete_poincare_lambda1"] = lambda1;
    rep.add_row({"ratio <= discrete energy-argument constant", total, bound, total / bound, 1.0,
                 total <= bound * (1.0 + 1e-12)});
  }
  return rep;
}

AuditReport time_shift_audit(const SolutionField& u, const CoefficientField& A,
                             const SpaceTimeField& F, const std::function<double(double)>& phi,
                             int s, double budget) {
  const Grid1D& g = u.grid();
  if (s < 1 || s > g.nt) fail(ErrorKind::InvalidInput, "shift must be between 1 and nt steps");
  const double hx = g.hx(), tau = g.tau(), shift = s * tau;
  const auto& bn = u.beta_nodes();
  std::vector<double> phi2(g.nodes());
  for (int i = 0; i <= g.nx; ++i) {
    const double p = phi(g.x(i));
    phi2[i] = p * p;
  }
  double lhs = 0.0;
  for (int k = 0; k + s <= g.nt; ++k) {
    double row = 0.0;
    for (int i = 1; i < g.nx; ++i) {
      const double d = u.at(i, k + s) - u.at(i, k);
      row += (bn.empty() ? 1.0 : bn[i]) * d * d * phi2[i] * hx;
    }
    lhs += tau * row;
  }
  double proxy2 = 0.0;
  for (int k = 0; k < g.nt; ++k)
    for (int i = 0; i < g.nx; ++i) {
      const double G = face_a(A, g, i, k) * u.grad(i, k) + F.at(i, k);
      proxy2 += G * G * hx * tau;
    }
  double l1 = 0.0, l2sq = 0.0;
  for (int k = 0; k <= g.nt; ++k) {
    double w = 0.0;
    for (int i = 0; i <= g.nx; ++i) {
      const double v = u.at(i, k) * phi2[i];
      w += v * v * hx;
    }
    for (int i = 0; i < g.nx; ++i) {
      const double d = (u.at(i + 1, k) * phi2[i + 1] - u.at(i, k) * phi2[i]) / hx;
      w += d * d * hx;
    }
    l1 += tau * std::sqrt(w);
    if (k > 0) l2sq += tau * w;
  }
  const double proxy = std::sqrt(proxy2);
  const double rhs = 2.0 * std::sqrt(shift) * proxy * l1;
  AuditReport rep;
  rep.name = "time_shift";
  rep.anchor = "time-shift estimate behind the Aubin-Lions compactness step";
  rep.values["h"] = shift;
  rep.values["shift_steps"] = s;
  rep.values["proxy"] = proxy;
  rep.values["uphi2_L1_W12"] = l1;
  rep.values["uphi2_L2_W12_squared"] = l2sq;
  rep.values["stated_form_rhs"] = 2.0 * std::sqrt(shift) * proxy * l2sq;
  const double N = ratio_or_zero(lhs, rhs);
  rep.values["N_emp"] = N;
  rep.add_row({"int ||(u(t+h) - u(t)) phi||^2_{L^2(beta)} <= 2 h^{1/2} proxy ||u phi^2||_{L^1 W^{1,2}}",
               lhs, rhs, N, budget, N <= budget});
  return rep;
}

}  // namespace wparab
