#include "wparab/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "wparab/error.hpp"

namespace wparab {

namespace {

double overlap(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

double cell_center_x(const Grid1D& g, int i) { return 0.5 * (g.x(i) + g.x(i + 1)); }
double cell_center_t(const Grid1D& g, int k) { return 0.5 * (g.t(k) + g.t(k + 1)); }

}  // namespace

std::vector<double> default_maximal_radii(const Grid1D& g, int count) {
  if (count < 1) fail(ErrorKind::InvalidInput, "need at least one radius");
  const double r0 = 0.5 * g.hx(), r1 = g.b - g.a;
  std::vector<double> r(count);
  for (int k = 0; k < count; ++k)
    r[k] = count == 1 ? r0 : r0 * std::pow(r1 / r0, double(k) / (count - 1));
  return r;
}

MaximalOperator::MaximalOperator(const SpaceTimeField& g, const Weight& beta,
                                 std::vector<double> radii)
    : grid_(g.grid()), beta_(beta), radii_(std::move(radii)), integ_(g.abs()) {
  if (beta.dim() != 1) fail(ErrorKind::InvalidInput, "maximal function is one-dimensional");
  if (radii_.empty()) fail(ErrorKind::InvalidInput, "radius grid is empty");
  for (double r : radii_)
    if (!(r > 0.0)) fail(ErrorKind::InvalidInput, "radii must be positive");
  heights_.resize(grid_.nx);
  for (int i = 0; i < grid_.nx; ++i) {
    heights_[i].resize(radii_.size());
    for (std::size_t j = 0; j < radii_.size(); ++j)
      heights_[i][j] = height(beta_, {cell_center_x(grid_, i)}, radii_[j]);
  }
}

double MaximalOperator::clipped_measure(double x, double t, double rho, double h) const {
  return overlap(x - rho, x + rho, grid_.a, grid_.b) *
         overlap(t - 0.5 * h, t + 0.5 * h, grid_.t0, grid_.t1);
}

double MaximalOperator::average(double x, double t, double rho, double h) const {
  const double m = clipped_measure(x, t, rho, h);
  if (!(m > 0.0)) return 0.0;
  return integ_.integral(x - rho, x + rho, t - 0.5 * h, t + 0.5 * h) / m;
}

double MaximalOperator::at(const SpaceTimePoint& z) const {
  if (z.x.size() != 1) fail(ErrorKind::InvalidInput, "point dimension mismatch");
  double best = 0.0;
  for (double r : radii_) best = std::max(best, average(z.x[0], z.t, r, height(beta_, z.x, r)));
  return best;
}

SpaceTimeField MaximalOperator::on_cells() const {
  SpaceTimeField M(grid_);
  for (int k = 0; k < grid_.nt; ++k) {
    const double t = cell_center_t(grid_, k);
    for (int i = 0; i < grid_.nx; ++i) {
      const double x = cell_center_x(grid_, i);
      double best = 0.0;
      for (std::size_t j = 0; j < radii_.size(); ++j)
        best = std::max(best, average(x, t, radii_[j], heights_[i][j]));
      M.at(i, k) = best;
    }
  }
  return M;
}

double MaximalOperator::dilation_constant() const {
  double worst = 1.0;
  for (int i = 0; i < grid_.nx; ++i) {
    const double x = cell_center_x(grid_, i);
    for (std::size_t j = 0; j < radii_.size(); ++j) {
      const double h5 = height(beta_, {x}, 5.0 * radii_[j]);
      for (int k = 0; k < grid_.nt; ++k) {
        const double t = cell_center_t(grid_, k);
        const double m1 = clipped_measure(x, t, radii_[j], heights_[i][j]);
        if (m1 > 0.0) worst = std::max(worst, clipped_measure(x, t, 5.0 * radii_[j], h5) / m1);
      }
    }
  }
  return worst;
}

double maximal_function(const SpaceTimeField& g, const Weight& beta, const SpaceTimePoint& z,
                        const std::vector<double>& radii) {
  return MaximalOperator(g, beta, radii).at(z);
}

double level_set_measure(const SpaceTimeField& M, double s) {
  std::size_t count = 0;
  for (double v : M.values())
    if (v > s) ++count;
  return count * M.grid().hx() * M.grid().tau();
}

AuditReport weak_1_1_audit(const SpaceTimeField& g, const Weight& beta,
                           const std::vector<double>& lambdas, const std::vector<double>& radii) {
  const MaximalOperator op(g, beta, radii);
  const SpaceTimeField M = op.on_cells();
  const double l1 = g.abs().integral();
  const double Nw = op.dilation_constant();
  AuditReport rep;
  rep.name = "weak_1_1";
  rep.anchor = "weak (1,1) estimate for the weighted-cylinder maximal function";
  rep.values["N_w"] = Nw;
  rep.values["L1"] = l1;
  Table t;
  t.columns = {"lambda", "measure", "lambda_times_measure"};
  double worst = 0.0, prev = INFINITY;
  bool monotone = true;
  std::vector<double> ls = lambdas;
  std::sort(ls.begin(), ls.end());
  for (double lam : ls) {
    if (!(lam > 0.0)) fail(ErrorKind::InvalidInput, "lambdas must be positive");
    const double m = level_set_measure(M, lam);
    monotone = monotone && m <= prev;
    prev = m;
    t.rows.push_back({lam, m, lam * m});
    const double N = l1 > 0.0 ? lam * m / l1 : (m > 0.0 ? INFINITY : 0.0);
    worst = std::max(worst, N);
    std::ostringstream label;
    label.precision(17);
    label << "lambda |{M g > lambda}| <= N_w ||g||_1 at lambda=" << lam;
    rep.add_row({label.str(), lam * m, l1, N, Nw, N <= Nw});
  }
  rep.values["N_emp"] = worst;
  rep.tables["levels"] = t;
  rep.add_row({"|{M g > lambda}| non-increasing in lambda", monotone ? 0.0 : 1.0, 0.0, 0.0, 0.0,
               monotone});
  return rep;
}

CenteredCylinder centered_cylinder(const Weight& beta, const SpaceTimePoint& z, double rho) {
  return {z, rho, height(beta, z.x, rho)};
}

bool disjoint(const CenteredCylinder& a, const CenteredCylinder& b) {
  return std::abs(a.z.x[0] - b.z.x[0]) >= a.rho + b.rho ||
         std::abs(a.z.t - b.z.t) >= 0.5 * (a.h + b.h);
}

std::vector<int> CoveringFamily::selected_indices() const {
  std::vector<int> s;
  for (std::size_t i = 0; i < selected.size(); ++i)
    if (selected[i]) s.push_back(static_cast<int>(i));
  return s;
}

CoveringFamily vitali_select(const std::vector<CenteredCylinder>& family) {
  CoveringFamily out;
  out.cylinders = family;
  out.selected.assign(family.size(), false);
  out.witness.assign(family.size(), -1);
  for (const auto& c : family)
    if (!(c.rho > 0.0) || !(c.h > 0.0)) fail(ErrorKind::InvalidInput, "cylinders need positive size");
  std::vector<int> order(family.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return family[a].rho > family[b].rho; });
  std::vector<int> chosen;
  for (int idx : order) {
    int hit = -1;
    for (int s : chosen)
      if (!disjoint(family[idx], family[s])) {
        hit = s;
        break;
      }
    if (hit < 0) {
      out.selected[idx] = true;
      out.witness[idx] = idx;
      chosen.push_back(idx);
    } else {
      out.witness[idx] = hit;
    }
  }
  return out;
}

AuditReport verify_covering(const CoveringFamily& fam, const Weight& beta, int m) {
  if (m < 1) fail(ErrorKind::InvalidInput, "samples per axis must be >= 1");
  const auto sel = fam.selected_indices();
  AuditReport rep;
  rep.name = "vitali";
  rep.anchor = "Vitali covering by 5-fold dilated weighted cylinders";
  rep.notes["union"] =
      "covers the finite family only; the union over an uncountable family is not sampled";
  std::size_t overlaps = 0;
  for (std::size_t a = 0; a < sel.size(); ++a)
    for (std::size_t b = a + 1; b < sel.size(); ++b)
      if (!disjoint(fam.cylinders[sel[a]], fam.cylinders[sel[b]])) ++overlaps;
  std::size_t bad_witness = 0;
  for (std::size_t i = 0; i < fam.cylinders.size(); ++i) {
    const int w = fam.witness[i];
    if (w < 0 || !fam.selected[w] || fam.cylinders[w].rho < fam.cylinders[i].rho ||
        (static_cast<int>(i) != w && disjoint(fam.cylinders[i], fam.cylinders[w])))
      ++bad_witness;
  }
  std::vector<CenteredCylinder> dil;
  for (int s : sel) dil.push_back(centered_cylinder(beta, fam.cylinders[s].z, 5.0 * fam.cylinders[s].rho));
  std::size_t uncovered = 0, checked = 0;
  for (const auto& c : fam.cylinders)
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        const double x = c.z.x[0] - c.rho + 2.0 * c.rho * (a + 0.5) / m;
        const double t = c.z.t - 0.5 * c.h + c.h * (b + 0.5) / m;
        bool in = false;
        for (const auto& d : dil)
          if (std::abs(x - d.z.x[0]) <= d.rho && std::abs(t - d.z.t) <= 0.5 * d.h) {
            in = true;
            break;
          }
        ++checked;
        if (!in) ++uncovered;
      }
  rep.values["family"] = static_cast<double>(fam.cylinders.size());
  rep.values["selected"] = static_cast<double>(sel.size());
  rep.values["samples"] = static_cast<double>(checked);
  rep.add_row({"selected cylinders pairwise disjoint", double(overlaps), 0.0, 0.0, 0.0, overlaps == 0});
  rep.add_row({"every member meets a selected cylinder of radius >= its own", double(bad_witness),
               0.0, 0.0, 0.0, bad_witness == 0});
  rep.add_row({"5 rho dilations cover the sampled family", double(uncovered), 0.0, 0.0, 0.0,
               uncovered == 0});
  return rep;
}

AuditReport levelset_decay_audit(const SolutionField& u, const SpaceTimeField& F,
                                 const Weight& beta, const LevelsetOptions& opt) {
  if (!(opt.K > 1.0)) fail(ErrorKind::InvalidInput, "K must exceed 1");
  if (!(opt.q0 > 0.0 && opt.q0 < 1.0)) fail(ErrorKind::InvalidInput, "q0 must lie in (0,1)");
  if (opt.m_max < 1) fail(ErrorKind::InvalidInput, "m_max must be >= 1");
  if (!(opt.delta_hat > 0.0)) fail(ErrorKind::InvalidInput, "delta_hat must be positive");
  const Grid1D& g = u.grid();
  const std::vector<double> radii = opt.radii.empty() ? default_maximal_radii(g) : opt.radii;

  SpaceTimeField G = u.gradient().squared();
  SpaceTimeField F2 = F.squared();
  const double Q = (g.b - g.a) * (g.t1 - g.t0);
  const double avg = G.integral() / Q;

  AuditReport rep;
  rep.name = "levelset_decay";
  rep.anchor = "measure decay of maximal-function level sets of |grad u|^2";
  rep.values["K"] = opt.K;
  rep.values["q0"] = opt.q0;
  rep.values["delta_hat"] = opt.delta_hat;
  rep.values["avg_grad_sq"] = avg;

  const MaximalOperator opG(G, beta, radii);
  const SpaceTimeField MG_raw = opG.on_cells();
  const double Nw = opG.dilation_constant();
  rep.values["N_w"] = Nw;

  double scale = 1.0;
  if (opt.normalize && avg > 0.0) {
    const double N0 = std::sqrt(Nw * avg / (opt.K * opt.q0));
    scale = N0 * N0;
    // Smallest lambda with |{M g / lambda^2 > K}| <= q0 |Q|.
    std::vector<double> v = MG_raw.values();
    std::sort(v.begin(), v.end(), std::greater<double>());
    const std::size_t allowed =
        static_cast<std::size_t>(std::floor(opt.q0 * Q / (g.hx() * g.tau()) + 1e-9));
    const double s_star = allowed < v.size() ? v[allowed] : 0.0;
    const double lambda_min = std::sqrt(s_star / opt.K);
    rep.values["N0"] = N0;
    rep.values["lambda_min"] = lambda_min;
    rep.add_row({"normalization N0 = (N_w avg |grad u|^2 / (K q0))^{1/2} reaches the density level",
                 lambda_min, N0, N0 > 0.0 ? lambda_min / N0 : 0.0, 1.0, lambda_min <= N0});
  }
  rep.values["normalization"] = scale;

  const SpaceTimeField MG = MG_raw.scaled(1.0 / scale);
  const SpaceTimeField MF = MaximalOperator(F2, beta, radii).on_cells().scaled(1.0 / scale);

  const double S = level_set_measure(MG, opt.K);
  rep.values["density_measure"] = S;
  rep.values["density_bound"] = opt.q0 * Q;
  const bool pre = S <= opt.q0 * Q;
  rep.values["precondition_pass"] = pre ? 1.0 : 0.0;
  if (!pre)
    rep.notes["precondition"] = std::string(to_string(ErrorKind::PreconditionFailed)) +
                                ": |{M |grad u|^2 > K}| exceeds q0 |Q|";

  const int mm = opt.m_max;
  const double H1 = level_set_measure(MG, 1.0);
  std::vector<double> lhs(mm + 1), f(mm);
  for (int m = 1; m <= mm; ++m) lhs[m] = level_set_measure(MG, std::pow(opt.K, m));
  for (int j = 0; j < mm; ++j)
    f[j] = level_set_measure(MF, std::pow(opt.K, j) * opt.delta_hat * opt.delta_hat);
  auto rhs = [&](int m, double l0) {
    double s = std::pow(l0, m) * H1;
    for (int i = 1; i <= m; ++i) s += std::pow(l0, i) * f[m - i];
    return s;
  };
  std::vector<double> fit(mm + 1, 0.0);
  double gamma1 = 0.0;
  bool finite = true;
  for (int m = 1; m <= mm; ++m) {
    if (lhs[m] <= 0.0) continue;
    double hi = 1.0;
    int guard = 0;
    while (rhs(m, hi) < lhs[m] && guard++ < 200) hi *= 2.0;
    if (rhs(m, hi) < lhs[m]) {
      finite = false;
      fit[m] = INFINITY;
      continue;
    }
    double lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (rhs(m, mid) >= lhs[m] ? hi : lo) = mid;
    }
    fit[m] = hi / opt.q0;
  }
  for (int m = 1; m <= mm; ++m) gamma1 = std::max(gamma1, fit[m]);
  Table t;
  t.columns = {"m", "lhs", "rhs", "gamma1_fit"};
  bool holds = true, monotone = true;
  for (int m = 1; m <= mm; ++m) {
    const double r = rhs(m, gamma1 * opt.q0);
    holds = holds && lhs[m] <= r * (1.0 + 1e-12);
    if (m > 1) monotone = monotone && lhs[m] <= lhs[m - 1];
    t.rows.push_back({double(m), lhs[m], r, fit[m]});
  }
  rep.tables["decay"] = t;
  rep.values["gamma1"] = gamma1;
  rep.values["l0"] = gamma1 * opt.q0;
  rep.values["level_one_measure"] = H1;
  rep.add_row({"decay recursion holds for every m with the fitted gamma1", gamma1, 0.0, gamma1, 0.0,
               finite && holds});
  rep.add_row({"level-set measures non-increasing in m", monotone ? 0.0 : 1.0, 0.0, 0.0, 0.0,
               monotone});
  return rep;
}

}  // namespace wparab
