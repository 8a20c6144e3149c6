#include "wparab/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "region2d.hpp"
#include "wparab/error.hpp"

namespace wparab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Integral of |x - c|^s over [a, b] for s > -1.
double power_integral_1d(double c, double s, double a, double b) {
  if (b <= a) return 0.0;
  auto F = [s](double y) {
    double v = std::pow(std::abs(y), s + 1.0) / (s + 1.0);
    return y < 0 ? -v : v;
  };
  return F(b - c) - F(a - c);
}

std::string describe(const Point& x) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

}  // namespace

bool Box::contains(const Point& x) const {
  for (int i = 0; i < dim(); ++i)
    if (x[i] < lo[i] || x[i] > hi[i]) return false;
  return true;
}

double Box::measure() const {
  double m = 1.0;
  for (int i = 0; i < dim(); ++i) m *= hi[i] - lo[i];
  return m;
}

double Box::diameter() const {
  double s = 0.0;
  for (int i = 0; i < dim(); ++i) s += (hi[i] - lo[i]) * (hi[i] - lo[i]);
  return std::sqrt(s);
}

Box interval(double a, double b) { return Box{{a}, {b}}; }
Box rectangle(double x0, double x1, double y0, double y1) { return Box{{x0, y0}, {x1, y1}}; }

Weight Weight::power(Box domain, Point center, double alpha, double scale) {
  if (domain.dim() < 1 || domain.dim() > 2)
    fail(ErrorKind::InvalidInput, "weights support dimension 1 or 2");
  if (static_cast<int>(center.size()) != domain.dim())
    fail(ErrorKind::InvalidInput, "power weight center has wrong dimension");
  if (!(scale > 0.0)) fail(ErrorKind::InvalidInput, "power weight scale must be positive");
  if (!(alpha > -domain.dim()))
    fail(ErrorKind::NonIntegrable, "power weight requires alpha > -n");
  Weight w;
  w.kind_ = WeightKind::Power;
  w.rule_ = Quadrature::Analytic;
  w.domain_ = std::move(domain);
  w.center_ = std::move(center);
  w.alpha_ = alpha;
  w.scale_ = scale;
  return w;
}

Weight Weight::constant(Box domain, double value) {
  Point c(domain.dim(), 0.0);
  for (int i = 0; i < domain.dim(); ++i) c[i] = 0.5 * (domain.lo[i] + domain.hi[i]);
  return power(std::move(domain), std::move(c), 0.0, value);
}

Weight Weight::sampled(Box domain, std::vector<int> shape, std::vector<double> values,
                       Quadrature rule) {
  if (domain.dim() < 1 || domain.dim() > 2)
    fail(ErrorKind::InvalidInput, "weights support dimension 1 or 2");
  if (static_cast<int>(shape.size()) != domain.dim())
    fail(ErrorKind::InvalidInput, "sampled weight shape has wrong dimension");
  if (rule == Quadrature::Analytic)
    fail(ErrorKind::InvalidInput, "sampled weights use midpoint or trapezoid quadrature");
  std::size_t expect = 1;
  for (int s : shape) {
    if (s < 1) fail(ErrorKind::InvalidInput, "sampled weight needs at least one cell per axis");
    expect *= static_cast<std::size_t>(rule == Quadrature::Trapezoid ? s + 1 : s);
  }
  if (values.size() != expect) fail(ErrorKind::InvalidInput, "sampled weight value count mismatch");
  Weight w;
  w.kind_ = WeightKind::Sampled;
  w.rule_ = rule;
  w.domain_ = std::move(domain);
  w.shape_ = std::move(shape);
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v))
      fail(ErrorKind::InvalidInput, "sampled weight values must be finite and non-negative");
    if (v < 1e-300) w.has_zero_ = true;
  }
  w.samples_ = std::make_shared<const std::vector<double>>(std::move(values));
  return w;
}

Weight Weight::sample(Box domain, std::vector<int> shape,
                      const std::function<double(const Point&)>& f, Quadrature rule) {
  const int n = domain.dim();
  const bool nodes = rule == Quadrature::Trapezoid;
  std::vector<int> count(n);
  for (int i = 0; i < n; ++i) count[i] = nodes ? shape[i] + 1 : shape[i];
  std::size_t total = 1;
  for (int c : count) total *= static_cast<std::size_t>(c);
  std::vector<double> values(total);
  Point x(n);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (int i = n - 1; i >= 0; --i) {
      int k = static_cast<int>(rem % count[i]);
      rem /= count[i];
      double h = (domain.hi[i] - domain.lo[i]) / shape[i];
      x[i] = domain.lo[i] + (nodes ? k : k + 0.5) * h;
    }
    values[flat] = f(x);
  }
  return sampled(std::move(domain), std::move(shape), std::move(values), rule);
}

Weight Weight::pow(double p) const {
  Weight w = *this;
  w.exponent_ = exponent_ * p;
  return w;
}

Weight Weight::scaled(double c) const {
  if (!(c > 0.0)) fail(ErrorKind::InvalidInput, "weight scale factor must be positive");
  Weight w = *this;
  if (kind_ == WeightKind::Power) {
    w.scale_ = scale_ * std::pow(c, 1.0 / exponent_);
  } else {
    auto v = std::make_shared<std::vector<double>>(*samples_);
    const double f = std::pow(c, 1.0 / exponent_);
    for (double& x : *v) x *= f;
    w.samples_ = v;
  }
  return w;
}

bool Weight::integrable() const {
  if (kind_ == WeightKind::Power) return effective_alpha() > -dim();
  return !(has_zero_ && exponent_ < 0.0);
}

void Weight::require_integrable() const {
  if (integrable()) return;
  std::ostringstream os;
  if (kind_ == WeightKind::Power)
    os << "|x-c|^" << effective_alpha() << " is not locally integrable in dimension " << dim();
  else
    os << "sampled weight has zero values and a negative exponent " << exponent_;
  fail(ErrorKind::NonIntegrable, os.str());
}

double Weight::value(const Point& x) const {
  if (kind_ == WeightKind::Power) {
    double d = 0.0;
    for (int i = 0; i < dim(); ++i) d += (x[i] - center_[i]) * (x[i] - center_[i]);
    d = std::sqrt(d);
    return std::pow(scale_, exponent_) * std::pow(d, effective_alpha());
  }
  std::vector<int> idx(dim());
  for (int i = 0; i < dim(); ++i) {
    double h = (domain_.hi[i] - domain_.lo[i]) / shape_[i];
    int k = static_cast<int>(std::floor((x[i] - domain_.lo[i]) / h));
    idx[i] = std::clamp(k, 0, shape_[i] - 1);
  }
  return cell_value_(idx);
}

int Weight::cell_count() const {
  if (kind_ == WeightKind::Power) return 0;
  int c = 1;
  for (int s : shape_) c *= s;
  return c;
}

Box Weight::cell_box(int flat) const {
  Box b{Point(dim()), Point(dim())};
  for (int i = dim() - 1; i >= 0; --i) {
    int k = flat % shape_[i];
    flat /= shape_[i];
    double h = (domain_.hi[i] - domain_.lo[i]) / shape_[i];
    b.lo[i] = domain_.lo[i] + k * h;
    b.hi[i] = domain_.lo[i] + (k + 1) * h;
  }
  return b;
}

double Weight::cell_value(int flat) const {
  std::vector<int> idx(dim());
  for (int i = dim() - 1; i >= 0; --i) {
    idx[i] = flat % shape_[i];
    flat /= shape_[i];
  }
  return cell_value_(idx);
}

double Weight::cell_value_(const std::vector<int>& idx) const {
  const auto& v = *samples_;
  auto ev = [this](double s) {
    if (exponent_ == 1.0) return s;
    if (s < 1e-300 && exponent_ < 0.0) return kInf;
    return std::pow(s, exponent_);
  };
  if (rule_ == Quadrature::Midpoint) {
    std::size_t flat = 0;
    for (int i = 0; i < dim(); ++i) flat = flat * shape_[i] + idx[i];
    return ev(v[flat]);
  }
  if (dim() == 1) return 0.5 * (ev(v[idx[0]]) + ev(v[idx[0] + 1]));
  const int stride = shape_[1] + 1;
  double s = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) s += ev(v[(idx[0] + a) * stride + idx[1] + b]);
  return 0.25 * s;
}

Mass Weight::ball_mass(const Point& x0, double r) const {
  if (!(r > 0.0)) fail(ErrorKind::InvalidInput, "ball radius must be positive");
  require_integrable();
  Mass m;
  if (dim() == 1) {
    double a = std::max(x0[0] - r, domain_.lo[0]);
    double b = std::min(x0[0] + r, domain_.hi[0]);
    if (!(b > a)) fail(ErrorKind::EmptyBall, "ball misses the domain at " + describe(x0));
    return box_mass({a}, {b});
  }
  detail::Disc d{x0[0], x0[1], r};
  double x0c = std::max(x0[0] - r, domain_.lo[0]), x1c = std::min(x0[0] + r, domain_.hi[0]);
  double y0c = std::max(x0[1] - r, domain_.lo[1]), y1c = std::min(x0[1] + r, domain_.hi[1]);
  m.measure = detail::disc_rect_area(d, x0c, x1c, y0c, y1c);
  if (!(m.measure > 0.0)) fail(ErrorKind::EmptyBall, "ball misses the domain at " + describe(x0));
  if (kind_ == WeightKind::Power) {
    const double k = std::pow(scale_, exponent_);
    if (effective_alpha() == 0.0) {
      m.integral = k * m.measure;
      return m;
    }
    m.integral = k * detail::power_integral_2d(center_[0], center_[1], effective_alpha(), x0c, x1c,
                                           y0c, y1c, &d);
    return m;
  }
  const double hx = (domain_.hi[0] - domain_.lo[0]) / shape_[0];
  const double hy = (domain_.hi[1] - domain_.lo[1]) / shape_[1];
  int i0 = std::max(0, static_cast<int>(std::floor((x0c - domain_.lo[0]) / hx)));
  int i1 = std::min(shape_[0] - 1, static_cast<int>(std::floor((x1c - domain_.lo[0]) / hx)));
  int j0 = std::max(0, static_cast<int>(std::floor((y0c - domain_.lo[1]) / hy)));
  int j1 = std::min(shape_[1] - 1, static_cast<int>(std::floor((y1c - domain_.lo[1]) / hy)));
  for (int i = i0; i <= i1; ++i) {
    double cx0 = domain_.lo[0] + i * hx;
    for (int j = j0; j <= j1; ++j) {
      double cy0 = domain_.lo[1] + j * hy;
      double area = detail::disc_rect_area(d, cx0, cx0 + hx, cy0, cy0 + hy);
      if (area > 0.0) m.integral += area * cell_value_({i, j});
    }
  }
  return m;
}

Mass Weight::box_mass(const Point& lo, const Point& hi) const {
  require_integrable();
  Mass m;
  const int n = dim();
  Point a(n), b(n);
  for (int i = 0; i < n; ++i) {
    a[i] = std::max(lo[i], domain_.lo[i]);
    b[i] = std::min(hi[i], domain_.hi[i]);
    if (!(b[i] > a[i])) return m;
  }
  m.measure = 1.0;
  for (int i = 0; i < n; ++i) m.measure *= b[i] - a[i];
  if (kind_ == WeightKind::Power) {
    const double s = effective_alpha();
    const double k = std::pow(scale_, exponent_);
    if (n == 1) {
      m.integral = s == 0.0 ? k * (b[0] - a[0]) : k * power_integral_1d(center_[0], s, a[0], b[0]);
    } else {
      m.integral = s == 0.0 ? k * m.measure
                            : k * detail::power_integral_2d(center_[0], center_[1], s, a[0], b[0],
                                                            a[1], b[1], nullptr);
    }
    return m;
  }
  if (n == 1) {
    const double h = (domain_.hi[0] - domain_.lo[0]) / shape_[0];
    int i0 = std::max(0, static_cast<int>(std::floor((a[0] - domain_.lo[0]) / h)));
    int i1 = std::min(shape_[0] - 1, static_cast<int>(std::floor((b[0] - domain_.lo[0]) / h)));
    for (int i = i0; i <= i1; ++i) {
      double c0 = domain_.lo[0] + i * h;
      double len = std::min(b[0], c0 + h) - std::max(a[0], c0);
      if (len > 0.0) m.integral += len * cell_value_({i});
    }
    return m;
  }
  const double hx = (domain_.hi[0] - domain_.lo[0]) / shape_[0];
  const double hy = (domain_.hi[1] - domain_.lo[1]) / shape_[1];
  int i0 = std::max(0, static_cast<int>(std::floor((a[0] - domain_.lo[0]) / hx)));
  int i1 = std::min(shape_[0] - 1, static_cast<int>(std::floor((b[0] - domain_.lo[0]) / hx)));
  int j0 = std::max(0, static_cast<int>(std::floor((a[1] - domain_.lo[1]) / hy)));
  int j1 = std::min(shape_[1] - 1, static_cast<int>(std::floor((b[1] - domain_.lo[1]) / hy)));
  for (int i = i0; i <= i1; ++i) {
    double cx0 = domain_.lo[0] + i * hx;
    double lx = std::min(b[0], cx0 + hx) - std::max(a[0], cx0);
    if (lx <= 0.0) continue;
    for (int j = j0; j <= j1; ++j) {
      double cy0 = domain_.lo[1] + j * hy;
      double ly = std::min(b[1], cy0 + hy) - std::max(a[1], cy0);
      if (ly > 0.0) m.integral += lx * ly * cell_value_({i, j});
    }
  }
  return m;
}

double Weight::ess_sup(const Point& x0, double r) const {
  require_integrable();
  const int n = dim();
  if (kind_ == WeightKind::Power) {
    const double s = effective_alpha();
    const double k = std::pow(scale_, exponent_);
    if (s == 0.0) return k;
    double dmin, dmax;
    if (n == 1) {
      double a = std::max(x0[0] - r, domain_.lo[0]), b = std::min(x0[0] + r, domain_.hi[0]);
      if (!(b > a)) fail(ErrorKind::EmptyBall, "ball misses the domain at " + describe(x0));
      const double c = center_[0];
      dmax = std::max(std::abs(a - c), std::abs(b - c));
      dmin = (c >= a && c <= b) ? 0.0 : std::min(std::abs(a - c), std::abs(b - c));
    } else {
      detail::Disc d{x0[0], x0[1], r};
      if (!detail::distance_range_2d(center_[0], center_[1], domain_.lo[0], domain_.hi[0],
                                     domain_.lo[1], domain_.hi[1], &d, dmin, dmax))
        fail(ErrorKind::EmptyBall, "ball misses the domain at " + describe(x0));
    }
    if (s > 0.0) return k * std::pow(dmax, s);
    return dmin > 0.0 ? k * std::pow(dmin, s) : kInf;
  }
  double best = 0.0;
  bool any = false;
  for (int flat = 0; flat < cell_count(); ++flat) {
    Box c = cell_box(flat);
    double dist2 = 0.0;
    for (int i = 0; i < n; ++i) {
      double q = std::clamp(x0[i], c.lo[i], c.hi[i]) - x0[i];
      dist2 += q * q;
    }
    if (dist2 < r * r) {
      any = true;
      best = std::max(best, cell_value(flat));
    }
  }
  if (!any) fail(ErrorKind::EmptyBall, "ball misses the domain at " + describe(x0));
  return best;
}

double ball_average(const Weight& w, const Point& x0, double r, double p) {
  return w.pow(p).ball_mass(x0, r).average();
}

std::vector<double> BallFamily::log_radii(double r_min, double r_max, int count) {
  std::vector<double> r(count);
  if (count == 1) {
    r[0] = r_max;
    return r;
  }
  const double a = std::log(r_min), b = std::log(r_max);
  for (int k = 0; k < count; ++k) r[k] = std::exp(a + (b - a) * k / (count - 1));
  r.back() = r_max;
  return r;
}

BallFamily BallFamily::default_for(const Weight& w, int nodes_per_axis, int radii) {
  const Box& dom = w.domain();
  const int n = dom.dim();
  BallFamily fam;
  double extent = 0.0, cell = 0.0;
  for (int i = 0; i < n; ++i) {
    extent = std::max(extent, dom.hi[i] - dom.lo[i]);
    if (w.kind() == WeightKind::Sampled)
      cell = std::max(cell, (dom.hi[i] - dom.lo[i]) / w.shape()[i]);
  }
  const double r_max = 0.5 * extent;
  const double r_min = std::max(r_max / 512.0, 2.0 * cell);
  fam.radii = log_radii(r_min, r_max, radii);
  const int m = std::max(nodes_per_axis, 1);
  std::vector<int> idx(n, 0);
  while (true) {
    Point c(n);
    for (int i = 0; i < n; ++i)
      c[i] = m == 1 ? 0.5 * (dom.lo[i] + dom.hi[i])
                    : dom.lo[i] + (dom.hi[i] - dom.lo[i]) * idx[i] / (m - 1);
    fam.centers.push_back(c);
    int d = n - 1;
    while (d >= 0 && ++idx[d] == m) idx[d--] = 0;
    if (d < 0) break;
  }
  if (w.kind() == WeightKind::Power && dom.contains(w.center()) &&
      std::find(fam.centers.begin(), fam.centers.end(), w.center()) == fam.centers.end())
    fam.centers.push_back(w.center());
  return fam;
}

BallFamily BallFamily::centered(const Point& c, std::vector<double> radii) {
  return BallFamily{{c}, std::move(radii)};
}

double aq_ball_quantity(const Weight& w, double q, const Point& x0, double r) {
  if (!(q >= 1.0)) fail(ErrorKind::InvalidInput, "A_q requires q >= 1");
  const double m1 = w.ball_mass(x0, r).average();
  if (q == 1.0) return m1 * w.pow(-1.0).ess_sup(x0, r);
  const double m2 = w.pow(-1.0 / (q - 1.0)).ball_mass(x0, r).average();
  return m1 * std::pow(m2, q - 1.0);
}

double aq_characteristic(const Weight& w, double q, const BallFamily& fam) {
  if (!(q >= 1.0)) fail(ErrorKind::InvalidInput, "A_q requires q >= 1");
  w.require_integrable();
  const Weight dual = q == 1.0 ? w.pow(-1.0) : w.pow(-1.0 / (q - 1.0));
  if (q > 1.0) dual.require_integrable();
  double best = 0.0;
  for (const Point& c : fam.centers) {
    for (double r : fam.radii) {
      Mass m1;
      try {
        m1 = w.ball_mass(c, r);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::EmptyBall) continue;
        throw;
      }
      double v;
      if (q == 1.0) {
        v = m1.average() * dual.ess_sup(c, r);
      } else {
        v = m1.average() * std::pow(dual.ball_mass(c, r).average(), q - 1.0);
      }
      best = std::max(best, v);
    }
  }
  return best;
}

AuditReport check_beta_condition(const Weight& beta, const WeightContext& ctx,
                                 const BallFamily& fam, double tol_quad) {
  const int n0 = ctx.n0();
  const double half = 0.5 * n0;
  AuditReport rep;
  rep.name = "beta_condition";
  rep.anchor = "inverse weight in A_{1+2/n0}";
  // Integrability of the lifted weight is part of the condition itself.
  beta.pow(half).require_integrable();
  const double est1 = aq_characteristic(beta.pow(-1.0), 1.0 + 2.0 / n0, fam);
  const double est2 = aq_characteristic(beta.pow(half), 1.0 + half, fam);
  const double est_a2 = aq_characteristic(beta, 2.0, fam);
  rep.values["est_inverse_A"] = est1;
  rep.values["est_lifted_A"] = est2;
  rep.values["est_A2"] = est_a2;
  rep.values["M0"] = ctx.M0;
  rep.values["n0"] = n0;
  rep.add_row({"[beta^-1]_{A_{1+2/n0}} <= M0", est1, ctx.M0, est1, ctx.M0, est1 <= ctx.M0});
  const double lifted = std::pow(est1, half);
  const double gap = std::abs(est2 - lifted);
  rep.add_row({"duality [beta^{n0/2}] = [beta^-1]^{n0/2}", gap, tol_quad * std::max(est2, 1.0),
               est2 > 0 ? gap / est2 : 0.0, tol_quad, gap <= tol_quad * std::max(est2, 1.0)});
  rep.add_row({"[beta]_{A_2} <= [beta^-1]_{A_{1+2/n0}}", est_a2, est1, est1 > 0 ? est_a2 / est1 : 0.0,
               1.0 + tol_quad, est_a2 <= est1 * (1.0 + tol_quad)});
  return rep;
}

std::vector<double> geometric_gamma_grid(double gamma_max, int levels) {
  std::vector<double> g(levels);
  for (int k = 0; k < levels; ++k) g[k] = std::ldexp(gamma_max, -k);
  return g;
}

double reverse_holder_gamma(const Weight& w, const BallFamily& fam, double budget,
                            const std::vector<double>& candidates) {
  if (!(budget >= 1.0)) fail(ErrorKind::InvalidInput, "reverse Hölder budget must be >= 1");
  std::vector<double> cand = candidates;
  std::sort(cand.begin(), cand.end(), std::greater<>());
  for (double g : cand) {
    if (!(g > 0.0)) continue;
    const Weight lifted = w.pow(1.0 + g);
    if (!lifted.integrable()) continue;
    bool ok = true;
    for (const Point& c : fam.centers) {
      for (double r : fam.radii) {
        Mass m1;
        try {
          m1 = w.ball_mass(c, r);
        } catch (const Error& e) {
          if (e.kind() == ErrorKind::EmptyBall) continue;
          throw;
        }
        const double lhs = std::pow(lifted.ball_mass(c, r).average(), 1.0 / (1.0 + g));
        if (!(lhs <= budget * m1.average() * (1.0 + 1e-12))) {
          ok = false;
          break;
        }
      }
      if (!ok) break;
    }
    if (ok) return g;
  }
  return 0.0;
}

double reverse_holder_gamma(const Weight& w, const BallFamily& fam, double budget) {
  double gmax = 1.0;
  if (w.kind() == WeightKind::Power && w.effective_alpha() < 0.0)
    gmax = std::min(gmax, 0.9 * (-w.dim() / w.effective_alpha() - 1.0));
  return reverse_holder_gamma(w, fam, budget, geometric_gamma_grid(gmax));
}

namespace {

struct NestedPair {
  double log_mass_ratio;
  double log_measure_ratio;
};

std::vector<NestedPair> nested_pairs(const Weight& wbar, const BallFamily& fam) {
  std::vector<NestedPair> out;
  const int n = wbar.dim();
  for (const Point& c : fam.centers) {
    for (double r : fam.radii) {
      Mass m2;
      try {
        m2 = wbar.ball_mass(c, r);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::EmptyBall) continue;
        throw;
      }
      if (!(m2.integral > 0.0)) continue;
      for (double s : {0.5, 0.25, 0.125, 0.0625, 0.03125}) {
        std::vector<Point> subs = {c};
        for (int i = 0; i < n; ++i) {
          for (double sgn : {-1.0, 1.0}) {
            Point y = c;
            y[i] += sgn * (1.0 - s) * r;
            subs.push_back(y);
          }
        }
        for (const Point& y : subs) {
          Mass m1;
          try {
            m1 = wbar.ball_mass(y, s * r);
          } catch (const Error& e) {
            if (e.kind() == ErrorKind::EmptyBall) continue;
            throw;
          }
          if (!(m1.integral > 0.0) || !(m1.measure > 0.0)) continue;
          out.push_back({std::log(m1.integral / m2.integral), std::log(m1.measure / m2.measure)});
        }
      }
    }
  }
  return out;
}

double lambda_formula(double zeta0, double N2, int n) {
  return std::max(std::pow(2.0, 1.0 / (2.0 * zeta0)) * std::pow(N2, 1.0 / (n * zeta0)), 2.0);
}

}  // namespace

PropertyConstants estimate_property_constants(const Weight& wbar, const BallFamily& fam) {
  const auto pairs = nested_pairs(wbar, fam);
  PropertyConstants best{0.99, 1.0};
  double best_lambda = kInf;
  for (int k = 99; k >= 2; --k) {
    const double z = k / 100.0;
    double logN = 0.0;
    for (const auto& p : pairs) logN = std::max(logN, p.log_mass_ratio - z * p.log_measure_ratio);
    const double N2 = std::exp(logN);
    const double lam = lambda_formula(z, N2, wbar.dim());
    if (lam < best_lambda) {
      best_lambda = lam;
      best = {z, N2};
    }
  }
  return best;
}

double doubling_eta(double theta, double M0, int n0) {
  return 1.0 - std::pow(1.0 - theta, 1.0 + 0.5 * n0) * std::pow(M0, -0.5 * n0);
}

namespace {

// Largest wbar-mass of a union of sub-cells of B_r(c) with total measure <= theta |B|.
double superlevel_fraction(const Weight& wbar, const Point& c, double r, double theta,
                           const Mass& whole) {
  const int n = wbar.dim();
  const int K = n == 1 ? 128 : 24;
  const Box& dom = wbar.domain();
  Point lo(n), hi(n);
  for (int i = 0; i < n; ++i) {
    lo[i] = std::max(c[i] - r, dom.lo[i]);
    hi[i] = std::min(c[i] + r, dom.hi[i]);
  }
  struct Piece {
    double density;
    double mass;
    double measure;
  };
  std::vector<Piece> pieces;
  if (n == 1) {
    const double h = (hi[0] - lo[0]) / K;
    for (int i = 0; i < K; ++i) {
      Mass m = wbar.box_mass({lo[0] + i * h}, {lo[0] + (i + 1) * h});
      if (m.measure > 0) pieces.push_back({m.integral / m.measure, m.integral, m.measure});
    }
  } else {
    const double hx = (hi[0] - lo[0]) / K, hy = (hi[1] - lo[1]) / K;
    for (int i = 0; i < K; ++i) {
      for (int j = 0; j < K; ++j) {
        Point a{lo[0] + i * hx, lo[1] + j * hy}, b{a[0] + hx, a[1] + hy};
        // Keep only sub-cells fully inside the disc so that S1 is a subset of the ball.
        bool inside = true;
        for (double x : {a[0], b[0]})
          for (double y : {a[1], b[1]})
            if ((x - c[0]) * (x - c[0]) + (y - c[1]) * (y - c[1]) > r * r) inside = false;
        if (!inside) continue;
        Mass m = wbar.box_mass(a, b);
        if (m.measure > 0) pieces.push_back({m.integral / m.measure, m.integral, m.measure});
      }
    }
  }
  std::stable_sort(pieces.begin(), pieces.end(),
                   [](const Piece& x, const Piece& y) { return x.density > y.density; });
  double mass = 0.0, meas = 0.0;
  for (const auto& p : pieces) {
    if (meas + p.measure > theta * whole.measure * (1.0 + 1e-12)) break;
    meas += p.measure;
    mass += p.mass;
  }
  return mass / whole.integral;
}

}  // namespace

AuditReport doubling_report(const Weight& w, double p, const BallFamily& fam, double theta,
                            const WeightContext& ctx) {
  if (!(theta > 0.0 && theta < 1.0)) fail(ErrorKind::InvalidInput, "theta must lie in (0,1)");
  const Weight wbar = w.pow(p);
  wbar.require_integrable();
  AuditReport rep;
  rep.name = "doubling";
  rep.anchor = "doubling and measure-ratio properties of the lifted weight";
  double N1 = 0.0;
  for (const Point& c : fam.centers) {
    for (double r : fam.radii) {
      try {
        Mass small = wbar.ball_mass(c, r);
        Mass big = wbar.ball_mass(c, 2.0 * r);
        if (small.integral > 0.0) N1 = std::max(N1, big.integral / small.integral);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::EmptyBall) throw;
      }
    }
  }
  rep.values["N1"] = N1;
  rep.add_row({"doubling constant N1", N1, 0.0, N1, kInf, std::isfinite(N1) && N1 > 0.0});

  const PropertyConstants pc = estimate_property_constants(wbar, fam);
  rep.values["zeta0"] = pc.zeta0;
  rep.values["N2"] = pc.N2;
  rep.values["Lambda"] = lambda_formula(pc.zeta0, pc.N2, w.dim());

  const double eta = doubling_eta(theta, ctx.M0, ctx.n0());
  double worst = 0.0;
  for (const Point& c : fam.centers) {
    for (double r : fam.radii) {
      Mass whole;
      try {
        whole = wbar.ball_mass(c, r);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::EmptyBall) continue;
        throw;
      }
      if (!(whole.integral > 0.0)) continue;
      worst = std::max(worst, superlevel_fraction(wbar, c, r, theta, whole));
    }
  }
  rep.values["eta"] = eta;
  rep.values["theta"] = theta;
  rep.values["worst_fraction"] = worst;
  rep.add_row({"wbar(S1) <= eta wbar(S2) for |S1| <= theta |S2|", worst, eta,
               eta > 0 ? worst / eta : 0.0, 1.0, worst <= eta});
  return rep;
}

}  // namespace wparab
