#include "wparab/inequality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "wparab/error.hpp"

namespace wparab {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

struct Interval {
  double lo, hi;
  double length() const { return hi - lo; }
};

Interval clipped_ball(const Weight& w, double x0, double r) {
  if (w.dim() != 1) fail(ErrorKind::InvalidInput, "inequality audits are one-dimensional");
  if (!(r > 0.0)) fail(ErrorKind::InvalidInput, "radius must be positive");
  const Interval I{std::max(x0 - r, w.domain().lo[0]), std::min(x0 + r, w.domain().hi[0])};
  if (!(I.hi > I.lo)) fail(ErrorKind::EmptyBall, "ball misses the weight domain");
  return I;
}

Interval clipped_half_ball(const Weight& w, double x0, double r) {
  const Interval I{std::max(x0, w.domain().lo[0]), std::min(x0 + r, w.domain().hi[0])};
  if (!(I.hi > I.lo)) fail(ErrorKind::EmptyBall, "half ball misses the weight domain");
  return I;
}

std::vector<double> weight_breaks(const Weight& w) {
  std::vector<double> br;
  if (w.kind() == WeightKind::Power) {
    br.push_back(w.center()[0]);
  } else {
    const int m = w.shape()[0];
    const double a = w.domain().lo[0], b = w.domain().hi[0];
    for (int i = 0; i <= m; ++i) br.push_back(a + (b - a) * i / m);
  }
  return br;
}

std::vector<double> merged(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

double weight_mass(const Weight& w, const Interval& I) {
  return w.box_mass({I.lo}, {I.hi}).integral;
}

std::vector<double> poly_square(const std::vector<double>& p) {
  if (p.empty()) return {};
  std::vector<double> q(2 * p.size() - 1, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < p.size(); ++j) q[i + j] += p[i] * p[j];
  return q;
}

double poly_integral(const std::vector<double>& p, double a, double b) {
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k)
    s += p[k] * (std::pow(b, double(k + 1)) - std::pow(a, double(k + 1))) / double(k + 1);
  return s;
}

double ratio(double lhs, double rhs) {
  if (lhs == 0.0) return 0.0;
  if (!(rhs > 0.0)) return std::numeric_limits<double>::infinity();
  return lhs / rhs;
}

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

}  // namespace

TestFunction TestFunction::polynomial(std::vector<double> coeffs) {
  if (coeffs.empty()) coeffs.push_back(0.0);
  TestFunction f;
  f.kind_ = TestFunctionKind::Polynomial;
  f.a_ = std::move(coeffs);
  return f;
}

TestFunction TestFunction::trigonometric(double amplitude, double frequency, double phase,
                                         double offset) {
  TestFunction f;
  f.kind_ = TestFunctionKind::Trigonometric;
  f.amp_ = amplitude;
  f.freq_ = frequency;
  f.phase_ = phase;
  f.offset_ = offset;
  return f;
}

TestFunction TestFunction::piecewise_linear(std::vector<double> xs, std::vector<double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    fail(ErrorKind::InvalidInput, "piecewise linear function needs matching knots, at least two");
  for (std::size_t j = 1; j < xs.size(); ++j)
    if (!(xs[j] > xs[j - 1])) fail(ErrorKind::InvalidInput, "knots must be increasing");
  TestFunction f;
  f.kind_ = TestFunctionKind::PiecewiseLinear;
  f.a_ = std::move(xs);
  f.b_ = std::move(ys);
  return f;
}

double TestFunction::value(double x) const {
  switch (kind_) {
    case TestFunctionKind::Polynomial: {
      double s = 0.0;
      for (auto it = a_.rbegin(); it != a_.rend(); ++it) s = s * x + *it;
      return scale_ * s;
    }
    case TestFunctionKind::Trigonometric:
      return scale_ * (offset_ + amp_ * std::sin(freq_ * x + phase_));
    case TestFunctionKind::PiecewiseLinear: {
      if (x <= a_.front()) return scale_ * b_.front();
      if (x >= a_.back()) return scale_ * b_.back();
      const auto j = std::size_t(std::upper_bound(a_.begin(), a_.end(), x) - a_.begin()) - 1;
      const double s = (x - a_[j]) / (a_[j + 1] - a_[j]);
      return scale_ * ((1.0 - s) * b_[j] + s * b_[j + 1]);
    }
  }
  return 0.0;
}

double TestFunction::gradient(double x) const {
  switch (kind_) {
    case TestFunctionKind::Polynomial: {
      double s = 0.0;
      for (std::size_t k = a_.size(); k-- > 1;) s = s * x + double(k) * a_[k];
      return scale_ * s;
    }
    case TestFunctionKind::Trigonometric:
      return scale_ * amp_ * freq_ * std::cos(freq_ * x + phase_);
    case TestFunctionKind::PiecewiseLinear: {
      if (x < a_.front() || x > a_.back()) return 0.0;
      auto j = std::size_t(std::upper_bound(a_.begin(), a_.end(), x) - a_.begin());
      j = std::min(std::max<std::size_t>(j, 1), a_.size() - 1) - 1;
      return scale_ * (b_[j + 1] - b_[j]) / (a_[j + 1] - a_[j]);
    }
  }
  return 0.0;
}

std::vector<double> TestFunction::kinks() const {
  return kind_ == TestFunctionKind::PiecewiseLinear ? a_ : std::vector<double>{};
}

double TestFunction::frequency() const {
  return kind_ == TestFunctionKind::Trigonometric ? std::abs(freq_) : 0.0;
}

TestFunction TestFunction::scaled(double c) const {
  TestFunction f = *this;
  f.scale_ *= c;
  return f;
}

double TestFunction::max_fd_error(std::uint64_t seed, int samples, double lo, double hi) const {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  const auto ks = kinks();
  double worst = 0.0;
  for (int j = 0; j < samples; ++j) {
    const double x = d(rng);
    const double h = 1e-5 * std::max(1.0, std::abs(x)) / std::max(1.0, frequency());
    const bool near_kink = std::any_of(ks.begin(), ks.end(),
                                       [&](double k) { return std::abs(k - x) < 2 * h; });
    if (near_kink) continue;
    const double fd = (value(x + h) - value(x - h)) / (2 * h);
    const double g = gradient(x);
    worst = std::max(worst, std::abs(fd - g) / std::max(1.0, std::abs(g)));
  }
  return worst;
}

double SpaceTimeFunction::time_value(double t) const {
  double s = 0.0;
  for (auto it = time_poly.rbegin(); it != time_poly.rend(); ++it) s = s * t + *it;
  return s;
}

double integrate_1d(const std::function<double(double)>& f, double a, double b,
                    std::vector<double> breaks, double frequency) {
  if (!(b > a)) return 0.0;
  thread_local boost::math::quadrature::tanh_sinh<double> rule;
  std::vector<double> pts{a, b};
  constexpr int kMinPieces = 16;
  const int pieces =
      std::max(kMinPieces, int(std::ceil(2.0 * (b - a) * frequency / kPi)));
  for (int j = 1; j < pieces; ++j) pts.push_back(a + (b - a) * j / pieces);
  for (double x : breaks)
    if (x > a && x < b) pts.push_back(x);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  // Endpoints may coincide with a weight singularity; a single point carries no mass.
  auto guarded = [&](double x) {
    const double v = f(x);
    return std::isfinite(v) ? v : 0.0;
  };
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < pts.size(); ++j)
    total += rule.integrate(guarded, pts[j], pts[j + 1], 1e-12);
  return total;
}

AuditReport weighted_lq_control_audit(const TestFunction& g, const Weight& mu, double q,
                                      double x0, double r, double gamma, double M0,
                                      const std::vector<double>& dilations) {
  if (!(q > 1.0 && q <= 2.0)) fail(ErrorKind::InvalidInput, "q must lie in (1, 2]");
  if (dilations.empty()) fail(ErrorKind::InvalidInput, "dilation sweep is empty");
  if (!(gamma > 0.0 && gamma < q - 1.0))
    fail(ErrorKind::GateFailed, "gamma must lie in (0, q - 1)");
  double aq;
  try {
    aq = aq_characteristic(mu, q, BallFamily::default_for(mu));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NonIntegrable) throw;
    fail(ErrorKind::GateFailed, std::string("A_q precondition fails: ") + e.what());
  }
  if (!(aq <= M0)) fail(ErrorKind::GateFailed, "A_q precondition fails: estimate exceeds M0");

  AuditReport rep;
  rep.name = "weighted_lq_control";
  rep.anchor = "weighted L^q control by the weighted L^2 average";
  rep.values["q"] = q;
  rep.values["gamma"] = gamma;
  rep.values["aq_estimate"] = aq;
  rep.values["M0"] = M0;
  const double p = 2.0 / (q - gamma);
  const auto br = merged(weight_breaks(mu), g.kinks());
  Table t{{"dilation", "lhs", "rhs", "N_emp", "holder_bound"}, {}};
  double n_min = std::numeric_limits<double>::infinity(), n_max = 0.0;
  for (double s : dilations) {
    const Interval I = clipped_ball(mu, x0, s * r);
    const double avg_p =
        integrate_1d([&](double x) { return std::pow(std::abs(g.value(x)), p); }, I.lo, I.hi, br,
                     g.frequency()) /
        I.length();
    const double lhs = std::pow(avg_p, 1.0 / p);
    const double wg2 = integrate_1d(
        [&](double x) {
          const double v = g.value(x);
          return v * v * mu.value({x});
        },
        I.lo, I.hi, br, g.frequency());
    const double rhs = std::sqrt(wg2 / weight_mass(mu, I));
    const double N = ratio(lhs, rhs);
    const double bound = std::sqrt(aq_ball_quantity(mu, q - gamma, {x0}, s * r));
    t.rows.push_back({s, lhs, rhs, N, bound});
    rep.add_row({"dilation " + std::to_string(s), lhs, rhs, N, bound,
                 std::isfinite(N) && N <= bound * (1 + 1e-9)});
    n_min = std::min(n_min, N);
    n_max = std::max(n_max, N);
  }
  rep.tables["dilation_sweep"] = t;
  rep.values["N_emp"] = t.rows.front()[3];
  rep.values["N_max"] = n_max;
  rep.values["N_spread"] = n_min > 0.0 ? n_max / n_min : 1.0;
  return rep;
}

AuditReport weighted_embedding_audit(const TestFunction& g, const Weight& beta, EmbeddingCase c,
                                     double gamma, double x0, double r,
                                     double reverse_holder_budget) {
  if (c == EmbeddingCase::HighDimension)
    fail(ErrorKind::GateFailed, "the n >= 3 embedding needs n >= 3; test functions are one-dimensional");
  if (!(gamma > 0.0)) fail(ErrorKind::GateFailed, "gamma must be positive");
  const double s = 2.0 * (1.0 + gamma) / gamma;

  AuditReport rep;
  rep.name = "weighted_embedding";
  rep.anchor = "weighted Lebesgue embedding";
  rep.values["gamma"] = gamma;
  rep.values["s"] = s;

  const Interval I = clipped_ball(beta, x0, r);
  const auto br = merged(weight_breaks(beta), g.kinks());
  const double wg2 = integrate_1d(
      [&](double x) {
        const double v = g.value(x);
        return v * v * beta.value({x});
      },
      I.lo, I.hi, br, g.frequency());
  const double lhs = wg2 / weight_mass(beta, I);
  const double avg_s =
      integrate_1d([&](double x) { return std::pow(std::abs(g.value(x)), s); }, I.lo, I.hi, br,
                   g.frequency()) /
      I.length();
  const double rhs = std::pow(avg_s, 2.0 / s);
  const double N = ratio(lhs, rhs);
  const double holder = std::pow(ball_average(beta, {x0}, r, 1.0 + gamma), 1.0 / (1.0 + gamma)) /
                        ball_average(beta, {x0}, r, 1.0);
  rep.values["lhs"] = lhs;
  rep.values["rhs"] = rhs;
  rep.values["N_emp"] = N;
  rep.values["holder_bound"] = holder;
  rep.add_row({"embedding", lhs, rhs, N, holder, std::isfinite(N) && N <= holder * (1 + 1e-9)});

  const double g_rh =
      reverse_holder_gamma(beta, BallFamily::default_for(beta), reverse_holder_budget);
  rep.values["reverse_holder_gamma"] = g_rh;
  rep.values["reverse_holder_budget"] = reverse_holder_budget;
  const bool exceeds = gamma > g_rh;
  rep.values["gamma_exceeds_reverse_holder"] = exceeds ? 1.0 : 0.0;
  if (exceeds)
    rep.notes["reverse_holder"] =
        "requested gamma exceeds the reverse Hoelder exponent estimated at this budget";
  return rep;
}

namespace {

struct InterpolationSides {
  double lhs = 0, A = 0, G = 0;
};

// Time factors are exact polynomial averages; space factors use quadrature.
InterpolationSides interpolation_sides(const TestFunction& g, double time_avg, const Weight& beta,
                                       const Interval& I, double dilation, double x0) {
  auto gx = [&](double x) { return g.value(x0 + (x - x0) * dilation); };
  auto dgx = [&](double x) { return dilation * g.gradient(x0 + (x - x0) * dilation); };
  std::vector<double> br = weight_breaks(beta);
  for (double k : g.kinks()) br.push_back(x0 + (k - x0) / dilation);
  const double freq = g.frequency() * dilation;
  const double L = I.length();
  const double wg2 = integrate_1d(
      [&](double x) {
        const double v = gx(x);
        return v * v * beta.value({x});
      },
      I.lo, I.hi, br, freq);
  const double g2 = integrate_1d([&](double x) { return gx(x) * gx(x); }, I.lo, I.hi, br, freq);
  const double d2 = integrate_1d([&](double x) { return dgx(x) * dgx(x); }, I.lo, I.hi, br, freq);
  const Mass m = beta.box_mass({I.lo}, {I.hi});
  InterpolationSides s;
  s.lhs = (wg2 / L) * time_avg / m.average();
  s.A = g2 / L * time_avg;
  s.G = d2 / L * time_avg;
  return s;
}

double interpolation_N(const InterpolationSides& s, double r, double theta) {
  const double rhs = s.A + std::pow(s.A, 1.0 - theta) * std::pow(r, 2 * theta) * std::pow(s.G, theta);
  return ratio(s.lhs, rhs);
}

}  // namespace

AuditReport interpolation_audit(const SpaceTimeFunction& u, const Weight& beta, double x0,
                                double r, const InterpolationOptions& opt) {
  if (!(opt.t_hi > opt.t_lo)) fail(ErrorKind::InvalidInput, "time interval is empty");
  if (!(opt.gamma > 0.0)) fail(ErrorKind::InvalidInput, "gamma must be positive");
  std::vector<double> thetas = opt.thetas;
  if (thetas.empty())
    for (int k = 1; k <= 19; ++k) thetas.push_back(0.05 * k);
  for (double th : thetas)
    if (!(th > 0.0 && th < 1.0)) fail(ErrorKind::InvalidInput, "theta must lie in (0, 1)");

  AuditReport rep;
  rep.name = "interpolation";
  rep.anchor = "weighted interpolation inequality on cylinders";
  const double time_avg =
      poly_integral(poly_square(u.time_poly), opt.t_lo, opt.t_hi) / (opt.t_hi - opt.t_lo);
  // Exponent of the one-dimensional Gagliardo-Nirenberg step with s = 2(1+gamma)/gamma.
  const double theta_proof = 0.5 - opt.gamma / (2.0 * (1.0 + opt.gamma));
  rep.values["theta_proof"] = theta_proof;
  rep.values["gamma"] = opt.gamma;

  const InterpolationSides full =
      interpolation_sides(u.space, time_avg, beta, clipped_ball(beta, x0, r), 1.0, x0);
  const InterpolationSides half =
      interpolation_sides(u.space, time_avg, beta, clipped_half_ball(beta, x0, r), 1.0, x0);

  Table tt{{"theta", "N_full", "N_half"}, {}};
  double best_full = std::numeric_limits<double>::infinity(), best_half = best_full;
  double arg_full = thetas.front(), arg_half = thetas.front();
  for (double th : thetas) {
    const double nf = interpolation_N(full, r, th), nh = interpolation_N(half, r, th);
    tt.rows.push_back({th, nf, nh});
    if (nf < best_full) best_full = nf, arg_full = th;
    if (nh < best_half) best_half = nh, arg_half = th;
  }
  rep.tables["theta_grid"] = tt;
  rep.values["N_emp_full"] = best_full;
  rep.values["theta_min_full"] = arg_full;
  rep.values["N_emp_half"] = best_half;
  rep.values["theta_min_half"] = arg_half;
  rep.values["N_proof_full"] = interpolation_N(full, r, theta_proof);
  rep.values["N_proof_half"] = interpolation_N(half, r, theta_proof);
  rep.values["A_full"] = full.A;
  rep.values["G_full"] = full.G;
  rep.add_row({"full cylinder", full.lhs, full.lhs / std::max(best_full, 1e-300), best_full,
               opt.budget, std::isfinite(best_full) && best_full <= opt.budget});
  rep.add_row({"upper-half cylinder", half.lhs, half.lhs / std::max(best_half, 1e-300), best_half,
               opt.budget, std::isfinite(best_half) && best_half <= opt.budget});

  // Radius sweep: u is dilated so that B_rho(x0) sees what B_r(x0) saw; the exponent that keeps
  // the gradient term fixed is fitted and compared with 2 theta.
  Table sw{{"r", "lhs", "A", "G", "N_theta_min"}, {}};
  std::vector<double> lr, lg;
  for (double rho : opt.r_sweep) {
    const InterpolationSides s =
        interpolation_sides(u.space, time_avg, beta, clipped_ball(beta, x0, rho), r / rho, x0);
    sw.rows.push_back({rho, s.lhs, s.A, s.G, interpolation_N(s, rho, arg_full)});
    if (s.G > 0.0) {
      lr.push_back(std::log(rho));
      lg.push_back(std::log(s.G));
    }
  }
  rep.tables["r_sweep"] = sw;
  if (lr.size() >= 2 && lr.size() == opt.r_sweep.size()) {
    const double exponent = -arg_full * fit_slope(lr, lg);
    rep.values["r_exponent_fit"] = exponent;
    rep.values["r_exponent_expected"] = 2 * arg_full;
    rep.add_row({"r^(2 theta) exponent", exponent, 2 * arg_full, exponent - 2 * arg_full, 0.1,
                 std::abs(exponent - 2 * arg_full) <= 0.1});
  } else {
    rep.notes["r_sweep"] = "gradient vanishes; exponent fit skipped";
  }

  // Fixed u, shrinking radius: share of the gradient term in the right-hand side.
  Table lim{{"r", "A", "gradient_term", "gradient_share"}, {}};
  for (double f : {1.0, 0.5, 0.25, 0.125, 0.0625}) {
    const double rho = r * f;
    const InterpolationSides s =
        interpolation_sides(u.space, time_avg, beta, clipped_ball(beta, x0, rho), 1.0, x0);
    const double gt = std::pow(s.A, 1.0 - arg_full) * std::pow(rho, 2 * arg_full) *
                      std::pow(s.G, arg_full);
    lim.rows.push_back({rho, s.A, gt, s.A + gt > 0.0 ? gt / (s.A + gt) : 0.0});
  }
  rep.tables["fixed_u"] = lim;
  return rep;
}

}  // namespace wparab
