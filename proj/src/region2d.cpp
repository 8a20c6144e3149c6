#include "region2d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/tanh_sinh.hpp>

namespace wparab::detail {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Area of the disc (centered at the origin) inside [0,a] x [0,b], a,b >= 0.
double quadrant_area(double r, double a, double b) {
  a = std::min(a, r);
  b = std::min(b, r);
  if (a <= 0.0 || b <= 0.0) return 0.0;
  if (a * a + b * b <= r * r) return a * b;
  // atan2 form keeps full precision where u approaches r.
  auto S = [r](double u) {
    double v = std::sqrt(std::max(0.0, (r - u) * (r + u)));
    return 0.5 * (u * v + r * r * std::atan2(u, v));
  };
  double xs = std::sqrt(std::max(0.0, (r - b) * (r + b)));
  return b * xs + S(a) - S(xs);
}

double signed_corner(double r, double x, double y) {
  double sx = x < 0 ? -1.0 : 1.0;
  double sy = y < 0 ? -1.0 : 1.0;
  return sx * sy * quadrant_area(r, std::abs(x), std::abs(y));
}

struct RaySpan {
  double lo;
  double hi;
};

RaySpan ray_span(double cx, double cy, double theta, double x0, double x1, double y0, double y1,
                 const Disc* disc) {
  double ex = std::cos(theta), ey = std::sin(theta);
  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
  auto slab = [&](double c, double e, double a, double b) {
    if (std::abs(e) < 1e-300) {
      if (c < a || c > b) hi = -1.0;
      return;
    }
    double t1 = (a - c) / e, t2 = (b - c) / e;
    if (t1 > t2) std::swap(t1, t2);
    lo = std::max(lo, t1);
    hi = std::min(hi, t2);
  };
  slab(cx, ex, x0, x1);
  slab(cy, ey, y0, y1);
  if (disc) {
    double dx = cx - disc->cx, dy = cy - disc->cy;
    double b = dx * ex + dy * ey;
    double disc2 = b * b - (dx * dx + dy * dy - disc->r * disc->r);
    if (disc2 < 0.0) return {0.0, 0.0};
    double sq = std::sqrt(disc2);
    lo = std::max(lo, -b - sq);
    hi = std::min(hi, -b + sq);
  }
  if (!(hi > lo)) return {0.0, 0.0};
  return {lo, hi};
}

void push_angle(std::vector<double>& out, double cx, double cy, double px, double py) {
  double dx = px - cx, dy = py - cy;
  if (dx * dx + dy * dy > 0.0) out.push_back(std::atan2(dy, dx));
}

std::vector<double> breakpoints(double cx, double cy, double x0, double x1, double y0, double y1,
                                const Disc* disc) {
  std::vector<double> a = {-kPi, -kPi / 2, 0.0, kPi / 2, kPi};
  for (double x : {x0, x1})
    for (double y : {y0, y1}) push_angle(a, cx, cy, x, y);
  if (disc) {
    const double r = disc->r;
    for (double X : {x0, x1}) {
      double d = r * r - (X - disc->cx) * (X - disc->cx);
      if (d >= 0.0) {
        double s = std::sqrt(d);
        push_angle(a, cx, cy, X, disc->cy + s);
        push_angle(a, cx, cy, X, disc->cy - s);
      }
    }
    for (double Y : {y0, y1}) {
      double d = r * r - (Y - disc->cy) * (Y - disc->cy);
      if (d >= 0.0) {
        double s = std::sqrt(d);
        push_angle(a, cx, cy, disc->cx + s, Y);
        push_angle(a, cx, cy, disc->cx - s, Y);
      }
    }
    double dx = disc->cx - cx, dy = disc->cy - cy;
    double dist = std::hypot(dx, dy);
    if (dist > r) {
      double phi = std::atan2(dy, dx), w = std::asin(r / dist);
      for (double t : {phi - w, phi + w}) {
        while (t > kPi) t -= 2 * kPi;
        while (t < -kPi) t += 2 * kPi;
        a.push_back(t);
      }
    }
  }
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end(), [](double u, double v) { return v - u < 1e-15; }),
          a.end());
  return a;
}

}  // namespace

double disc_rect_area(const Disc& d, double x0, double x1, double y0, double y1) {
  if (x1 <= x0 || y1 <= y0) return 0.0;
  if (d.cx - d.r >= x0 && d.cx + d.r <= x1 && d.cy - d.r >= y0 && d.cy + d.r <= y1)
    return kPi * d.r * d.r;
  double a0 = x0 - d.cx, a1 = x1 - d.cx, b0 = y0 - d.cy, b1 = y1 - d.cy;
  double v = signed_corner(d.r, a1, b1) - signed_corner(d.r, a0, b1) -
             signed_corner(d.r, a1, b0) + signed_corner(d.r, a0, b0);
  return std::max(0.0, v);
}

double power_integral_2d(double cx, double cy, double s, double x0, double x1, double y0,
                         double y1, const Disc* disc) {
  if (x1 <= x0 || y1 <= y0) return 0.0;
  const double e = s + 2.0;
  auto f = [&](double theta) {
    RaySpan sp = ray_span(cx, cy, theta, x0, x1, y0, y1, disc);
    if (sp.hi <= sp.lo) return 0.0;
    double lo = sp.lo > 0.0 ? std::pow(sp.lo, e) : 0.0;
    return (std::pow(sp.hi, e) - lo) / e;
  };
  std::vector<double> br = breakpoints(cx, cy, x0, x1, y0, y1, disc);
  // Tangent breakpoints carry square-root endpoint behaviour, which the
  // double-exponential rule absorbs without subdivision.
  thread_local boost::math::quadrature::tanh_sinh<double> rule(8);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < br.size(); ++i) {
    if (br[i + 1] - br[i] < 1e-15) continue;
    total += rule.integrate(f, br[i], br[i + 1], 1e-13);
  }
  return total;
}

bool distance_range_2d(double cx, double cy, double x0, double x1, double y0, double y1,
                       const Disc* disc, double& dmin, double& dmax) {
  auto inside = [&](double x, double y) {
    const double tol = 1e-12 * (1.0 + std::abs(x) + std::abs(y));
    if (x < x0 - tol || x > x1 + tol || y < y0 - tol || y > y1 + tol) return false;
    if (disc) {
      double dx = x - disc->cx, dy = y - disc->cy;
      return std::sqrt(dx * dx + dy * dy) <= disc->r * (1.0 + 1e-12);
    }
    return true;
  };
  std::vector<std::pair<double, double>> pts;
  for (double x : {x0, x1})
    for (double y : {y0, y1}) pts.emplace_back(x, y);
  // Projections of c onto each edge segment.
  pts.emplace_back(std::clamp(cx, x0, x1), y0);
  pts.emplace_back(std::clamp(cx, x0, x1), y1);
  pts.emplace_back(x0, std::clamp(cy, y0, y1));
  pts.emplace_back(x1, std::clamp(cy, y0, y1));
  pts.emplace_back(std::clamp(cx, x0, x1), std::clamp(cy, y0, y1));
  if (disc) {
    const double r = disc->r;
    double dx = cx - disc->cx, dy = cy - disc->cy, dist = std::hypot(dx, dy);
    if (dist > 0) {
      pts.emplace_back(disc->cx + r * dx / dist, disc->cy + r * dy / dist);
      pts.emplace_back(disc->cx - r * dx / dist, disc->cy - r * dy / dist);
    } else {
      pts.emplace_back(disc->cx + r, disc->cy);
    }
    for (double X : {x0, x1}) {
      double d = r * r - (X - disc->cx) * (X - disc->cx);
      if (d >= 0.0) {
        pts.emplace_back(X, disc->cy + std::sqrt(d));
        pts.emplace_back(X, disc->cy - std::sqrt(d));
      }
    }
    for (double Y : {y0, y1}) {
      double d = r * r - (Y - disc->cy) * (Y - disc->cy);
      if (d >= 0.0) {
        pts.emplace_back(disc->cx + std::sqrt(d), Y);
        pts.emplace_back(disc->cx - std::sqrt(d), Y);
      }
    }
  }
  bool any = false;
  dmin = std::numeric_limits<double>::infinity();
  dmax = 0.0;
  for (auto [x, y] : pts) {
    if (!inside(x, y)) continue;
    any = true;
    double d = std::hypot(x - cx, y - cy);
    dmin = std::min(dmin, d);
    dmax = std::max(dmax, d);
  }
  if (any && inside(cx, cy)) dmin = 0.0;
  return any;
}

}  // namespace wparab::detail
