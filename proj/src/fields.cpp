#include "wparab/fields.hpp"

#include <algorithm>
#include <cmath>

#include "wparab/error.hpp"

namespace wparab {

void Grid1D::validate() const {
  if (!(b > a)) fail(ErrorKind::InvalidInput, "grid needs b > a");
  if (!(t1 > t0)) fail(ErrorKind::InvalidInput, "grid needs t1 > t0");
  if (nx < 2) fail(ErrorKind::InvalidInput, "grid needs at least 3 nodes");
  if (nt < 1) fail(ErrorKind::InvalidInput, "grid needs at least one time step");
}

SpaceTimeField::SpaceTimeField(const Grid1D& grid, double value) : grid_(grid) {
  grid_.validate();
  v_.assign(static_cast<std::size_t>(grid_.nx) * grid_.nt, value);
}

SpaceTimeField SpaceTimeField::sample(const Grid1D& grid,
                                      const std::function<double(double, double)>& f) {
  SpaceTimeField F(grid);
  for (int k = 0; k < grid.nt; ++k) {
    const double t = grid.t(k + 1);
    for (int i = 0; i < grid.nx; ++i) F.at(i, k) = f(0.5 * (grid.x(i) + grid.x(i + 1)), t);
  }
  return F;
}

SpaceTimeField SpaceTimeField::abs() const {
  SpaceTimeField g = *this;
  for (double& v : g.v_) v = std::abs(v);
  return g;
}

SpaceTimeField SpaceTimeField::squared() const {
  SpaceTimeField g = *this;
  for (double& v : g.v_) v = v * v;
  return g;
}

SpaceTimeField SpaceTimeField::scaled(double c) const {
  SpaceTimeField g = *this;
  for (double& v : g.v_) v *= c;
  return g;
}

double SpaceTimeField::integral() const {
  double s = 0.0;
  for (double v : v_) s += v;
  return s * grid_.hx() * grid_.tau();
}

double SpaceTimeField::lp_norm(double p) const {
  double s = 0.0;
  for (double v : v_) s += std::pow(std::abs(v), p);
  return std::pow(s * grid_.hx() * grid_.tau(), 1.0 / p);
}

RectIntegrator::RectIntegrator(const SpaceTimeField& f) : grid_(f.grid()) {
  const int nx = grid_.nx, nt = grid_.nt;
  const long double cell = static_cast<long double>(grid_.hx()) * grid_.tau();
  P_.assign(static_cast<std::size_t>(nt + 1) * (nx + 1), 0.0L);
  for (int k = 0; k < nt; ++k) {
    long double row = 0.0L;
    for (int i = 0; i < nx; ++i) {
      row += f.at(i, k) * cell;
      P_[(k + 1) * (nx + 1) + i + 1] = P_[k * (nx + 1) + i + 1] + row;
    }
  }
}

long double RectIntegrator::prefix(double x, double t) const {
  // The prefix function is bilinear inside each cell because the field is constant there.
  const double u = std::clamp((x - grid_.a) / grid_.hx(), 0.0, double(grid_.nx));
  const double v = std::clamp((t - grid_.t0) / grid_.tau(), 0.0, double(grid_.nt));
  const int i = std::min(static_cast<int>(u), grid_.nx - 1);
  const int k = std::min(static_cast<int>(v), grid_.nt - 1);
  const long double fu = u - i, fv = v - k;
  const int w = grid_.nx + 1;
  const long double p00 = P_[k * w + i], p10 = P_[k * w + i + 1];
  const long double p01 = P_[(k + 1) * w + i], p11 = P_[(k + 1) * w + i + 1];
  return (1 - fu) * (1 - fv) * p00 + fu * (1 - fv) * p10 + (1 - fu) * fv * p01 + fu * fv * p11;
}

double RectIntegrator::integral(double x0, double x1, double s0, double s1) const {
  if (!(x1 > x0) || !(s1 > s0)) return 0.0;
  return static_cast<double>(prefix(x1, s1) - prefix(x0, s1) - prefix(x1, s0) + prefix(x0, s0));
}

}  // namespace wparab
