#pragma once

#include <functional>
#include <vector>

namespace wparab {

/// Uniform space-time grid on [a,b] x [t0,t1] with nx cells and nt steps.
struct Grid1D {
  double a = 0.0;
  double b = 1.0;
  int nx = 64;
  double t0 = 0.0;
  double t1 = 1.0;
  int nt = 64;

  double hx() const { return (b - a) / nx; }
  double tau() const { return (t1 - t0) / nt; }
  double x(int i) const { return a + (b - a) * i / nx; }
  double t(int k) const { return t0 + (t1 - t0) * k / nt; }
  int nodes() const { return nx + 1; }
  void validate() const;
};

/// Scalar field that is constant on each (cell i, slab k) of a Grid1D.
/// Slab k is the time interval (t_k, t_{k+1}].
class SpaceTimeField {
 public:
  SpaceTimeField() = default;
  explicit SpaceTimeField(const Grid1D& grid, double value = 0.0);
  /// Samples f at the cell midpoint and the slab's upper time.
  static SpaceTimeField sample(const Grid1D& grid, const std::function<double(double, double)>& f);

  const Grid1D& grid() const { return grid_; }
  double at(int i, int k) const { return v_[static_cast<std::size_t>(k) * grid_.nx + i]; }
  double& at(int i, int k) { return v_[static_cast<std::size_t>(k) * grid_.nx + i]; }
  const std::vector<double>& values() const { return v_; }
  std::vector<double>& values() { return v_; }

  SpaceTimeField abs() const;
  SpaceTimeField squared() const;
  SpaceTimeField scaled(double c) const;
  double integral() const;
  double lp_norm(double p) const;

 private:
  Grid1D grid_;
  std::vector<double> v_;
};

/// Exact integrals of a piecewise constant field over space-time rectangles.
class RectIntegrator {
 public:
  explicit RectIntegrator(const SpaceTimeField& f);
  /// Integral over [x0,x1] x [s0,s1] clipped to the grid.
  double integral(double x0, double x1, double s0, double s1) const;

 private:
  long double prefix(double x, double t) const;
  Grid1D grid_;
  std::vector<long double> P_;  // (nt+1) x (nx+1) corner prefix sums
};

}  // namespace wparab
