#pragma once

#include <vector>

#include "wparab/coefficients.hpp"
#include "wparab/report.hpp"
#include "wparab/weights.hpp"

namespace wparab {

enum class ChartKind { Affine, Bump };

/// Graph chart x^n = phi(x') in two dimensions with |phi'| <= delta < 1.
class BoundaryChart {
 public:
  static BoundaryChart flat();
  /// phi(s) = delta (s - base)
  static BoundaryChart affine(double delta, double base = 0.0);
  /// phi(s) = delta w (1 - cos((s - base) / w)); phi(base) = phi'(base) = 0.
  static BoundaryChart bump(double delta, double base = 0.0, double width = 0.25);

  ChartKind kind() const { return kind_; }
  double delta() const { return delta_; }
  double base() const { return base_; }
  double width() const { return width_; }
  double phi(double s) const;
  double dphi(double s) const;
  BoundaryChart with_delta(double delta) const;

 private:
  BoundaryChart(ChartKind kind, double delta, double base, double width);
  ChartKind kind_;
  double delta_, base_, width_;
};

/// Phi(x', x^n) = (x', x^n - phi(x')).
Point phi_map(const BoundaryChart& c, const Point& x);
Point phi_inverse(const BoundaryChart& c, const Point& y);
/// Jacobian of Phi at x.
Matrix phi_jacobian(const BoundaryChart& c, const Point& x);

/// B_{r/2}(Phi^{-1}(y0)) within Phi^{-1}(B_r(y0)) within B_{2r}(Phi^{-1}(y0)) on a sample lattice.
AuditReport inclusion_audit(const BoundaryChart& c, const Point& y0, double r, int samples = 33);

/// First radius rho on a decreasing grid with Phi^{-1}(B^+_{2 Lambda rho}(y0)) inside B_R(Phi^{-1}(y0)).
AuditReport rho_search(const BoundaryChart& c, const Point& y0, double R, double Lambda,
                       const std::vector<double>& radii, int samples = 33);

/// B = grad Phi A grad Phi^T - A written out entrywise for a 2x2 A and slope dphi.
Matrix flattening_B(const Matrix& A, double dphi);

struct Pushforward {
  CoefficientField A_tilde;
  double B_norm = 0.0;  // max entry of B over cells and slabs
  AuditReport report;
};

/// A~(y,t) = grad Phi A(Phi^{-1}(y), t) grad Phi^T on the cell grid of A.
Pushforward pushforward_coefficients(const BoundaryChart& c, const CoefficientField& A);

/// beta~(y) = beta(Phi^{-1}(y)) as 3x3 Gauss cell averages on the domain of beta.
Weight pushforward_weight(const BoundaryChart& c, const Weight& beta, std::vector<int> shape);

AuditReport pushforward_weight_audit(const BoundaryChart& c, const Weight& beta,
                                     const WeightContext& ctx, const BallFamily& fam,
                                     std::vector<int> shape = {48, 48});

struct DeltaSweepOptions {
  std::vector<double> deltas{0.05, 0.1, 0.2};
  /// beta_delta = |x - center|^{alpha_per_delta * delta}: the weight's oscillation shrinks with delta.
  Point weight_center{0.1, 0.05};
  double alpha_per_delta = 1.0;
  std::vector<int> shape{48, 48};
  double B_exponent_min = 0.9;
  double oscillation_exponent_min = 1.8;
};

/// ||B|| and sup Theta_beta~ over a delta grid, with log-log exponent fits.
AuditReport flattening_delta_sweep(const BoundaryChart& shape, const CoefficientField& A,
                                   const BallFamily& fam, const DeltaSweepOptions& opt = {});

}  // namespace wparab
