#pragma once

#include <vector>

#include "wparab/fields.hpp"
#include "wparab/geometry.hpp"
#include "wparab/report.hpp"
#include "wparab/solver.hpp"
#include "wparab/weights.hpp"

namespace wparab {

/// 24 log-spaced radii from half a cell to the domain length.
std::vector<double> default_maximal_radii(const Grid1D& grid, int count = 24);

/// Maximal function over centered cylinders C_rho(z) = B_rho(x) x (t - h/2, t + h/2),
/// h = height(beta, x, rho), averaging |g| over the part of C inside the grid.
class MaximalOperator {
 public:
  MaximalOperator(const SpaceTimeField& g, const Weight& beta, std::vector<double> radii);

  double at(const SpaceTimePoint& z) const;
  /// M g at every cell center (x_{i+1/2}, t_k + tau/2).
  SpaceTimeField on_cells() const;
  /// sup |C_{5 rho} cap U| / |C_rho cap U| over cell centers and radii.
  double dilation_constant() const;
  const std::vector<double>& radii() const { return radii_; }

 private:
  double average(double x, double t, double rho, double h) const;
  double clipped_measure(double x, double t, double rho, double h) const;
  const std::vector<double>& center_heights(int i) const { return heights_[i]; }

  Grid1D grid_;
  Weight beta_;
  std::vector<double> radii_;
  RectIntegrator integ_;
  std::vector<std::vector<double>> heights_;  // per cell center, per radius
};

double maximal_function(const SpaceTimeField& g, const Weight& beta, const SpaceTimePoint& z,
                        const std::vector<double>& radii);

/// Measure of {M > s} counted over whole cells, from cell-center values.
double level_set_measure(const SpaceTimeField& M, double s);

AuditReport weak_1_1_audit(const SpaceTimeField& g, const Weight& beta,
                           const std::vector<double>& lambdas, const std::vector<double>& radii);

struct CenteredCylinder {
  SpaceTimePoint z;
  double rho = 0.0;
  double h = 0.0;  // full height; the time extent is (t - h/2, t + h/2)
};

CenteredCylinder centered_cylinder(const Weight& beta, const SpaceTimePoint& z, double rho);
/// Open cylinders are disjoint iff their spatial or time intervals do not overlap.
bool disjoint(const CenteredCylinder& a, const CenteredCylinder& b);

struct CoveringFamily {
  std::vector<CenteredCylinder> cylinders;
  std::vector<bool> selected;
  /// For each cylinder, a selected cylinder it meets with radius at least its own.
  std::vector<int> witness;
  std::vector<int> selected_indices() const;
};

/// Greedy selection by decreasing radius, ties broken by input index.
CoveringFamily vitali_select(const std::vector<CenteredCylinder>& family);

/// Checks disjointness, witnesses and that 5 rho dilations cover samples of every member.
AuditReport verify_covering(const CoveringFamily& fam, const Weight& beta, int samples_per_axis = 7);

struct LevelsetOptions {
  double K = 4.0;
  double q0 = 0.25;
  int m_max = 5;
  double delta_hat = 0.1;
  bool normalize = true;
  std::vector<double> radii;  // empty: default_maximal_radii
};

AuditReport levelset_decay_audit(const SolutionField& u, const SpaceTimeField& F,
                                 const Weight& beta, const LevelsetOptions& opt);

}  // namespace wparab
