#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "wparab/coefficients.hpp"
#include "wparab/fields.hpp"
#include "wparab/geometry.hpp"
#include "wparab/report.hpp"
#include "wparab/weights.hpp"

namespace wparab {

/// Nodal values u(x_i, t_k) on a Grid1D, stored level by level.
class SolutionField {
 public:
  SolutionField() = default;
  SolutionField(const Grid1D& grid, std::vector<double> beta_nodes);

  const Grid1D& grid() const { return grid_; }
  double at(int i, int k) const { return u_[static_cast<std::size_t>(k) * grid_.nodes() + i]; }
  double& at(int i, int k) { return u_[static_cast<std::size_t>(k) * grid_.nodes() + i]; }
  const std::vector<double>& values() const { return u_; }
  /// Dual-cell averages of beta used as nodal masses.
  const std::vector<double>& beta_nodes() const { return beta_; }

  bool dirichlet_left = true;
  bool dirichlet_right = true;

  /// Difference quotient on cell i during slab k, taken at level k+1.
  double grad(int i, int k) const { return (at(i + 1, k + 1) - at(i, k + 1)) / grid_.hx(); }
  /// Mean of u on cell i at a time level, for the piecewise linear interpolant.
  double cell_mean(int i, int level) const { return 0.5 * (at(i, level) + at(i + 1, level)); }
  /// Mean of u^2 on cell i at a time level, for the piecewise linear interpolant.
  double cell_sq(int i, int level) const;

  SpaceTimeField gradient() const;
  SolutionField scaled(double c) const;

  void write_csv(const std::string& path) const;
  /// Little-endian dump: magic, endianness tag, dims, spacings, then level-major values.
  void write_binary(const std::string& path) const;
  static SolutionField read_binary(const std::string& path);

 private:
  Grid1D grid_;
  std::vector<double> u_;
  std::vector<double> beta_;
};

std::vector<double> nodal_beta(const Weight& beta, const Grid1D& grid);

/// Implicit Euler for beta u_t - (a u_x)_x = F_x with zero lateral Dirichlet data.
SolutionField solve_ivbp(const Weight& beta, const CoefficientField& A, const SpaceTimeField& F,
                         const Grid1D& grid, const std::vector<double>& initial);
SolutionField solve_ivbp(const Weight& beta, const CoefficientField& A, const SpaceTimeField& F,
                         const Grid1D& grid, const std::function<double(double)>& initial);

/// Constant-in-space problem beta_bar v_t - (a_bar(t) v_x)_x = 0 with Dirichlet data.
struct FrozenProblem {
  double beta_bar = 1.0;
  std::function<double(double)> a_bar;
  Grid1D grid;
  std::function<double(double)> initial;
  std::function<double(double)> left;
  std::function<double(double)> right;
};

SolutionField solve_frozen(const FrozenProblem& problem);

/// Node-aligned cylinder of a coarse grid: nodes i0..i1, levels k0..k1.
struct NodeCylinder {
  int i0 = 0, i1 = 0, k0 = 0, k1 = 0;
};

NodeCylinder node_cylinder(const Grid1D& grid, double x_lo, double x_hi, double t_lo, double t_hi);

/// Frozen problem on a node-aligned cylinder with data interpolated from u.
/// beta_bar and a_bar are the ball averages over B_r(x0); `half` pins v = 0 on the left edge.
FrozenProblem frozen_from(const SolutionField& u, const Weight& beta, const CoefficientField& A,
                          const SpaceTimePoint& z0, double r, const NodeCylinder& cyl,
                          int refine_x, int refine_t, bool half = false);

struct NormReport {
  double p = 2.0;
  double u_lp = 0.0;
  double grad_lp = 0.0;
  double proxy_lp = 0.0;  // ||A u_x + F||_{L^p}
  double forcing_lp = 0.0;
  double u_l2_beta = 0.0;
  double sup_energy = 0.0;  // sup_t int u^2 beta dx
  std::map<std::string, double> as_values() const;
};

NormReport compute_norms(const SolutionField& u, const CoefficientField& A, const SpaceTimeField& F,
                         double p);

AuditReport energy_audit(const SolutionField& u, const SpaceTimeField& F, const Weight& beta,
                         const SpaceTimePoint& z0, double r, double budget,
                         double basic_budget);

enum class PoincareVariant { Interior, Boundary };

AuditReport poincare_audit(const SolutionField& u, const SpaceTimeField& F, const Weight& beta,
                           const SpaceTimePoint& z0, double r, PoincareVariant variant,
                           double budget);

AuditReport lipschitz_audit(const SolutionField& v, double beta_bar, const Weight& beta,
                            const SpaceTimePoint& z0, double r, double budget);

struct FreezeOptions {
  int refine_x = 2;
  int refine_t = 4;
  double epsilon_budget = 1.0;
  bool half = false;
};

AuditReport freeze_compare(const SolutionField& u, const Weight& beta, const CoefficientField& A,
                           const SpaceTimeField& F, const SpaceTimePoint& z0, double R,
                           const FreezeOptions& opt = {});

AuditReport apriori_ratio(const SolutionField& u, const CoefficientField& A,
                          const SpaceTimeField& F, double p, double budget);

AuditReport time_shift_audit(const SolutionField& u, const CoefficientField& A,
                             const SpaceTimeField& F, const std::function<double(double)>& phi,
                             int shift_steps, double budget);

/// Manufactured solution sin(k(x-a)) e^{-t}, k = pi/(b-a).
double manufactured_exact(const Grid1D& grid, double x, double t);
/// Flux F with F_x = beta u*_t - u*_xx for unit diffusion, sampled like SpaceTimeField::sample.
SpaceTimeField manufactured_forcing(const Weight& beta, const Grid1D& grid);
/// Space-time L^2 error at the nodes against an exact solution.
double l2_error(const SolutionField& u, const std::function<double(double, double)>& exact);

}  // namespace wparab
