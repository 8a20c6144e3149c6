#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "wparab/report.hpp"

namespace wparab {

using Point = std::vector<double>;

struct Box {
  Point lo;
  Point hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Point& x) const;
  double measure() const;
  double diameter() const;
};

Box interval(double a, double b);
Box rectangle(double x0, double x1, double y0, double y1);

enum class WeightKind { Power, Sampled };
enum class Quadrature { Midpoint, Trapezoid, Analytic };

struct Mass {
  double integral = 0.0;
  double measure = 0.0;
  double average() const { return integral / measure; }
};

/// Non-negative spatial weight on a box in R^1 or R^2.
///
/// Power weights are scale * |x - c|^alpha and are integrated in closed form
/// (radially in 2D).  Sampled weights are piecewise constant on a uniform cell
/// grid.  Both carry an exponent so that w^p can be formed without resampling.
class Weight {
 public:
  static Weight power(Box domain, Point center, double alpha, double scale = 1.0);
  static Weight constant(Box domain, double value = 1.0);
  /// Midpoint: one value per cell.  Trapezoid: one value per node, shape[i]+1 per axis.
  static Weight sampled(Box domain, std::vector<int> shape, std::vector<double> values,
                        Quadrature rule = Quadrature::Midpoint);
  static Weight sample(Box domain, std::vector<int> shape,
                       const std::function<double(const Point&)>& f,
                       Quadrature rule = Quadrature::Midpoint);

  WeightKind kind() const { return kind_; }
  Quadrature quadrature() const { return rule_; }
  int dim() const { return domain_.dim(); }
  const Box& domain() const { return domain_; }
  const Point& center() const { return center_; }
  double alpha() const { return alpha_; }
  double exponent() const { return exponent_; }
  double scale() const { return scale_; }
  const std::vector<int>& shape() const { return shape_; }

  /// Effective power of |x - c| after exponentiation (power kind).
  double effective_alpha() const { return alpha_ * exponent_; }

  Weight pow(double p) const;
  Weight scaled(double c) const;

  bool integrable() const;
  void require_integrable() const;

  double value(const Point& x) const;
  Mass ball_mass(const Point& x0, double r) const;
  Mass box_mass(const Point& lo, const Point& hi) const;
  /// Essential supremum over B_r(x0) intersected with the domain.
  double ess_sup(const Point& x0, double r) const;

  int cell_count() const;
  Box cell_box(int flat) const;
  double cell_value(int flat) const;

 private:
  Weight() = default;
  double cell_value_(const std::vector<int>& idx) const;

  WeightKind kind_ = WeightKind::Power;
  Quadrature rule_ = Quadrature::Analytic;
  Box domain_;
  Point center_;
  double alpha_ = 0.0;
  double scale_ = 1.0;
  double exponent_ = 1.0;
  std::vector<int> shape_;
  std::shared_ptr<const std::vector<double>> samples_;
  bool has_zero_ = false;
};

/// Mean of w^p over B_r(x0) intersected with the domain.
double ball_average(const Weight& w, const Point& x0, double r, double p);

struct BallFamily {
  std::vector<Point> centers;
  std::vector<double> radii;

  std::size_t size() const { return centers.size() * radii.size(); }

  static std::vector<double> log_radii(double r_min, double r_max, int count);
  /// Grid-node centers (nodes_per_axis per axis) plus the weight's singular
  /// center when it lies in the domain, with 32 log-spaced radii.
  static BallFamily default_for(const Weight& w, int nodes_per_axis = 33, int radii = 32);
  static BallFamily centered(const Point& c, std::vector<double> radii);
};

struct WeightContext {
  int n = 1;
  double M0 = 1.0;
  int n0() const { return n < 2 ? 2 : n; }
};

double aq_ball_quantity(const Weight& w, double q, const Point& x0, double r);
double aq_characteristic(const Weight& w, double q, const BallFamily& fam);

AuditReport check_beta_condition(const Weight& beta, const WeightContext& ctx,
                                 const BallFamily& fam, double tol_quad = 1e-6);

std::vector<double> geometric_gamma_grid(double gamma_max, int levels = 12);
/// Largest candidate gamma with ((w^{1+gamma})_B)^{1/(1+gamma)} <= budget (w)_B on every ball.
double reverse_holder_gamma(const Weight& w, const BallFamily& fam, double budget,
                            const std::vector<double>& candidates);
double reverse_holder_gamma(const Weight& w, const BallFamily& fam, double budget);

struct PropertyConstants {
  double zeta0 = 1.0;
  double N2 = 1.0;
};

/// Fits (zeta0, N2) for wbar(S1) <= N2 (|S1|/|S2|)^zeta0 wbar(S2) on nested test pairs,
/// choosing zeta0 to minimize the quasi-triangle constant it implies.
PropertyConstants estimate_property_constants(const Weight& wbar, const BallFamily& fam);

double doubling_eta(double theta, double M0, int n0);

AuditReport doubling_report(const Weight& w, double p, const BallFamily& fam, double theta,
                            const WeightContext& ctx);

}  // namespace wparab
