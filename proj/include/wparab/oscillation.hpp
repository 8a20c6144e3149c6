#pragma once

#include <vector>

#include "wparab/coefficients.hpp"
#include "wparab/geometry.hpp"
#include "wparab/report.hpp"
#include "wparab/weights.hpp"

namespace wparab {

struct OscillationConfig {
  double R0 = 0.5;
  double delta = 0.1;
  /// Spacing of the center lattice; 0 picks the coefficient cell width.
  double spacing = 0.0;
  /// Radius grid in (0, R0); empty picks 24 log-spaced radii from two cells to R0.
  std::vector<double> radii;
  /// Number of center times, evenly spread over the slab ends.
  int time_points = 8;

  static std::vector<double> default_radii(double r_min, double R0, int count = 24);
  void validate() const;
};

/// (1/beta(B)) int_B |beta - (beta)_B|^2 beta^{-1} dx on B = B_r(x0) within the domain.
double theta_beta_ms(const Weight& beta, const Point& x0, double r);

/// Mean over Q_{r,beta}(z0) within mask x (0,T] of |A - (A)_{B_r(x0) within mask}(t)|^2.
double theta_A_ms(const CoefficientField& A, const Weight& beta, const SpaceTimePoint& z0,
                  double r, const Box& mask);
double theta_A_ms(const CoefficientField& A, const Weight& beta, const SpaceTimePoint& z0,
                  double r);

/// Sup of sqrt(theta_A_ms) and sqrt(theta_beta_ms) over the center lattice and radius grid.
AuditReport oscillation_supremum(const CoefficientField& A, const Weight& beta,
                                 const OscillationConfig& cfg, const Box& mask);
AuditReport oscillation_supremum(const CoefficientField& A, const Weight& beta,
                                 const OscillationConfig& cfg);

}  // namespace wparab
