#pragma once

#include <cstdint>
#include <optional>

#include "wparab/report.hpp"
#include "wparab/weights.hpp"

namespace wparab {

struct SpaceTimePoint {
  Point x;
  double t = 0.0;
};

enum class CylinderKind { Backward, Centered, Half };

/// Q (backward), C (centered) or Q+ (backward, restricted to x_n >= flat).
struct WeightedCylinder {
  SpaceTimePoint z0;
  double r = 0.0;
  CylinderKind kind = CylinderKind::Backward;
  double h = 0.0;
  double flat = 0.0;

  static WeightedCylinder make(const Weight& beta, SpaceTimePoint z0, double r,
                               CylinderKind kind = CylinderKind::Backward, double flat = 0.0);
  double t_lo() const;
  double t_hi() const;
  /// Closed membership test.
  bool contains(const SpaceTimePoint& z, double rel_tol = 0.0) const;
};

double psi(const Weight& beta, const Point& x0, double r);
double height(const Weight& beta, const Point& x0, double r);
/// Largest radius whose ball stays inside the weight's domain.
double domain_radius(const Weight& beta, const Point& x0);
double height_inverse(const Weight& beta, const Point& x0, double s);
double quasi_distance(const Weight& beta, const SpaceTimePoint& z, const SpaceTimePoint& z0);

struct QuasiMetricParams {
  double Lambda = 2.0;
  double zeta0 = 0.5;
  double N2 = 1.0;

  static double formula(double zeta0, double N2, int n);
  static QuasiMetricParams from_constants(double zeta0, double N2, int n);
  /// Estimates (zeta0, N2) from the lifted weight on the default family.
  static QuasiMetricParams estimate(const Weight& beta, const WeightContext& ctx);
};

struct TriangleSampling {
  Box space;
  double t_lo = 0.0;
  double t_hi = 1.0;
  static TriangleSampling default_for(const Weight& beta);
};

AuditReport quasi_triangle_audit(const Weight& beta, const QuasiMetricParams& params,
                                 std::int64_t samples, std::uint64_t seed,
                                 std::optional<TriangleSampling> sampling = std::nullopt);

AuditReport cylinder_relations_audit(const Weight& beta, const SpaceTimePoint& z0, double r,
                                     int lattice = 100);

}  // namespace wparab
