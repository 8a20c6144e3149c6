#pragma once

#include <vector>

namespace wparab::detail {

struct Disc {
  double cx;
  double cy;
  double r;
};

/// Area of a disc intersected with [x0,x1] x [y0,y1].
double disc_rect_area(const Disc& d, double x0, double x1, double y0, double y1);

/// Integral of |x - c|^s over [x0,x1] x [y0,y1] (intersected with the disc when given).
/// Radial integration is exact; the angular integral is split at every
/// angle where the active boundary changes and done by Gauss-Kronrod.
double power_integral_2d(double cx, double cy, double s, double x0, double x1, double y0,
                         double y1, const Disc* disc);

/// Smallest and largest distance from c to the convex region box (intersected with disc).
/// Returns false when the region is empty.
bool distance_range_2d(double cx, double cy, double x0, double x1, double y0, double y1,
                       const Disc* disc, double& dmin, double& dmax);

}  // namespace wparab::detail
