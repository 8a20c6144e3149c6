#include "wparab/oscillation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "region2d.hpp"
#include "wparab/error.hpp"

namespace wparab {

namespace {

double overlap(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

// Measure of B_r(x0) within cell and mask.
double ball_cell_measure(const Point& x0, double r, const Box& cell, const Box& mask) {
  Box c = cell;
  for (int i = 0; i < c.dim(); ++i) {
    c.lo[i] = std::max(c.lo[i], mask.lo[i]);
    c.hi[i] = std::min(c.hi[i], mask.hi[i]);
    if (!(c.hi[i] > c.lo[i])) return 0.0;
  }
  if (c.dim() == 1) return overlap(x0[0] - r, x0[0] + r, c.lo[0], c.hi[0]);
  if (c.dim() == 2)
    return detail::disc_rect_area({x0[0], x0[1], r}, c.lo[0], c.hi[0], c.lo[1], c.hi[1]);
  fail(ErrorKind::InvalidInput, "oscillation supports dimension 1 or 2");
}

std::vector<Point> lattice(const Box& mask, double spacing) {
  const int n = mask.dim();
  std::vector<std::vector<double>> axes(n);
  for (int i = 0; i < n; ++i) {
    const int m = std::max(0, static_cast<int>(std::floor((mask.hi[i] - mask.lo[i]) / spacing + 1e-9)));
    for (int j = 0; j <= m; ++j) axes[i].push_back(mask.lo[i] + spacing * j);
  }
  std::vector<Point> pts;
  if (n == 1) {
    for (double x : axes[0]) pts.push_back({x});
  } else {
    for (double x : axes[0])
      for (double y : axes[1]) pts.push_back({x, y});
  }
  return pts;
}

std::string describe(const Point& x, double t, double r) {
  std::ostringstream os;
  os.precision(17);
  os << "x=(";
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ") t=" << t << " r=" << r;
  return os.str();
}

}  // namespace

std::vector<double> OscillationConfig::default_radii(double r_min, double R0, int count) {
  if (!(r_min > 0.0 && r_min < R0) || count < 1)
    fail(ErrorKind::InvalidInput, "radius grid needs 0 < r_min < R0");
  std::vector<double> r(count);
  for (int k = 0; k < count; ++k) r[k] = r_min * std::pow(R0 / r_min, double(k) / count);
  return r;
}

void OscillationConfig::validate() const {
  if (!(R0 > 0.0 && R0 < 1.0)) fail(ErrorKind::InvalidInput, "R0 must lie in (0,1)");
  if (!(delta >= 0.0)) fail(ErrorKind::InvalidInput, "delta must be >= 0");
  if (spacing < 0.0) fail(ErrorKind::InvalidInput, "spacing must be >= 0");
  if (time_points < 1) fail(ErrorKind::InvalidInput, "time_points must be >= 1");
  for (double r : radii)
    if (!(r > 0.0 && r < R0)) fail(ErrorKind::InvalidInput, "radii must lie in (0, R0)");
}

double theta_beta_ms(const Weight& beta, const Point& x0, double r) {
  const Mass m1 = beta.ball_mass(x0, r);
  const Mass mm1 = beta.pow(-1.0).ball_mass(x0, r);
  // Expanding the square: (beta)_B (beta^{-1})_B - 1.
  return std::max(0.0, m1.average() * mm1.average() - 1.0);
}

double theta_A_ms(const CoefficientField& A, const Weight& beta, const SpaceTimePoint& z0,
                  double r, const Box& mask) {
  if (mask.dim() != A.dim()) fail(ErrorKind::InvalidInput, "mask dimension mismatch");
  const double h = height(beta, z0.x, r);
  const double t_lo = std::max(0.0, z0.t - h), t_hi = std::min(A.T(), z0.t);
  if (!(t_hi > t_lo)) fail(ErrorKind::EmptyRegion, "cylinder misses (0, T]");

  const int cells = A.cell_count();
  std::vector<double> w(cells);
  double wsum = 0.0;
  for (int c = 0; c < cells; ++c) {
    w[c] = ball_cell_measure(z0.x, r, A.cell_box(c), mask);
    wsum += w[c];
  }
  if (!(wsum > 0.0)) fail(ErrorKind::EmptyRegion, "ball misses the masked domain");

  double total = 0.0, tsum = 0.0;
  for (int k = A.slab_of(t_lo); k < A.slabs(); ++k) {
    const double ov = overlap(t_lo, t_hi, A.slab_lo(k), A.slab_hi(k));
    if (A.slab_lo(k) >= t_hi) break;
    if (ov <= 0.0) continue;
    Matrix mean = Matrix::Zero(A.dim(), A.dim());
    for (int c = 0; c < cells; ++c)
      if (w[c] > 0.0) mean += w[c] * A.at(c, k);
    mean /= wsum;
    double osc = 0.0;
    for (int c = 0; c < cells; ++c)
      if (w[c] > 0.0) osc += w[c] * (A.at(c, k) - mean).squaredNorm();
    total += ov * osc / wsum;
    tsum += ov;
  }
  if (!(tsum > 0.0)) fail(ErrorKind::EmptyRegion, "cylinder misses every time slab");
  return total / tsum;
}

double theta_A_ms(const CoefficientField& A, const Weight& beta, const SpaceTimePoint& z0,
                  double r) {
  return theta_A_ms(A, beta, z0, r, A.domain());
}

AuditReport oscillation_supremum(const CoefficientField& A, const Weight& beta,
                                 const OscillationConfig& cfg, const Box& mask) {
  cfg.validate();
  double cell = 0.0;
  for (int i = 0; i < A.dim(); ++i)
    cell = std::max(cell, (A.domain().hi[i] - A.domain().lo[i]) / A.shape()[i]);
  const double spacing = cfg.spacing > 0.0 ? cfg.spacing : cell;
  const std::vector<double> radii =
      cfg.radii.empty() ? OscillationConfig::default_radii(2.0 * cell, cfg.R0) : cfg.radii;
  const std::vector<Point> centers = lattice(mask, spacing);
  if (centers.empty()) fail(ErrorKind::InvalidInput, "empty center lattice");

  double supA = 0.0, supB = 0.0;
  std::string argA, argB;
  for (const Point& x0 : centers) {
    for (double r : radii) {
      const double tb = std::sqrt(theta_beta_ms(beta, x0, r));
      if (tb > supB) {
        supB = tb;
        argB = describe(x0, 0.0, r);
      }
      for (int j = 1; j <= cfg.time_points; ++j) {
        const double t0 = A.T() * j / cfg.time_points;
        const double ta = std::sqrt(theta_A_ms(A, beta, {x0, t0}, r, mask));
        if (ta > supA) {
          supA = ta;
          argA = describe(x0, t0, r);
        }
      }
    }
  }
  const double sum = supA + supB;
  AuditReport rep;
  rep.name = "oscillation";
  rep.anchor = "smallness of the partial mean oscillation of A and the weighted mean oscillation of beta";
  rep.values["theta_A"] = supA;
  rep.values["theta_beta"] = supB;
  rep.values["sum"] = sum;
  rep.values["delta"] = cfg.delta;
  rep.values["R0"] = cfg.R0;
  rep.values["centers"] = static_cast<double>(centers.size());
  rep.values["radii"] = static_cast<double>(radii.size());
  rep.values["time_points"] = cfg.time_points;
  if (!argA.empty()) rep.notes["theta_A_argmax"] = argA;
  if (!argB.empty()) rep.notes["theta_beta_argmax"] = argB;
  rep.notes["gate"] = "Theta_A + Theta_beta < delta";
  const bool ok = sum < cfg.delta || sum == 0.0;
  rep.add_row({"Theta_A + Theta_beta < delta", sum, cfg.delta,
               cfg.delta > 0.0 ? sum / cfg.delta : sum, 1.0, ok});
  return rep;
}

AuditReport oscillation_supremum(const CoefficientField& A, const Weight& beta,
                                 const OscillationConfig& cfg) {
  return oscillation_supremum(A, beta, cfg, A.domain());
}

}  // namespace wparab
