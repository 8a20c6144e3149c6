#include "wparab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "wparab/error.hpp"

namespace wparab {

namespace {

constexpr char kMagic[8] = {'W', 'P', 'A', 'R', 'A', 'B', 'U', '1'};
constexpr std::uint32_t kEndianTag = 0x01020304u;
constexpr std::uint32_t kVersion = 1;

template <class T>
void put_le(std::ostream& os, T v) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  std::uint64_t bits = 0;
  std::memcpy(&bits, &v, sizeof(T));
  char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  os.write(buf, sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
  unsigned char buf[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(T)))
    fail(ErrorKind::IoError, "truncated solution dump");
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= std::uint64_t(buf[i]) << (8 * i);
  T v;
  std::memcpy(&v, &bits, sizeof(T));
  return v;
}

// Thomas algorithm for sub/diag/super, overwriting rhs with the solution.
void thomas(std::vector<double>& lo, std::vector<double>& d, std::vector<double>& up,
            std::vector<double>& rhs, int step) {
  const std::size_t n = d.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      const double m = lo[i] / d[i - 1];
      d[i] -= m * up[i - 1];
      rhs[i] -= m * rhs[i - 1];
    }
    if (!(std::abs(d[i]) > 1e-300) || !std::isfinite(d[i]))
      fail(ErrorKind::SingularSystem, "zero pivot at time step " + std::to_string(step));
  }
  rhs[n - 1] /= d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - up[i] * rhs[i + 1]) / d[i];
}

struct StepData {
  const std::vector<double>* beta;  // nodal masses
  std::vector<double> a;            // face coefficients, size nx
  std::vector<double> f;            // face fluxes, size nx
  double left = 0.0, right = 0.0;
};

// One implicit step; uold and unew hold all nodes.
void implicit_step(const Grid1D& g, const StepData& s, const std::vector<double>& uold,
                   std::vector<double>& unew, int step) {
  const int nx = g.nx;
  const double h = g.hx(), tau = g.tau();
  const int m = nx - 1;
  std::vector<double> lo(m), d(m), up(m), rhs(m);
  for (int j = 0; j < m; ++j) {
    const int i = j + 1;
    const double mass = (*s.beta)[i] * h / tau;
    const double aw = s.a[i - 1] / h, ae = s.a[i] / h;
    lo[j] = -aw;
    up[j] = -ae;
    d[j] = mass + aw + ae;
    rhs[j] = mass * uold[i] + (s.f[i] - s.f[i - 1]);
  }
  rhs[0] += s.a[0] / h * s.left;
  rhs[m - 1] += s.a[nx - 1] / h * s.right;
  thomas(lo, d, up, rhs, step);
  unew[0] = s.left;
  unew[nx] = s.right;
  for (int j = 0; j < m; ++j) unew[j + 1] = rhs[j];
}

}  // namespace

SolutionField::SolutionField(const Grid1D& grid, std::vector<double> beta_nodes)
    : grid_(grid), beta_(std::move(beta_nodes)) {
  grid_.validate();
  if (!beta_.empty() && static_cast<int>(beta_.size()) != grid_.nodes())
    fail(ErrorKind::InvalidInput, "beta node count mismatch");
  u_.assign(static_cast<std::size_t>(grid_.nt + 1) * grid_.nodes(), 0.0);
}

double SolutionField::cell_sq(int i, int level) const {
  const double a = at(i, level), b = at(i + 1, level);
  return (a * a + a * b + b * b) / 3.0;
}

SpaceTimeField SolutionField::gradient() const {
  SpaceTimeField g(grid_);
  for (int k = 0; k < grid_.nt; ++k)
    for (int i = 0; i < grid_.nx; ++i) g.at(i, k) = grad(i, k);
  return g;
}

SolutionField SolutionField::scaled(double c) const {
  SolutionField v = *this;
  for (double& x : v.u_) x *= c;
  return v;
}

void SolutionField::write_csv(const std::string& path) const {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) fail(ErrorKind::IoError, "cannot open " + path);
  std::fprintf(f, "x,t,u\n");
  for (int k = 0; k <= grid_.nt; ++k)
    for (int i = 0; i <= grid_.nx; ++i)
      std::fprintf(f, "%.17g,%.17g,%.17g\n", grid_.x(i), grid_.t(k), at(i, k));
  if (std::fclose(f) != 0) fail(ErrorKind::IoError, "cannot write " + path);
}

void SolutionField::write_binary(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorKind::IoError, "cannot open " + path);
  os.write(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(os, kEndianTag);
  put_le<std::uint32_t>(os, kVersion);
  put_le<std::uint64_t>(os, static_cast<std::uint64_t>(grid_.nodes()));
  put_le<std::uint64_t>(os, static_cast<std::uint64_t>(grid_.nt + 1));
  for (double v : {grid_.a, grid_.b, grid_.t0, grid_.t1, grid_.hx(), grid_.tau()})
    put_le<double>(os, v);
  put_le<std::uint32_t>(os, (dirichlet_left ? 1u : 0u) | (dirichlet_right ? 2u : 0u));
  put_le<std::uint32_t>(os, 0u);
  for (double v : u_) put_le<double>(os, v);
  if (!os) fail(ErrorKind::IoError, "cannot write " + path);
}

SolutionField SolutionField::read_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::IoError, "cannot open " + path);
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
    fail(ErrorKind::IoError, "not a solution dump: " + path);
  if (get_le<std::uint32_t>(is) != kEndianTag) fail(ErrorKind::IoError, "bad endianness tag");
  if (get_le<std::uint32_t>(is) != kVersion) fail(ErrorKind::IoError, "unsupported dump version");
  Grid1D g;
  const auto nodes = get_le<std::uint64_t>(is);
  const auto levels = get_le<std::uint64_t>(is);
  g.nx = static_cast<int>(nodes) - 1;
  g.nt = static_cast<int>(levels) - 1;
  g.a = get_le<double>(is);
  g.b = get_le<double>(is);
  g.t0 = get_le<double>(is);
  g.t1 = get_le<double>(is);
  get_le<double>(is);
  get_le<double>(is);
  const auto flags = get_le<std::uint32_t>(is);
  get_le<std::uint32_t>(is);
  SolutionField u(g, {});
  u.dirichlet_left = flags & 1u;
  u.dirichlet_right = flags & 2u;
  for (double& v : u.u_) v = get_le<double>(is);
  return u;
}

std::vector<double> nodal_beta(const Weight& beta, const Grid1D& grid) {
  if (beta.dim() != 1) fail(ErrorKind::InvalidInput, "the solver is one-dimensional");
  const double h = grid.hx();
  std::vector<double> b(grid.nodes());
  for (int i = 0; i <= grid.nx; ++i) {
    const double lo = std::max(grid.a, grid.x(i) - 0.5 * h);
    const double hi = std::min(grid.b, grid.x(i) + 0.5 * h);
    b[i] = beta.box_mass({lo}, {hi}).average();
    if (!(b[i] > 0.0) || !std::isfinite(b[i]))
      fail(ErrorKind::InvalidInput, "nodal beta mass must be positive and finite");
  }
  return b;
}

SolutionField solve_ivbp(const Weight& beta, const CoefficientField& A, const SpaceTimeField& F,
                         const Grid1D& grid, const std::vector<double>& initial) {
  grid.validate();
  if (A.dim() != 1) fail(ErrorKind::InvalidInput, "the solver is one-dimensional");
  const Grid1D& fg = F.grid();
  if (fg.nx != grid.nx || fg.nt != grid.nt || fg.a != grid.a || fg.b != grid.b ||
      fg.t0 != grid.t0 || fg.t1 != grid.t1)
    fail(ErrorKind::InvalidInput, "forcing grid does not match the solver grid");
  if (static_cast<int>(initial.size()) != grid.nodes())
    fail(ErrorKind::InvalidInput, "initial data must have one value per node");

  SolutionField u(grid, nodal_beta(beta, grid));
  for (int i = 1; i < grid.nx; ++i) u.at(i, 0) = initial[i];

  StepData s;
  s.beta = &u.beta_nodes();
  s.a.resize(grid.nx);
  s.f.resize(grid.nx);
  std::vector<double> uold(grid.nodes()), unew(grid.nodes());
  for (int i = 0; i <= grid.nx; ++i) uold[i] = u.at(i, 0);
  const double nu = A.nu();
  for (int k = 0; k < grid.nt; ++k) {
    const double t = grid.t(k + 1);
    for (int i = 0; i < grid.nx; ++i) {
      const double a = A.value({0.5 * (grid.x(i) + grid.x(i + 1))}, t)(0, 0);
      if (!(a >= nu * (1.0 - 1e-12) && a <= (1.0 + 1e-12) / nu))
        fail(ErrorKind::EllipticityViolation,
             "face coefficient outside [nu, 1/nu] at step " + std::to_string(k));
      s.a[i] = a;
      s.f[i] = F.at(i, k);
    }
    implicit_step(grid, s, uold, unew, k);
    for (int i = 0; i <= grid.nx; ++i) {
      if (!std::isfinite(unew[i]))
        fail(ErrorKind::SingularSystem, "non-finite value at time step " + std::to_string(k));
      u.at(i, k + 1) = unew[i];
    }
    std::swap(uold, unew);
  }
  return u;
}

SolutionField solve_ivbp(const Weight& beta, const CoefficientField& A, const SpaceTimeField& F,
                         const Grid1D& grid, const std::function<double(double)>& initial) {
  std::vector<double> u0(grid.nodes());
  for (int i = 0; i <= grid.nx; ++i) u0[i] = initial(grid.x(i));
  return solve_ivbp(beta, A, F, grid, u0);
}

SolutionField solve_frozen(const FrozenProblem& p) {
  const Grid1D& g = p.grid;
  g.validate();
  if (!(p.beta_bar > 0.0) || !std::isfinite(p.beta_bar))
    fail(ErrorKind::InvalidInput, "beta_bar must be positive");
  if (!p.a_bar || !p.initial || !p.left || !p.right)
    fail(ErrorKind::InvalidInput, "frozen problem is missing data");
  SolutionField v(g, std::vector<double>(g.nodes(), p.beta_bar));
  v.dirichlet_left = v.dirichlet_right = false;
  for (int i = 0; i <= g.nx; ++i) v.at(i, 0) = p.initial(g.x(i));

  StepData s;
  s.beta = &v.beta_nodes();
  s.f.assign(g.nx, 0.0);
  std::vector<double> uold(g.nodes()), unew(g.nodes());
  for (int i = 0; i <= g.nx; ++i) uold[i] = v.at(i, 0);
  for (int k = 0; k < g.nt; ++k) {
    const double t = g.t(k + 1);
    const double a = p.a_bar(t);
    if (!(a > 0.0) || !std::isfinite(a))
      fail(ErrorKind::EllipticityViolation, "frozen coefficient must be positive");
    s.a.assign(g.nx, a);
    s.left = p.left(t);
    s.right = p.right(t);
    implicit_step(g, s, uold, unew, k);
    for (int i = 0; i <= g.nx; ++i) v.at(i, k + 1) = unew[i];
    std::swap(uold, unew);
  }
  return v;
}

NodeCylinder node_cylinder(const Grid1D& g, double x_lo, double x_hi, double t_lo, double t_hi) {
  NodeCylinder c;
  c.i0 = std::clamp(static_cast<int>(std::lround((x_lo - g.a) / g.hx())), 0, g.nx);
  c.i1 = std::clamp(static_cast<int>(std::lround((x_hi - g.a) / g.hx())), 0, g.nx);
  c.k0 = std::clamp(static_cast<int>(std::lround((t_lo - g.t0) / g.tau())), 0, g.nt);
  c.k1 = std::clamp(static_cast<int>(std::lround((t_hi - g.t0) / g.tau())), 0, g.nt);
  if (c.i1 - c.i0 < 2 || c.k1 <= c.k0)
    fail(ErrorKind::EmptyRegion, "cylinder resolves to fewer than 3 nodes or no time step");
  return c;
}

FrozenProblem frozen_from(const SolutionField& u, const Weight& beta, const CoefficientField& A,
                          const SpaceTimePoint& z0, double r, const NodeCylinder& c,
                          int refine_x, int refine_t, bool half) {
  if (refine_x < 1 || refine_t < 1) fail(ErrorKind::InvalidInput, "refinement must be >= 1");
  const Grid1D& g = u.grid();
  FrozenProblem p;
  p.beta_bar = beta.ball_mass(z0.x, r).average();

  // Overlap weights of B_r(x0) with the coefficient cells.
  std::vector<std::pair<int, double>> cells;
  double wsum = 0.0;
  for (int cidx = 0; cidx < A.cell_count(); ++cidx) {
    const Box b = A.cell_box(cidx);
    const double w = std::max(0.0, std::min(b.hi[0], z0.x[0] + r) - std::max(b.lo[0], z0.x[0] - r));
    if (w > 0.0) {
      cells.emplace_back(cidx, w);
      wsum += w;
    }
  }
  if (!(wsum > 0.0)) fail(ErrorKind::EmptyRegion, "ball misses the coefficient grid");
  p.a_bar = [A, cells, wsum](double t) {
    const int k = A.slab_of(t);
    double s = 0.0;
    for (const auto& [cidx, w] : cells) s += w * A.at(cidx, k)(0, 0);
    return s / wsum;
  };

  p.grid.a = g.x(c.i0);
  p.grid.b = g.x(c.i1);
  p.grid.nx = (c.i1 - c.i0) * refine_x;
  p.grid.t0 = g.t(c.k0);
  p.grid.t1 = g.t(c.k1);
  p.grid.nt = (c.k1 - c.k0) * refine_t;

  const double hx = g.hx(), tau = g.tau();
  const auto up = std::make_shared<const SolutionField>(u);
  const int k0 = c.k0, k1 = c.k1, i0 = c.i0, i1 = c.i1;
  p.initial = [up, hx, i0, i1, k0, a = g.a](double x) {
    const SolutionField& u = *up;
    const double s = (x - a) / hx;
    const int i = std::clamp(static_cast<int>(std::floor(s)), i0, i1 - 1);
    const double f = s - i;
    return (1 - f) * u.at(i, k0) + f * u.at(i + 1, k0);
  };
  auto lateral = [up, tau, k0, k1, t0 = g.t0](int node) {
    return [up, tau, k0, k1, t0, node](double t) {
      const SolutionField& u = *up;
      const double s = (t - t0) / tau;
      const int k = std::clamp(static_cast<int>(std::floor(s)), k0, k1 - 1);
      const double f = std::clamp(s - k, 0.0, 1.0);
      return (1 - f) * u.at(node, k) + f * u.at(node, k + 1);
    };
  };
  p.left = lateral(i0);
  p.right = lateral(i1);
  if (half) {
    p.left = [](double) { return 0.0; };
    auto init = p.initial;
    const double xa = p.grid.a;
    p.initial = [init, xa](double x) { return x == xa ? 0.0 : init(x); };
  }
  return p;
}

double manufactured_exact(const Grid1D& g, double x, double t) {
  const double k = boost::math::constants::pi<double>() / (g.b - g.a);
  return std::sin(k * (x - g.a)) * std::exp(-t);
}

SpaceTimeField manufactured_forcing(const Weight& beta, const Grid1D& g) {
  const double k = boost::math::constants::pi<double>() / (g.b - g.a);
  thread_local boost::math::quadrature::tanh_sinh<double> rule;
  // G(x) = int_a^x beta(s) sin(k(s-a)) ds at the cell midpoints.
  auto piece = [&](double lo, double hi) {
    if (!(hi > lo)) return 0.0;
    auto f = [&](double s) { return beta.value({s}) * std::sin(k * (s - g.a)); };
    std::vector<double> br{lo};
    if (beta.kind() == WeightKind::Power && beta.center()[0] > lo && beta.center()[0] < hi)
      br.push_back(beta.center()[0]);
    br.push_back(hi);
    double total = 0.0;
    for (std::size_t j = 0; j + 1 < br.size(); ++j) total += rule.integrate(f, br[j], br[j + 1], 1e-13);
    return total;
  };
  std::vector<double> G(g.nx);
  double acc = 0.0, prev = g.a;
  for (int i = 0; i < g.nx; ++i) {
    const double xm = 0.5 * (g.x(i) + g.x(i + 1));
    acc += piece(prev, xm);
    G[i] = acc;
    prev = xm;
  }
  SpaceTimeField F(g);
  for (int kk = 0; kk < g.nt; ++kk) {
    const double e = std::exp(-g.t(kk + 1));
    for (int i = 0; i < g.nx; ++i) {
      const double xm = 0.5 * (g.x(i) + g.x(i + 1));
      F.at(i, kk) = e * (k * (1.0 - std::cos(k * (xm - g.a))) - G[i]);
    }
  }
  return F;
}

double l2_error(const SolutionField& u, const std::function<double(double, double)>& exact) {
  const Grid1D& g = u.grid();
  double s = 0.0;
  for (int k = 1; k <= g.nt; ++k)
    for (int i = 0; i <= g.nx; ++i) {
      const double e = u.at(i, k) - exact(g.x(i), g.t(k));
      const double w = (i == 0 || i == g.nx) ? 0.5 : 1.0;
      s += w * e * e;
    }
  return std::sqrt(s * g.hx() * g.tau());
}

}  // namespace wparab
