#include "wparab/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wparab/error.hpp"

namespace wparab {

namespace {

void check_grid(const Box& domain, const std::vector<int>& shape, double T, int slabs,
                double nu) {
  if (domain.dim() < 1 || static_cast<int>(shape.size()) != domain.dim())
    fail(ErrorKind::InvalidInput, "coefficient grid shape does not match the domain");
  for (int i = 0; i < domain.dim(); ++i) {
    if (shape[i] < 1) fail(ErrorKind::InvalidInput, "coefficient grid needs >= 1 cell per axis");
    if (!(domain.hi[i] > domain.lo[i])) fail(ErrorKind::InvalidInput, "empty coefficient domain");
  }
  if (!(T > 0.0) || slabs < 1) fail(ErrorKind::InvalidInput, "coefficient time grid is empty");
  if (!(nu > 0.0 && nu <= 1.0)) fail(ErrorKind::InvalidInput, "nu must lie in (0, 1]");
}

}  // namespace

CoefficientField CoefficientField::from_values(Box domain, std::vector<int> shape, double T,
                                               int slabs, std::vector<Matrix> values, double nu) {
  check_grid(domain, shape, T, slabs, nu);
  CoefficientField A;
  A.domain_ = std::move(domain);
  A.shape_ = std::move(shape);
  A.T_ = T;
  A.slabs_ = slabs;
  A.nu_ = nu;
  if (static_cast<int>(values.size()) != A.cell_count() * slabs)
    fail(ErrorKind::InvalidInput, "coefficient value count does not match the grid");
  const int n = A.dim();
  for (const Matrix& m : values)
    if (m.rows() != n || m.cols() != n)
      fail(ErrorKind::InvalidInput, "coefficient matrices must be n x n");
  A.values_ = std::move(values);
  A.validate();
  return A;
}

CoefficientField CoefficientField::sample(Box domain, std::vector<int> shape, double T, int slabs,
                                          const std::function<Matrix(const Point&, double)>& f,
                                          double nu) {
  check_grid(domain, shape, T, slabs, nu);
  int cells = 1;
  for (int s : shape) cells *= s;
  std::vector<Matrix> values;
  values.reserve(static_cast<std::size_t>(cells) * slabs);
  const int n = domain.dim();
  for (int k = 0; k < slabs; ++k) {
    const double t = T * (k + 0.5) / slabs;
    for (int c = 0; c < cells; ++c) {
      Point x(n);
      int rem = c;
      for (int i = n - 1; i >= 0; --i) {
        const int j = rem % shape[i];
        rem /= shape[i];
        x[i] = domain.lo[i] + (domain.hi[i] - domain.lo[i]) * (j + 0.5) / shape[i];
      }
      values.push_back(f(x, t));
    }
  }
  return from_values(std::move(domain), std::move(shape), T, slabs, std::move(values), nu);
}

CoefficientField CoefficientField::constant(Box domain, std::vector<int> shape, double T,
                                            int slabs, const Matrix& A, double nu) {
  return sample(std::move(domain), std::move(shape), T, slabs,
                [&](const Point&, double) { return A; }, nu);
}

int CoefficientField::cell_count() const {
  int c = 1;
  for (int s : shape_) c *= s;
  return c;
}

Box CoefficientField::cell_box(int flat) const {
  const int n = dim();
  Box b{Point(n), Point(n)};
  for (int i = n - 1; i >= 0; --i) {
    const int j = flat % shape_[i];
    flat /= shape_[i];
    const double w = (domain_.hi[i] - domain_.lo[i]) / shape_[i];
    b.lo[i] = domain_.lo[i] + w * j;
    b.hi[i] = domain_.lo[i] + w * (j + 1);
  }
  return b;
}

int CoefficientField::cell_of(const Point& x) const {
  int flat = 0;
  for (int i = 0; i < dim(); ++i) {
    const double u = (x[i] - domain_.lo[i]) / (domain_.hi[i] - domain_.lo[i]) * shape_[i];
    const int j = std::clamp(static_cast<int>(std::floor(u)), 0, shape_[i] - 1);
    flat = flat * shape_[i] + j;
  }
  return flat;
}

int CoefficientField::slab_of(double t) const {
  const double u = t / T_ * slabs_;
  const int k = static_cast<int>(std::ceil(u)) - 1;
  return std::clamp(k, 0, slabs_ - 1);
}

bool CoefficientField::elliptic(const Matrix& A, double nu, double tol) {
  if (!A.allFinite()) return false;
  const Matrix S = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < nu * (1.0 - tol)) return false;
  Eigen::JacobiSVD<Matrix> svd(A);
  return svd.singularValues()(0) <= (1.0 / nu) * (1.0 + tol);
}

void CoefficientField::validate(double tol) const {
  for (int k = 0; k < slabs_; ++k)
    for (int c = 0; c < cell_count(); ++c)
      if (!elliptic(at(c, k), nu_, tol)) {
        std::ostringstream os;
        os << "coefficient at cell " << c << ", slab " << k << " violates ellipticity with nu = "
           << nu_;
        fail(ErrorKind::EllipticityViolation, os.str());
      }
}

}  // namespace wparab
