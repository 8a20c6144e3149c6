#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "wparab/weights.hpp"

namespace wparab {

using Matrix = Eigen::MatrixXd;

/// Matrix field A(x,t), piecewise constant on a uniform cell grid in space
/// times uniform slabs of (0, T].
class CoefficientField {
 public:
  static CoefficientField sample(Box domain, std::vector<int> shape, double T, int slabs,
                                 const std::function<Matrix(const Point&, double)>& f,
                                 double nu);
  static CoefficientField constant(Box domain, std::vector<int> shape, double T, int slabs,
                                   const Matrix& A, double nu);
  /// Takes ownership of per-(slab, cell) values, slab-major.
  static CoefficientField from_values(Box domain, std::vector<int> shape, double T, int slabs,
                                      std::vector<Matrix> values, double nu);

  int dim() const { return domain_.dim(); }
  const Box& domain() const { return domain_; }
  const std::vector<int>& shape() const { return shape_; }
  double T() const { return T_; }
  int slabs() const { return slabs_; }
  double nu() const { return nu_; }

  int cell_count() const;
  Box cell_box(int flat) const;
  int cell_of(const Point& x) const;
  double slab_lo(int k) const { return T_ * k / slabs_; }
  double slab_hi(int k) const { return T_ * (k + 1) / slabs_; }
  /// Slab whose interval (lo, hi] holds t; t <= 0 maps to slab 0.
  int slab_of(double t) const;

  const Matrix& at(int cell, int slab) const { return values_[slab * cell_count() + cell]; }
  const Matrix& value(const Point& x, double t) const { return at(cell_of(x), slab_of(t)); }

  /// Throws EllipticityViolation if any entry breaks nu|xi|^2 <= <A xi, xi>, |A| <= 1/nu.
  void validate(double tol = 1e-12) const;
  static bool elliptic(const Matrix& A, double nu, double tol = 1e-12);

 private:
  CoefficientField() = default;

  Box domain_;
  std::vector<int> shape_;
  double T_ = 1.0;
  int slabs_ = 1;
  double nu_ = 1.0;
  std::vector<Matrix> values_;
};

}  // namespace wparab
