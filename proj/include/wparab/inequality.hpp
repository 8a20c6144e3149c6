#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "wparab/report.hpp"
#include "wparab/weights.hpp"

namespace wparab {

enum class TestFunctionKind { Polynomial, Trigonometric, PiecewiseLinear };

/// Closed-form function of one variable with its exact derivative.
class TestFunction {
 public:
  /// sum_k c[k] x^k
  static TestFunction polynomial(std::vector<double> coeffs);
  /// offset + amplitude sin(frequency x + phase)
  static TestFunction trigonometric(double amplitude, double frequency, double phase = 0.0,
                                    double offset = 0.0);
  /// Linear interpolation of (xs, ys), constant outside [xs.front(), xs.back()].
  static TestFunction piecewise_linear(std::vector<double> xs, std::vector<double> ys);

  TestFunctionKind kind() const { return kind_; }
  double value(double x) const;
  double gradient(double x) const;
  /// Points where the derivative jumps.
  std::vector<double> kinks() const;
  /// Characteristic frequency, used to split quadrature intervals.
  double frequency() const;
  TestFunction scaled(double c) const;
  /// Largest relative mismatch between gradient() and a central difference at seeded points.
  double max_fd_error(std::uint64_t seed, int samples, double lo, double hi) const;

 private:
  TestFunction() = default;
  TestFunctionKind kind_ = TestFunctionKind::Polynomial;
  std::vector<double> a_, b_;
  double amp_ = 0, freq_ = 0, phase_ = 0, offset_ = 0, scale_ = 1;
};

/// u(x,t) = g(x) p(t) with p a polynomial in t.
struct SpaceTimeFunction {
  TestFunction space = TestFunction::polynomial({1.0});
  std::vector<double> time_poly{1.0};
  double time_value(double t) const;
};

/// Integral of f over [a,b], split at `breaks` and into pieces short enough for `frequency`.
double integrate_1d(const std::function<double(double)>& f, double a, double b,
                    std::vector<double> breaks = {}, double frequency = 0.0);

/// (avg_B |g|^{2/(q-gamma)})^{(q-gamma)/2} <= N (mu(B)^{-1} int_B |g|^2 mu)^{1/2}
/// on B_{s r}(x0) for each dilation s.
AuditReport weighted_lq_control_audit(const TestFunction& g, const Weight& mu, double q,
                                      double x0, double r, double gamma, double M0,
                                      const std::vector<double>& dilations = {1.0, 0.5, 0.25});

enum class EmbeddingCase { HighDimension, LowDimension };

/// beta(B)^{-1} int_B g^2 beta <= N (avg_B |g|^s)^{2/s}.
AuditReport weighted_embedding_audit(const TestFunction& g, const Weight& beta, EmbeddingCase c,
                                     double gamma, double x0, double r,
                                     double reverse_holder_budget = 2.0);

struct InterpolationOptions {
  std::vector<double> thetas;  // empty: 0.05, 0.10, ..., 0.95
  double gamma = 0.1;
  double t_lo = 0.0;
  double t_hi = 1.0;
  std::vector<double> r_sweep{1.0 / 8, 1.0 / 16, 1.0 / 32};
  double budget = 100.0;
};

/// (beta)_B^{-1} avg_Q u^2 beta <= N A^{1-theta} [A^theta + r^{2 theta} G^theta],
/// A = avg_Q u^2, G = avg_Q |grad u|^2, on B_r(x0) x Gamma and on B_r^+(x0) x Gamma.
AuditReport interpolation_audit(const SpaceTimeFunction& u, const Weight& beta, double x0,
                                double r, const InterpolationOptions& opt = {});

}  // namespace wparab
