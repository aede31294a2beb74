#pragma once

#include <span>
#include <vector>

namespace nilmaug {

struct Knot {
  double time = 0.0;
  double value = 0.0;
};

/// Second derivatives of the natural cubic spline through `knots`
/// (zero at both ends), from the tridiagonal continuity system.
/// Throws ConfigError on fewer than two knots or non-increasing times.
std::vector<double> spline_coefficients(std::span<const Knot> knots);

/// Natural cubic spline through a set of knots.
class NaturalCubicSpline {
 public:
  explicit NaturalCubicSpline(std::span<const Knot> knots);

  /// Value at t. Outside the knot range the end pieces are extended.
  double operator()(double t) const;
  double derivative(double t) const;

  std::span<const double> second_derivatives() const { return y2_; }
  std::size_t size() const { return t_.size(); }

 private:
  std::size_t piece(double t) const;

  std::vector<double> t_;
  std::vector<double> y_;
  std::vector<double> y2_;
};

}  // namespace nilmaug
