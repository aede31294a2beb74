#include "nilmaug/spline.hpp"

#include <algorithm>
#include <string>

#include "nilmaug/errors.hpp"

namespace nilmaug {

std::vector<double> spline_coefficients(std::span<const Knot> knots) {
  const std::size_t n = knots.size();
  if (n < 2) throw ConfigError("spline needs at least two knots");
  for (std::size_t i = 1; i < n; ++i)
    if (!(knots[i].time > knots[i - 1].time))
      throw ConfigError("spline knot times must be strictly increasing (duplicate at index " +
                        std::to_string(i) + ")");

  // Natural boundary: y2[0] = y2[n-1] = 0. Forward sweep of the tridiagonal
  // system with u holding the decomposed right-hand side.
  std::vector<double> y2(n, 0.0);
  std::vector<double> u(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h_prev = knots[i].time - knots[i - 1].time;
    const double h_next = knots[i + 1].time - knots[i].time;
    const double sig = h_prev / (h_prev + h_next);
    const double p = sig * y2[i - 1] + 2.0;
    y2[i] = (sig - 1.0) / p;
    const double slope_diff = (knots[i + 1].value - knots[i].value) / h_next -
                              (knots[i].value - knots[i - 1].value) / h_prev;
    u[i] = (6.0 * slope_diff / (h_prev + h_next) - sig * u[i - 1]) / p;
  }
  y2[n - 1] = 0.0;
  for (std::size_t k = n - 1; k-- > 0;) y2[k] = y2[k] * y2[k + 1] + u[k];
  y2[0] = 0.0;
  return y2;
}

NaturalCubicSpline::NaturalCubicSpline(std::span<const Knot> knots) : y2_(spline_coefficients(knots)) {
  t_.reserve(knots.size());
  y_.reserve(knots.size());
  for (const Knot& k : knots) {
    t_.push_back(k.time);
    y_.push_back(k.value);
  }
}

std::size_t NaturalCubicSpline::piece(double t) const {
  auto it = std::upper_bound(t_.begin(), t_.end(), t);
  std::size_t hi = static_cast<std::size_t>(it - t_.begin());
  return std::clamp<std::size_t>(hi, 1, t_.size() - 1) - 1;
}

double NaturalCubicSpline::operator()(double t) const {
  const std::size_t lo = piece(t);
  const std::size_t hi = lo + 1;
  const double h = t_[hi] - t_[lo];
  const double a = (t_[hi] - t) / h;
  const double b = (t - t_[lo]) / h;
  return a * y_[lo] + b * y_[hi] + ((a * a * a - a) * y2_[lo] + (b * b * b - b) * y2_[hi]) * (h * h) / 6.0;
}

double NaturalCubicSpline::derivative(double t) const {
  const std::size_t lo = piece(t);
  const std::size_t hi = lo + 1;
  const double h = t_[hi] - t_[lo];
  const double a = (t_[hi] - t) / h;
  const double b = (t - t_[lo]) / h;
  return (y_[hi] - y_[lo]) / h - (3.0 * a * a - 1.0) / 6.0 * h * y2_[lo] +
         (3.0 * b * b - 1.0) / 6.0 * h * y2_[hi];
}

}  // namespace nilmaug
