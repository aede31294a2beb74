#pragma once

// Dense reference solvers used only by the tests. They share no code with
// the library: every system is assembled in full and solved with Eigen's
// full-pivot LU.

#include <Eigen/Dense>
#include <cstddef>
#include <utility>
#include <vector>

namespace oracle {

struct Point {
  double t;
  double y;
};

/// Natural cubic spline as n-1 explicit polynomials
/// a + b (t - t_i) + c (t - t_i)^2 + d (t - t_i)^3, found by solving the
/// 4(n-1) interpolation, C1, C2 and natural-end conditions at once.
class DenseSpline {
 public:
  explicit DenseSpline(const std::vector<Point>& k) : k_(k) {
    const int m = static_cast<int>(k.size()) - 1;
    const int n = 4 * m;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    int row = 0;
    for (int i = 0; i < m; ++i) {
      const double h = k[i + 1].t - k[i].t;
      A(row, 4 * i) = 1.0;
      rhs(row++) = k[i].y;
      A(row, 4 * i) = 1.0;
      A(row, 4 * i + 1) = h;
      A(row, 4 * i + 2) = h * h;
      A(row, 4 * i + 3) = h * h * h;
      rhs(row++) = k[i + 1].y;
    }
    for (int i = 0; i + 1 < m; ++i) {
      const double h = k[i + 1].t - k[i].t;
      A(row, 4 * i + 1) = 1.0;
      A(row, 4 * i + 2) = 2.0 * h;
      A(row, 4 * i + 3) = 3.0 * h * h;
      A(row++, 4 * (i + 1) + 1) = -1.0;
      A(row, 4 * i + 2) = 2.0;
      A(row, 4 * i + 3) = 6.0 * h;
      A(row++, 4 * (i + 1) + 2) = -2.0;
    }
    A(row++, 2) = 2.0;
    const double hl = k[m].t - k[m - 1].t;
    A(row, 4 * (m - 1) + 2) = 2.0;
    A(row++, 4 * (m - 1) + 3) = 6.0 * hl;
    coef_ = A.fullPivLu().solve(rhs);
  }

  double operator()(double t) const {
    const std::size_t i = piece(t);
    const double u = t - k_[i].t;
    const double* c = coef_.data() + 4 * i;
    return c[0] + u * (c[1] + u * (c[2] + u * c[3]));
  }

  double second_derivative_at_knot(std::size_t j) const {
    if (j + 1 == k_.size()) {
      const double h = k_[j].t - k_[j - 1].t;
      return 2.0 * coef_(4 * (j - 1) + 2) + 6.0 * h * coef_(4 * (j - 1) + 3);
    }
    return 2.0 * coef_(4 * j + 2);
  }

 private:
  std::size_t piece(double t) const {
    std::size_t i = 0;
    while (i + 2 < k_.size() && t >= k_[i + 1].t) ++i;
    return i;
  }

  std::vector<Point> k_;
  Eigen::VectorXd coef_;
};

/// Second derivatives from the n x n continuity system assembled densely.
inline std::vector<double> continuity_second_derivatives(const std::vector<Point>& k) {
  const int n = static_cast<int>(k.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  A(0, 0) = 1.0;
  A(n - 1, n - 1) = 1.0;
  for (int i = 1; i + 1 < n; ++i) {
    const double h0 = k[i].t - k[i - 1].t;
    const double h1 = k[i + 1].t - k[i].t;
    A(i, i - 1) = h0 / 6.0;
    A(i, i) = (h0 + h1) / 3.0;
    A(i, i + 1) = h1 / 6.0;
    rhs(i) = (k[i + 1].y - k[i].y) / h1 - (k[i].y - k[i - 1].y) / h0;
  }
  Eigen::VectorXd x = A.fullPivLu().solve(rhs);
  return {x.data(), x.data() + n};
}

/// argmin 0.5 x'Hx - b'x s.t. Cx = y from the full KKT matrix.
inline Eigen::VectorXd kkt(const Eigen::MatrixXd& H, const Eigen::MatrixXd& C, const Eigen::VectorXd& b,
                           const Eigen::VectorXd& y) {
  const Eigen::Index n = H.rows();
  const Eigen::Index m = C.rows();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + m, n + m);
  K.topLeftCorner(n, n) = H;
  if (m > 0) {
    K.topRightCorner(n, m) = C.transpose();
    K.bottomLeftCorner(m, n) = C;
  }
  Eigen::VectorXd rhs(n + m);
  rhs << b, y;
  return K.fullPivLu().solve(rhs).head(n);
}

/// First-difference Denton with x pinned at the anchor indices.
inline Eigen::VectorXd denton(std::size_t n, const std::vector<std::pair<std::size_t, double>>& anchors,
                              const std::vector<double>& indicator) {
  const auto N = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(N - 1, N);
  for (Eigen::Index i = 0; i + 1 < N; ++i) {
    D(i, i) = -1.0;
    D(i, i + 1) = 1.0;
  }
  const Eigen::MatrixXd H = D.transpose() * D;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(N);
  for (std::size_t i = 0; i < indicator.size(); ++i) p(static_cast<Eigen::Index>(i)) = indicator[i];
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(anchors.size()), N);
  Eigen::VectorXd y(static_cast<Eigen::Index>(anchors.size()));
  for (std::size_t r = 0; r < anchors.size(); ++r) {
    C(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(anchors[r].first)) = 1.0;
    y(static_cast<Eigen::Index>(r)) = anchors[r].second;
  }
  return kkt(H, C, H * p, y);
}

}  // namespace oracle
