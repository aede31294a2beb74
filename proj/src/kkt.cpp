#include "nilmaug/kkt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

namespace nilmaug {

double& SymmetricBandMatrix::at(std::size_t i, std::size_t j) {
  if (i > j) std::swap(i, j);
  if (j - i > bw_ || j >= n_) throw ConfigError("band matrix index outside the band");
  return data_[i * (bw_ + 1) + (j - i)];
}

double SymmetricBandMatrix::operator()(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  if (j - i > bw_ || j >= n_) return 0.0;
  return data_[i * (bw_ + 1) + (j - i)];
}

std::vector<double> SymmetricBandMatrix::multiply(std::span<const double> x) const {
  std::vector<double> out(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t lo = i > bw_ ? i - bw_ : 0;
    const std::size_t hi = std::min(n_ - 1, i + bw_);
    double acc = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) acc += (*this)(i, j) * x[j];
    out[i] = acc;
  }
  return out;
}

namespace {

// General banded matrix with kl sub- and ku super-diagonals, stored with
// kl extra super-diagonals of room for the fill produced by row pivoting.
class BandLU {
 public:
  BandLU(std::size_t n, std::size_t kl, std::size_t ku)
      : n_(n), kl_(kl), ku_(ku), width_(2 * kl + ku + 1), data_(n * width_, 0.0), pivots_(n) {}

  double& at(std::size_t r, std::size_t c) { return data_[r * width_ + (c + kl_ - r)]; }
  double get(std::size_t r, std::size_t c) const {
    if (c + kl_ < r || c > r + kl_ + ku_ || c >= n_) return 0.0;
    return data_[r * width_ + (c + kl_ - r)];
  }

  void factor(double pivot_tol) {
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t last_row = std::min(n_ - 1, i + kl_);
      const std::size_t last_col = std::min(n_ - 1, i + kl_ + ku_);
      std::size_t p = i;
      double best = std::abs(at(i, i));
      for (std::size_t r = i + 1; r <= last_row; ++r) {
        const double v = std::abs(at(r, i));
        if (v > best) {
          best = v;
          p = r;
        }
      }
      if (!(best > pivot_tol)) throw DegenerateProblem();
      pivots_[i] = p;
      if (p != i)
        for (std::size_t c = i; c <= last_col; ++c) std::swap(at(i, c), at(p, c));
      const double diag = at(i, i);
      for (std::size_t r = i + 1; r <= last_row; ++r) {
        double& lij = at(r, i);
        if (lij == 0.0) continue;
        lij /= diag;
        const double m = lij;
        for (std::size_t c = i + 1; c <= last_col; ++c) at(r, c) -= m * at(i, c);
      }
    }
  }

  void solve(std::vector<double>& rhs) const {
    for (std::size_t i = 0; i < n_; ++i) {
      if (pivots_[i] != i) std::swap(rhs[i], rhs[pivots_[i]]);
      const std::size_t last_row = std::min(n_ - 1, i + kl_);
      for (std::size_t r = i + 1; r <= last_row; ++r) rhs[r] -= get(r, i) * rhs[i];
    }
    for (std::size_t i = n_; i-- > 0;) {
      const std::size_t last_col = std::min(n_ - 1, i + kl_ + ku_);
      double acc = rhs[i];
      for (std::size_t c = i + 1; c <= last_col; ++c) acc -= get(i, c) * rhs[c];
      rhs[i] = acc / get(i, i);
    }
  }

 private:
  std::size_t n_, kl_, ku_, width_;
  std::vector<double> data_;
  std::vector<std::size_t> pivots_;
};

}  // namespace

std::vector<double> solve_kkt_banded(const SymmetricBandMatrix& H, std::span<const ConstraintRow> C,
                                     std::span<const double> b, std::span<const double> y) {
  const std::size_t n = H.size();
  const std::size_t m = C.size();
  if (b.size() != n || y.size() != m) throw ConfigError("KKT system dimension mismatch");
  if (n == 0) return {};

  // Interleave each multiplier after the last variable of its row.
  std::vector<std::size_t> key(m);
  for (std::size_t r = 0; r < m; ++r) {
    if (C[r].entries.empty()) throw DegenerateProblem();
    std::size_t k = 0;
    for (const auto& [col, v] : C[r].entries) {
      if (col >= n) throw ConfigError("constraint column out of range");
      k = std::max(k, col);
    }
    key[r] = k;
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) { return key[a] < key[c]; });

  std::vector<std::size_t> pos_x(n), pos_c(m);
  {
    std::size_t next = 0;
    std::size_t oi = 0;
    for (std::size_t j = 0; j < n; ++j) {
      pos_x[j] = next++;
      while (oi < m && key[order[oi]] == j) pos_c[order[oi++]] = next++;
    }
  }

  const auto dist = [](std::size_t a, std::size_t c) { return a > c ? a - c : c - a; };
  std::size_t band = 0;
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j <= std::min(n - 1, i + H.bandwidth()); ++j)
      if (const double v = H(i, j); v != 0.0) {
        band = std::max(band, dist(pos_x[i], pos_x[j]));
        scale = std::max(scale, std::abs(v));
      }
  for (std::size_t r = 0; r < m; ++r)
    for (const auto& [col, v] : C[r].entries) {
      band = std::max(band, dist(pos_c[r], pos_x[col]));
      scale = std::max(scale, std::abs(v));
    }
  if (scale == 0.0) throw DegenerateProblem();

  const std::size_t N = n + m;
  BandLU lu(N, band, band);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = (i > H.bandwidth() ? i - H.bandwidth() : 0); j <= std::min(n - 1, i + H.bandwidth()); ++j)
      if (const double v = H(i, j); v != 0.0) lu.at(pos_x[i], pos_x[j]) = v;
  for (std::size_t r = 0; r < m; ++r)
    for (const auto& [col, v] : C[r].entries) {
      lu.at(pos_c[r], pos_x[col]) += v;
      lu.at(pos_x[col], pos_c[r]) += v;
    }
  lu.factor(1e-12 * scale);

  auto residual = [&](std::span<const double> z) {
    std::vector<double> x(n), lambda(m);
    for (std::size_t j = 0; j < n; ++j) x[j] = z[pos_x[j]];
    for (std::size_t r = 0; r < m; ++r) lambda[r] = z[pos_c[r]];
    std::vector<double> hx = H.multiply(x);
    std::vector<double> res(N);
    for (std::size_t j = 0; j < n; ++j) res[pos_x[j]] = b[j] - hx[j];
    for (std::size_t r = 0; r < m; ++r) {
      double cx = 0.0;
      for (const auto& [col, v] : C[r].entries) {
        cx += v * x[col];
        res[pos_x[col]] -= v * lambda[r];
      }
      res[pos_c[r]] = y[r] - cx;
    }
    return res;
  };

  std::vector<double> z(N, 0.0);
  for (std::size_t j = 0; j < n; ++j) z[pos_x[j]] = b[j];
  for (std::size_t r = 0; r < m; ++r) z[pos_c[r]] = y[r];
  lu.solve(z);

  std::vector<double> correction = residual(z);
  lu.solve(correction);
  for (std::size_t i = 0; i < N; ++i) z[i] += correction[i];

  std::vector<double> x(n);
  for (std::size_t j = 0; j < n; ++j) {
    x[j] = z[pos_x[j]];
    if (!std::isfinite(x[j])) throw NumericError("non-finite KKT solution");
  }
  return x;
}

}  // namespace nilmaug
