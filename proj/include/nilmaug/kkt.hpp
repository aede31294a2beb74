#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "nilmaug/errors.hpp"

namespace nilmaug {

/// Raised when the KKT matrix of an equality-constrained QP is singular.
class DegenerateProblem : public NumericError {
 public:
  DegenerateProblem() : NumericError("degenerate disaggregation problem") {}
};

/// Symmetric n x n matrix with entries only where |i - j| <= bandwidth.
/// Stores the upper band row by row.
class SymmetricBandMatrix {
 public:
  SymmetricBandMatrix(std::size_t n, std::size_t bandwidth)
      : n_(n), bw_(bandwidth), data_(n * (bandwidth + 1), 0.0) {}

  std::size_t size() const { return n_; }
  std::size_t bandwidth() const { return bw_; }

  /// Reference to entry (i, j) == (j, i). Requires |i - j| <= bandwidth.
  double& at(std::size_t i, std::size_t j);
  double operator()(std::size_t i, std::size_t j) const;

  std::vector<double> multiply(std::span<const double> x) const;

 private:
  std::size_t n_;
  std::size_t bw_;
  std::vector<double> data_;
};

/// Sparse constraint row: (column, coefficient) pairs.
struct ConstraintRow {
  std::vector<std::pair<std::size_t, double>> entries;
};

/// Minimises 0.5 x'Hx - b'x subject to Cx = y by a banded LU factorisation
/// (partial pivoting) of the KKT system [[H, C'], [C, 0]].
///
/// Each multiplier is ordered directly after the last variable its row
/// touches, so the KKT bandwidth stays close to H's when the constraint rows
/// are local. One step of iterative refinement is applied.
/// Throws DegenerateProblem when the KKT matrix is singular.
std::vector<double> solve_kkt_banded(const SymmetricBandMatrix& H, std::span<const ConstraintRow> C,
                                     std::span<const double> b, std::span<const double> y);

}  // namespace nilmaug
