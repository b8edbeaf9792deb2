#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hubflow::stats {

// Dense row-major matrix, just enough for design matrices.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct LeastSquaresSolution {
  std::vector<double> coefficients;
  std::vector<double> fitted;
  std::vector<double> residuals;
  // Diagonal of (X^T X)^-1, for coefficient standard errors.
  std::vector<double> inverse_gram_diagonal;
};

// Householder QR least squares. Requires rows >= cols; throws
// RankDeficientError (period -1) when a column is numerically dependent.
LeastSquaresSolution solve_least_squares(const Matrix& x,
                                         std::span<const double> y);

}  // namespace hubflow::stats
