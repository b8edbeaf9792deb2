#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace hubflow::testing {

// Solves A x = b by Gauss-Jordan elimination with partial pivoting in long
// double. A is square, row-major.
inline std::vector<long double> gauss_jordan(std::vector<std::vector<long double>> a,
                                             std::vector<long double> b) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    }
    if (a[pivot][col] == 0) throw std::runtime_error("singular");
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    const long double d = a[col][col];
    for (auto& v : a[col]) v /= d;
    b[col] /= d;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0) continue;
      const long double m = a[r][col];
      for (std::size_t c = 0; c < n; ++c) a[r][c] -= m * a[col][c];
      b[r] -= m * b[col];
    }
  }
  return b;
}

struct NormalEquationsFit {
  std::vector<long double> beta;
  std::vector<long double> inverse_diagonal;  // of X^T X
};

// Explicit X^T X beta = X^T y solve over the dummy design: columns t1..t(P-1)
// then the intercept.
inline NormalEquationsFit normal_equations(const std::vector<int>& periods,
                                           const std::vector<double>& y, int p) {
  const std::size_t k = static_cast<std::size_t>(p);
  std::vector<std::vector<long double>> xtx(k, std::vector<long double>(k, 0));
  std::vector<long double> xty(k, 0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    std::vector<long double> row(k, 0);
    if (periods[i] < p) row[periods[i] - 1] = 1;
    row[k - 1] = 1;
    for (std::size_t a = 0; a < k; ++a) {
      xty[a] += row[a] * y[i];
      for (std::size_t b = 0; b < k; ++b) xtx[a][b] += row[a] * row[b];
    }
  }
  NormalEquationsFit fit;
  fit.beta = gauss_jordan(xtx, xty);
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<long double> e(k, 0);
    e[j] = 1;
    fit.inverse_diagonal.push_back(gauss_jordan(xtx, e)[j]);
  }
  return fit;
}

struct BruteAnova {
  long double ss_rows = 0, ss_cols = 0, ss_error = 0, ss_total = 0;
};

// Deviation sums straight from the definitions.
inline BruteAnova brute_anova(const std::vector<std::vector<double>>& g) {
  const std::size_t r = g.size(), c = g[0].size();
  long double grand = 0;
  std::vector<long double> row_mean(r, 0), col_mean(c, 0);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      grand += g[i][j];
      row_mean[i] += g[i][j];
      col_mean[j] += g[i][j];
    }
  }
  grand /= r * c;
  for (auto& m : row_mean) m /= c;
  for (auto& m : col_mean) m /= r;
  BruteAnova out;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const long double dr = row_mean[i] - grand;
      const long double dc = col_mean[j] - grand;
      const long double e = g[i][j] - row_mean[i] - col_mean[j] + grand;
      const long double t = g[i][j] - grand;
      out.ss_rows += dr * dr;
      out.ss_cols += dc * dc;
      out.ss_error += e * e;
      out.ss_total += t * t;
    }
  }
  return out;
}

}  // namespace hubflow::testing
