#include "hubflow/stats/least_squares.hpp"

#include <algorithm>
#include <cmath>

#include "hubflow/error.hpp"

namespace hubflow::stats {

LeastSquaresSolution solve_least_squares(const Matrix& x,
                                         std::span<const double> y) {
  const std::size_t n = x.rows();
  const std::size_t m = x.cols();
  if (y.size() != n) throw ArgumentError("response length differs from design rows");
  if (n < m || m == 0) throw ArgumentError("least squares needs rows >= cols > 0");

  Matrix r = x;
  std::vector<double> qty(y.begin(), y.end());
  std::vector<double> v(n);

  double max_diag = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < n; ++i) norm = std::hypot(norm, r(i, k));
    if (norm == 0.0) {
      throw RankDeficientError(-1, "design column " + std::to_string(k + 1) +
                                       " is numerically dependent");
    }
    const double alpha = r(k, k) > 0.0 ? -norm : norm;
    for (std::size_t i = k; i < n; ++i) v[i] = r(i, k);
    v[k] -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t i = k; i < n; ++i) vnorm2 += v[i] * v[i];
    if (vnorm2 > 0.0) {
      for (std::size_t j = k; j < m; ++j) {
        double dot = 0.0;
        for (std::size_t i = k; i < n; ++i) dot += v[i] * r(i, j);
        const double scale = 2.0 * dot / vnorm2;
        for (std::size_t i = k; i < n; ++i) r(i, j) -= scale * v[i];
      }
      double dot = 0.0;
      for (std::size_t i = k; i < n; ++i) dot += v[i] * qty[i];
      const double scale = 2.0 * dot / vnorm2;
      for (std::size_t i = k; i < n; ++i) qty[i] -= scale * v[i];
    }
    max_diag = std::max(max_diag, std::fabs(r(k, k)));
  }
  for (std::size_t k = 0; k < m; ++k) {
    if (std::fabs(r(k, k)) <= 1e-12 * max_diag) {
      throw RankDeficientError(-1, "design column " + std::to_string(k + 1) +
                                       " is numerically dependent");
    }
  }

  LeastSquaresSolution sol;
  sol.coefficients.assign(m, 0.0);
  for (std::size_t k = m; k-- > 0;) {
    double s = qty[k];
    for (std::size_t j = k + 1; j < m; ++j) s -= r(k, j) * sol.coefficients[j];
    sol.coefficients[k] = s / r(k, k);
  }

  // R^-1 by back substitution, column by column; (X^T X)^-1 = R^-1 R^-T.
  Matrix rinv(m, m);
  for (std::size_t col = 0; col < m; ++col) {
    for (std::size_t k = col + 1; k-- > 0;) {
      double s = k == col ? 1.0 : 0.0;
      for (std::size_t j = k + 1; j <= col; ++j) s -= r(k, j) * rinv(j, col);
      rinv(k, col) = s / r(k, k);
    }
  }
  sol.inverse_gram_diagonal.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t j = i; j < m; ++j) s += rinv(i, j) * rinv(i, j);
    sol.inverse_gram_diagonal[i] = s;
  }

  sol.fitted.assign(n, 0.0);
  sol.residuals.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double f = 0.0;
    for (std::size_t j = 0; j < m; ++j) f += x(i, j) * sol.coefficients[j];
    sol.fitted[i] = f;
    sol.residuals[i] = y[i] - f;
  }
  return sol;
}

}  // namespace hubflow::stats
