#include "hubflow/stats/anova.hpp"

#include <algorithm>
#include <cmath>

#include "hubflow/error.hpp"
#include "hubflow/stats/distributions.hpp"

namespace hubflow::stats {

FlowGrid FlowGrid::from_rows(const std::vector<std::vector<double>>& rows) {
  FlowGrid g;
  g.rows = rows.size();
  g.cols = rows.empty() ? 0 : rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != g.cols) throw ArgumentError("grid rows differ in length");
    for (double v : r) g.cells.emplace_back(v);
  }
  return g;
}

FlowGrid FlowGrid::from_series(const FlowSeries& series,
                               std::span<const Date> dates) {
  FlowGrid g;
  g.dates.assign(dates.begin(), dates.end());
  g.rows = dates.size();
  g.cols = static_cast<std::size_t>(series.periods_per_day);
  g.cells.assign(g.rows * g.cols, std::nullopt);
  for (const auto& e : series.entries) {
    auto it = std::find(g.dates.begin(), g.dates.end(), e.date);
    if (it == g.dates.end() || e.period < 1 ||
        static_cast<std::size_t>(e.period) > g.cols) {
      continue;
    }
    const auto r = static_cast<std::size_t>(it - g.dates.begin());
    g.cells[r * g.cols + static_cast<std::size_t>(e.period - 1)] =
        static_cast<double>(e.count);
  }
  return g;
}

std::vector<std::string> FlowGrid::missing_cells() const {
  std::vector<std::string> out;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (at(r, c)) continue;
      std::string where = r < dates.size() ? format_date(dates[r])
                                           : "row " + std::to_string(r + 1);
      out.push_back("missing cell: " + where + " period " + std::to_string(c + 1));
    }
  }
  return out;
}

AnovaResult two_way_anova(const FlowGrid& grid, double alpha) {
  if (grid.rows < 2 || grid.cols < 2) {
    throw ArgumentError("two-way ANOVA needs at least a 2 x 2 grid");
  }
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw ArgumentError("significance level must lie in (0, 1)");
  }
  if (auto missing = grid.missing_cells(); !missing.empty()) {
    throw ValidationError(std::move(missing));
  }

  const std::size_t r = grid.rows;
  const std::size_t c = grid.cols;
  std::vector<double> row_mean(r, 0.0), col_mean(c, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const double v = *grid.at(i, j);
      row_mean[i] += v;
      col_mean[j] += v;
      grand += v;
    }
  }
  for (auto& m : row_mean) m /= static_cast<double>(c);
  for (auto& m : col_mean) m /= static_cast<double>(r);
  grand /= static_cast<double>(r * c);

  AnovaResult res;
  res.alpha = alpha;
  for (double m : row_mean) res.rows.ss += (m - grand) * (m - grand);
  res.rows.ss *= static_cast<double>(c);
  for (double m : col_mean) res.cols.ss += (m - grand) * (m - grand);
  res.cols.ss *= static_cast<double>(r);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const double v = *grid.at(i, j);
      const double resid = v - row_mean[i] - col_mean[j] + grand;
      res.error.ss += resid * resid;
      res.total.ss += (v - grand) * (v - grand);
    }
  }
  res.rows.df = static_cast<int>(r) - 1;
  res.cols.df = static_cast<int>(c) - 1;
  res.error.df = res.rows.df * res.cols.df;
  res.total.df = static_cast<int>(r * c) - 1;
  res.rows.ms = res.rows.ss / res.rows.df;
  res.cols.ms = res.cols.ss / res.cols.df;
  res.error.ms = res.error.ss / res.error.df;
  res.total.ms = res.total.ss / res.total.df;

  // Relative cutoff: an additive grid leaves only rounding noise in SS_error.
  res.degenerate = res.total.ss == 0.0 || res.error.ss <= 1e-12 * res.total.ss;
  if (!res.degenerate) {
    res.f_rows = *res.rows.ms / *res.error.ms;
    res.f_cols = *res.cols.ms / *res.error.ms;
    res.p_rows = tail_probability_f(*res.f_rows, res.rows.df, res.error.df);
    res.p_cols = tail_probability_f(*res.f_cols, res.cols.df, res.error.df);
    res.rows_significant = *res.p_rows < alpha;
    res.cols_significant = *res.p_cols < alpha;
  }
  return res;
}

}  // namespace hubflow::stats
