#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hubflow/od.hpp"
#include "hubflow/time.hpp"

namespace hubflow::stats {

// Date x period table of flows; cells may be missing.
struct FlowGrid {
  std::vector<Date> dates;  // optional row labels, may be empty
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::optional<double>> cells;  // row-major

  static FlowGrid from_rows(const std::vector<std::vector<double>>& rows);
  // One row per listed date, one column per period; entries absent from the
  // series become missing cells.
  static FlowGrid from_series(const FlowSeries& series,
                              std::span<const Date> dates);

  const std::optional<double>& at(std::size_t r, std::size_t c) const {
    return cells[r * cols + c];
  }
  // "row r period c" descriptions (1-based), dates shown when known.
  std::vector<std::string> missing_cells() const;
};

struct AnovaSource {
  double ss = 0.0;
  int df = 0;
  std::optional<double> ms;  // absent when df == 0
};

// Two-factor analysis of variance without replication; factor A is the row
// (date) factor, factor B the column (period) factor.
struct AnovaResult {
  AnovaSource rows;
  AnovaSource cols;
  AnovaSource error;
  AnovaSource total;
  std::optional<double> f_rows;
  std::optional<double> f_cols;
  std::optional<double> p_rows;
  std::optional<double> p_cols;
  double alpha = 0.05;
  bool rows_significant = false;
  bool cols_significant = false;
  // Error mean square is zero, so no F ratio exists.
  bool degenerate = false;
};

// Throws ArgumentError for fewer than 2 rows or columns or alpha outside
// (0, 1), and ValidationError listing every missing cell.
AnovaResult two_way_anova(const FlowGrid& grid, double alpha = 0.05);

}  // namespace hubflow::stats
