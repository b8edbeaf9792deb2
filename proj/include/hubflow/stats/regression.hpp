#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hubflow/od.hpp"
#include "hubflow/time.hpp"

namespace hubflow::stats {

struct FitStatistics {
  double multiple_r = 0.0;
  double r_square = 0.0;
  double adjusted_r_square = 0.0;
  double standard_error = 0.0;
  std::size_t observations = 0;
  int predictors = 0;

  int df_regression = 0;
  int df_residual = 0;
  int df_total = 0;
  double ss_regression = 0.0;
  double ss_residual = 0.0;
  double ss_total = 0.0;
  double ms_regression = 0.0;
  double ms_residual = 0.0;
  double f = 0.0;               // +inf when the fit is exact
  double significance_f = 1.0;  // upper-tail probability of f
};

// Regression summary block from the two sums of squares. Throws
// DegreesOfFreedomError when n <= p + 1 and ArgumentError for negative sums.
FitStatistics compute_fit_statistics(double ss_regression, double ss_residual,
                                     std::size_t n, int p);

struct Coefficient {
  std::string name;
  double estimate = 0.0;
  double standard_error = 0.0;
  double t_stat = 0.0;   // NaN when the standard error is zero
  double p_value = 1.0;  // NaN alongside t_stat
};

// Flow = b1 t1 + ... + b(P-1) t(P-1) + b0, one dummy per period except the
// last, which is the reference level absorbed by the intercept.
struct RegressionFit {
  int periods = 12;
  Coefficient intercept;
  std::vector<Coefficient> dummies;  // t1..t(P-1)
  FitStatistics statistics;
  std::vector<std::size_t> period_counts;  // observations per period
};

// Ordinary least squares on the dummy design built from every series entry.
// Throws RankDeficientError naming the first period without observations and
// DegreesOfFreedomError when there are too few rows.
RegressionFit fit_dummy_regression(const FlowSeries& series,
                                   const PeriodScheme& scheme);

// Design row for a 1-based period: P-1 dummies followed by the intercept
// column.
std::vector<double> dummy_design_row(int period, int periods);

// intercept + b_period (period < P), intercept alone for the last period.
// Throws ArgumentError when the period is out of range.
double predict(const RegressionFit& fit, int period);

struct ApeSample {
  Date date;
  int period = 1;
  double actual = 0.0;
  double predicted = 0.0;
  double ape_percent = 0.0;
};

struct ValidationReport {
  std::vector<ApeSample> samples;
  double max_percent = 0.0;
  double min_percent = 0.0;
  double mean_percent = 0.0;
  std::size_t excluded_zero_actuals = 0;
};

// APE = 100 |predicted - actual| / actual per holdout entry; zero actuals are
// skipped and counted. Throws ArgumentError when nothing is left to score.
ValidationReport validate_mape(const RegressionFit& fit,
                               const FlowSeries& holdout);

}  // namespace hubflow::stats
