#include "hubflow/stats/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hubflow/error.hpp"
#include "hubflow/stats/distributions.hpp"
#include "hubflow/stats/least_squares.hpp"

namespace hubflow::stats {

FitStatistics compute_fit_statistics(double ss_regression, double ss_residual,
                                     std::size_t n, int p) {
  if (p < 1) throw ArgumentError("need at least one predictor");
  if (n <= static_cast<std::size_t>(p) + 1) {
    throw DegreesOfFreedomError("need more than p + 1 = " +
                                std::to_string(p + 1) + " observations, got " +
                                std::to_string(n));
  }
  if (ss_regression < 0.0 || ss_residual < 0.0) {
    throw ArgumentError("sums of squares must be non-negative");
  }
  FitStatistics s;
  s.observations = n;
  s.predictors = p;
  s.df_regression = p;
  s.df_total = static_cast<int>(n) - 1;
  s.df_residual = s.df_total - p;
  s.ss_regression = ss_regression;
  s.ss_residual = ss_residual;
  s.ss_total = ss_regression + ss_residual;
  s.r_square = s.ss_total > 0.0 ? ss_regression / s.ss_total : 0.0;
  s.multiple_r = std::sqrt(s.r_square);
  s.adjusted_r_square = 1.0 - (1.0 - s.r_square) *
                                   static_cast<double>(s.df_total) /
                                   static_cast<double>(s.df_residual);
  s.ms_regression = ss_regression / s.df_regression;
  s.ms_residual = ss_residual / s.df_residual;
  s.standard_error = std::sqrt(s.ms_residual);
  if (s.ms_residual > 0.0) {
    s.f = s.ms_regression / s.ms_residual;
    s.significance_f = tail_probability_f(s.f, s.df_regression, s.df_residual);
  } else if (s.ms_regression > 0.0) {
    s.f = std::numeric_limits<double>::infinity();
    s.significance_f = 0.0;
  } else {
    s.f = 0.0;
    s.significance_f = 1.0;
  }
  return s;
}

std::vector<double> dummy_design_row(int period, int periods) {
  std::vector<double> row(static_cast<std::size_t>(periods), 0.0);
  if (period < periods) row[static_cast<std::size_t>(period - 1)] = 1.0;
  row.back() = 1.0;
  return row;
}

RegressionFit fit_dummy_regression(const FlowSeries& series,
                                   const PeriodScheme& scheme) {
  scheme.validate();
  const int periods = scheme.periods_per_day;
  if (periods < 2) throw ArgumentError("dummy regression needs at least 2 periods");
  const std::size_t n = series.entries.size();

  std::vector<std::size_t> counts(static_cast<std::size_t>(periods), 0);
  for (const auto& e : series.entries) {
    if (e.period < 1 || e.period > periods) {
      throw ArgumentError("series period " + std::to_string(e.period) +
                          " outside 1.." + std::to_string(periods));
    }
    ++counts[static_cast<std::size_t>(e.period - 1)];
  }
  for (int p = 1; p <= periods; ++p) {
    if (counts[static_cast<std::size_t>(p - 1)] == 0) {
      throw RankDeficientError(
          p, "period " + std::to_string(p) + " has no observations");
    }
  }
  const int predictors = periods - 1;
  if (n <= static_cast<std::size_t>(predictors) + 1) {
    throw DegreesOfFreedomError("need at least " +
                                std::to_string(predictors + 2) +
                                " observations, got " + std::to_string(n));
  }

  Matrix x(n, static_cast<std::size_t>(periods));
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = dummy_design_row(series.entries[i].period, periods);
    for (std::size_t j = 0; j < row.size(); ++j) x(i, j) = row[j];
    y[i] = static_cast<double>(series.entries[i].count);
  }
  const auto sol = solve_least_squares(x, y);

  double mean_y = 0.0;
  for (double v : y) mean_y += v;
  mean_y /= static_cast<double>(n);
  double ss_res = 0.0, ss_reg = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ss_res += sol.residuals[i] * sol.residuals[i];
    const double d = sol.fitted[i] - mean_y;
    ss_reg += d * d;
  }
  // Residuals at rounding level mean the data sit exactly on the period means.
  if (ss_res <= 1e-24 * (ss_reg + ss_res)) ss_res = 0.0;

  RegressionFit fit;
  fit.periods = periods;
  fit.period_counts = counts;
  fit.statistics = compute_fit_statistics(ss_reg, ss_res, n, predictors);

  const double se_scale = fit.statistics.standard_error;
  const double df_res = fit.statistics.df_residual;
  auto make = [&](std::string name, std::size_t j) {
    Coefficient c;
    c.name = std::move(name);
    c.estimate = sol.coefficients[j];
    c.standard_error = se_scale * std::sqrt(sol.inverse_gram_diagonal[j]);
    if (c.standard_error > 0.0) {
      c.t_stat = c.estimate / c.standard_error;
      c.p_value = tail_probability_t(c.t_stat, df_res);
    } else {
      c.t_stat = std::numeric_limits<double>::quiet_NaN();
      c.p_value = std::numeric_limits<double>::quiet_NaN();
    }
    return c;
  };
  fit.intercept = make("Intercept", static_cast<std::size_t>(predictors));
  for (int j = 0; j < predictors; ++j) {
    fit.dummies.push_back(make("t" + std::to_string(j + 1),
                               static_cast<std::size_t>(j)));
  }
  return fit;
}

double predict(const RegressionFit& fit, int period) {
  if (period < 1 || period > fit.periods) {
    throw ArgumentError("period must lie in 1.." + std::to_string(fit.periods));
  }
  if (period == fit.periods) return fit.intercept.estimate;
  return fit.intercept.estimate +
         fit.dummies.at(static_cast<std::size_t>(period - 1)).estimate;
}

ValidationReport validate_mape(const RegressionFit& fit,
                               const FlowSeries& holdout) {
  ValidationReport report;
  double sum = 0.0;
  for (const auto& e : holdout.entries) {
    if (e.count <= 0) {
      ++report.excluded_zero_actuals;
      continue;
    }
    ApeSample s;
    s.date = e.date;
    s.period = e.period;
    s.actual = static_cast<double>(e.count);
    s.predicted = predict(fit, e.period);
    s.ape_percent = 100.0 * std::fabs(s.predicted - s.actual) / s.actual;
    sum += s.ape_percent;
    report.samples.push_back(s);
  }
  if (report.samples.empty()) throw ArgumentError("empty holdout");
  const auto [lo, hi] = std::minmax_element(
      report.samples.begin(), report.samples.end(),
      [](const ApeSample& a, const ApeSample& b) {
        return a.ape_percent < b.ape_percent;
      });
  report.min_percent = lo->ape_percent;
  report.max_percent = hi->ape_percent;
  // Rounding in the sum must not push the mean outside [min, max].
  report.mean_percent =
      std::clamp(sum / static_cast<double>(report.samples.size()),
                 report.min_percent, report.max_percent);
  return report;
}

}  // namespace hubflow::stats
