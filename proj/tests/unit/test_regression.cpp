#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "hubflow/error.hpp"
#include "hubflow/stats/least_squares.hpp"
#include "hubflow/stats/regression.hpp"
#include "hubflow/stats/report.hpp"
#include "unit/oracles.hpp"

using namespace hubflow;
using namespace hubflow::stats;

namespace {

const Date kStart = parse_date("2011-08-01");

// One entry per (day, period) with the given flow; `skip` drops entries.
FlowSeries series_from(int days, int periods, const std::function<double(int, int)>& flow,
                       const std::function<bool(int, int)>& skip = nullptr) {
  FlowSeries s;
  s.direction = FlowDirection::outbound;
  s.periods_per_day = periods;
  for (int d = 0; d < days; ++d) {
    for (int p = 1; p <= periods; ++p) {
      if (skip && skip(d, p)) continue;
      s.entries.push_back({kStart + std::chrono::days(d), p, static_cast<std::int64_t>(flow(d, p))});
    }
  }
  return s;
}

double rel(double a, double b) { return std::fabs(a - b) / std::max(1.0, std::fabs(b)); }

RegressionFit reference_fixture() {
  std::ifstream in(std::string(HUBFLOW_FIXTURE_DIR) + "/reference_bundle/fit_outbound.json");
  const auto doc = nlohmann::json::parse(in);
  return fit_from_report_json(doc.at("report"));
}

}  // namespace

TEST(FitStatistics, ReferenceSums) {
  const auto s = compute_fit_statistics(718390.5, 155697.3, 311, 11);
  EXPECT_NEAR(s.r_square, 0.821875, 1e-6);
  EXPECT_NEAR(s.multiple_r, 0.906573, 1e-6);
  EXPECT_NEAR(s.adjusted_r_square, 0.815321, 1e-5);
  EXPECT_NEAR(s.standard_error, 22.81944, 1e-4);
  EXPECT_NEAR(s.f, 125.4175, 1e-3);
  EXPECT_NEAR(s.ms_residual, 520.7268, 1e-3);
  EXPECT_NEAR(s.ms_regression, 65308.23, 1e-2);
  EXPECT_NEAR(s.ss_total, 874087.8, 0.1);
  EXPECT_EQ(s.df_regression, 11);
  EXPECT_EQ(s.df_residual, 299);
  EXPECT_EQ(s.df_total, 310);
  EXPECT_NEAR(std::log10(s.significance_f), std::log10(5.1e-105), 1.0);
}

TEST(FitStatistics, DegenerateSums) {
  const auto none = compute_fit_statistics(0.0, 50.0, 30, 11);
  EXPECT_EQ(none.r_square, 0.0);
  EXPECT_EQ(none.f, 0.0);
  EXPECT_EQ(none.significance_f, 1.0);
  const auto exact = compute_fit_statistics(50.0, 0.0, 30, 11);
  EXPECT_EQ(exact.r_square, 1.0);
  EXPECT_EQ(exact.standard_error, 0.0);
  EXPECT_TRUE(std::isinf(exact.f));
  EXPECT_EQ(exact.significance_f, 0.0);
}

TEST(FitStatistics, DegreesOfFreedomError) {
  EXPECT_THROW(compute_fit_statistics(1, 1, 12, 11), DegreesOfFreedomError);
  EXPECT_NO_THROW(compute_fit_statistics(1, 1, 13, 11));
  EXPECT_THROW(compute_fit_statistics(-1, 1, 30, 11), ArgumentError);
}

TEST(DummyRegression, ExactInterpolation) {
  const auto fit = fit_dummy_regression(series_from(2, 12, [](int, int p) { return 10.0 * p; }),
                                        PeriodScheme::uniform());
  EXPECT_NEAR(fit.intercept.estimate, 120.0, 1e-10);
  ASSERT_EQ(fit.dummies.size(), 11u);
  for (int j = 1; j <= 11; ++j) {
    EXPECT_NEAR(fit.dummies[j - 1].estimate, 10.0 * j - 120.0, 1e-10);
    EXPECT_NEAR(predict(fit, j), 10.0 * j, 1e-10);
  }
  EXPECT_NEAR(fit.statistics.r_square, 1.0, 1e-12);
  EXPECT_NEAR(fit.statistics.ss_residual, 0.0, 1e-9);
  EXPECT_EQ(fit.dummies[0].name, "t1");
  EXPECT_EQ(fit.intercept.name, "Intercept");
}

TEST(DummyRegression, MatchesNormalEquationsOracle) {
  std::mt19937_64 rng(311);
  std::uniform_real_distribution<double> noise(0, 60);
  std::bernoulli_distribution drop(0.1);
  for (int round = 0; round < 20; ++round) {
    const auto series = series_from(
        26, 12, [&](int, int p) { return std::round(20.0 + 8.0 * p + noise(rng)); },
        [&](int d, int) { return d > 0 && drop(rng); });
    std::vector<int> periods;
    std::vector<double> y;
    for (const auto& e : series.entries) {
      periods.push_back(e.period);
      y.push_back(static_cast<double>(e.count));
    }
    const auto oracle = hubflow::testing::normal_equations(periods, y, 12);
    const auto fit = fit_dummy_regression(series, PeriodScheme::uniform());
    for (int j = 0; j < 11; ++j) {
      EXPECT_LT(rel(fit.dummies[j].estimate, static_cast<double>(oracle.beta[j])), 1e-8);
    }
    EXPECT_LT(rel(fit.intercept.estimate, static_cast<double>(oracle.beta[11])), 1e-8);

    // Residual orthogonality against every design column.
    double norm_y = 0;
    for (double v : y) norm_y += v * v;
    norm_y = std::sqrt(norm_y);
    std::vector<double> dot(12, 0.0);
    double ss_res = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double r = y[i] - predict(fit, periods[i]);
      ss_res += r * r;
      if (periods[i] < 12) dot[periods[i] - 1] += r;
      dot[11] += r;
    }
    for (double d : dot) EXPECT_LT(std::fabs(d), 1e-8 * norm_y);

    const auto& s = fit.statistics;
    EXPECT_NEAR(s.ss_residual, ss_res, 1e-9 * s.ss_total);
    EXPECT_NEAR(s.ss_regression + s.ss_residual, s.ss_total, 1e-9 * s.ss_total);
    EXPECT_EQ(s.observations, y.size());
    EXPECT_NEAR(s.multiple_r, std::sqrt(s.r_square), 1e-12);
    const double n = static_cast<double>(y.size());
    EXPECT_NEAR(s.adjusted_r_square, 1 - (1 - s.r_square) * (n - 1) / (n - 12), 1e-12);

    const double sigma = s.standard_error;
    for (int j = 0; j < 11; ++j) {
      EXPECT_NEAR(fit.dummies[j].standard_error,
                  sigma * std::sqrt(static_cast<double>(oracle.inverse_diagonal[j])), 1e-9);
      EXPECT_NEAR(fit.dummies[j].t_stat, fit.dummies[j].estimate / fit.dummies[j].standard_error, 1e-9);
    }
  }
}

TEST(DummyRegression, UnbalancedPeriodOneStandardErrors) {
  // 26 days with one period-1 observation missing: n = 311. Only the shape of
  // the standard errors matters here, so plant any residual scale s and check
  // the closed-form ratios: SE_0 = s/sqrt(26), SE_1 = s sqrt(1/25 + 1/26),
  // SE_j = s sqrt(2/26).
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> noise(0, 40);
  const auto fit = fit_dummy_regression(
      series_from(26, 12, [&](int, int p) { return 50.0 + 5 * p + noise(rng); },
                  [](int d, int p) { return d == 0 && p == 1; }),
      PeriodScheme::uniform());
  const double s = fit.statistics.standard_error;
  EXPECT_EQ(fit.statistics.observations, 311u);
  EXPECT_EQ(fit.statistics.df_residual, 299);
  EXPECT_EQ(fit.period_counts[0], 25u);
  EXPECT_NEAR(fit.intercept.standard_error, s / std::sqrt(26.0), 1e-10);
  EXPECT_NEAR(fit.dummies[0].standard_error, s * std::sqrt(1.0 / 25 + 1.0 / 26), 1e-10);
  for (int j = 1; j < 11; ++j) EXPECT_NEAR(fit.dummies[j].standard_error, s * std::sqrt(2.0 / 26), 1e-10);
  // With the reference s the same formulas give the reference errors.
  EXPECT_NEAR(22.81944 / std::sqrt(26.0), 4.47526, 1e-5);
  EXPECT_NEAR(22.81944 * std::sqrt(2.0 / 26), 6.328973, 1e-5);
  EXPECT_NEAR(22.81944 * std::sqrt(1.0 / 25 + 1.0 / 26), 6.39195, 1e-5);
}

TEST(DummyRegression, BalancedDesignIdentity) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> level(0, 200);
  std::vector<double> means(12);
  for (auto& m : means) m = level(rng);
  const auto fit = fit_dummy_regression(series_from(5, 12, [&](int, int p) { return means[p - 1]; }),
                                        PeriodScheme::uniform());
  EXPECT_NEAR(fit.intercept.estimate, means[11], 1e-10);
  for (int j = 0; j < 11; ++j) EXPECT_NEAR(fit.dummies[j].estimate, means[j] - means[11], 1e-10);
}

TEST(DummyRegression, EmptyPeriodIsRankDeficient) {
  try {
    fit_dummy_regression(series_from(4, 12, [](int, int p) { return p; }, [](int, int p) { return p == 3; }),
                         PeriodScheme::uniform());
    FAIL() << "expected RankDeficientError";
  } catch (const RankDeficientError& e) {
    EXPECT_EQ(e.period(), 3);
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos);
  }
  EXPECT_THROW(fit_dummy_regression(series_from(4, 12, [](int, int p) { return p; },
                                                [](int, int p) { return p == 12; }),
                                    PeriodScheme::uniform()),
               RankDeficientError);
}

TEST(DummyRegression, TooFewRowsIsDegreesOfFreedomError) {
  EXPECT_THROW(fit_dummy_regression(series_from(1, 12, [](int, int p) { return p; }), PeriodScheme::uniform()),
               DegreesOfFreedomError);
}

TEST(DummyRegression, DesignRow) {
  const auto row = dummy_design_row(3, 12);
  ASSERT_EQ(row.size(), 12u);
  for (int j = 0; j < 11; ++j) EXPECT_EQ(row[j], j == 2 ? 1.0 : 0.0);
  EXPECT_EQ(row[11], 1.0);
  const auto last = dummy_design_row(12, 12);
  for (int j = 0; j < 11; ++j) EXPECT_EQ(last[j], 0.0);
}

TEST(Predict, ReferenceFixture) {
  const auto fit = reference_fixture();
  EXPECT_NEAR(predict(fit, 12), 54.07692, 1e-9);
  EXPECT_NEAR(predict(fit, 9), 152.46154, 1e-9);
  EXPECT_NEAR(predict(fit, 1), 54.07692 - 28.4369, 1e-9);
  EXPECT_THROW(predict(fit, 0), ArgumentError);
  EXPECT_THROW(predict(fit, 13), ArgumentError);
}

TEST(LeastSquares, RankDeficientColumns) {
  Matrix x(4, 2);
  for (std::size_t i = 0; i < 4; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = 2.0;
  }
  const std::vector<double> y = {1, 2, 3, 4};
  EXPECT_THROW(solve_least_squares(x, y), RankDeficientError);
}

TEST(LeastSquares, GeneralDesignMatchesOracle) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0, 1);
  Matrix x(40, 4);
  std::vector<double> y(40);
  std::vector<std::vector<long double>> xtx(4, std::vector<long double>(4, 0));
  std::vector<long double> xty(4, 0);
  for (std::size_t i = 0; i < 40; ++i) {
    for (std::size_t j = 0; j < 4; ++j) x(i, j) = g(rng);
    y[i] = g(rng);
    for (std::size_t a = 0; a < 4; ++a) {
      xty[a] += x(i, a) * y[i];
      for (std::size_t b = 0; b < 4; ++b) xtx[a][b] += x(i, a) * x(i, b);
    }
  }
  const auto beta = hubflow::testing::gauss_jordan(xtx, xty);
  const auto sol = solve_least_squares(x, y);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(sol.coefficients[j], static_cast<double>(beta[j]), 1e-12);
  for (std::size_t i = 0; i < 40; ++i) EXPECT_NEAR(sol.fitted[i] + sol.residuals[i], y[i], 1e-12);
}

TEST(Mape, Examples) {
  const auto fit = fit_dummy_regression(series_from(2, 12, [](int, int p) { return 110.0 + 0 * p; }),
                                        PeriodScheme::uniform());
  FlowSeries holdout = series_from(1, 12, [](int, int) { return 100.0; });
  const auto r = validate_mape(fit, holdout);
  EXPECT_NEAR(r.mean_percent, 10.0, 1e-9);
  EXPECT_NEAR(r.max_percent, 10.0, 1e-9);
  EXPECT_NEAR(r.min_percent, 10.0, 1e-9);
  EXPECT_EQ(r.samples.size(), 12u);

  const auto exact = validate_mape(fit, series_from(1, 12, [](int, int) { return 110.0; }));
  EXPECT_NEAR(exact.max_percent, 0.0, 1e-10);
  EXPECT_NEAR(exact.mean_percent, 0.0, 1e-10);
}

TEST(Mape, ZeroActualsExcludedAndEmptyIsError) {
  const auto fit = fit_dummy_regression(series_from(2, 12, [](int, int p) { return 10.0 * p; }),
                                        PeriodScheme::uniform());
  const auto r = validate_mape(fit, series_from(1, 12, [](int, int p) { return p <= 2 ? 0.0 : 10.0 * p; }));
  EXPECT_EQ(r.excluded_zero_actuals, 2u);
  EXPECT_EQ(r.samples.size(), 10u);
  EXPECT_THROW(validate_mape(fit, series_from(1, 12, [](int, int) { return 0.0; })), ArgumentError);
  EXPECT_THROW(validate_mape(fit, FlowSeries{}), ArgumentError);
}

TEST(Mape, MinMeanMaxOrdering) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> u(1, 300);
  const auto fit = fit_dummy_regression(series_from(10, 12, [&](int, int) { return u(rng); }),
                                        PeriodScheme::uniform());
  for (int round = 0; round < 20; ++round) {
    const auto r = validate_mape(fit, series_from(2, 12, [&](int, int) { return u(rng); }));
    EXPECT_LE(r.min_percent, r.mean_percent);
    EXPECT_LE(r.mean_percent, r.max_percent);
    EXPECT_GE(r.min_percent, 0.0);
  }
}

TEST(Report, RoundTrip) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> u(1, 300);
  const auto fit = fit_dummy_regression(series_from(10, 12, [&](int, int) { return u(rng); }),
                                        PeriodScheme::uniform());
  const auto json = fit_report_to_json(fit, std::nullopt);
  EXPECT_TRUE(json.at("validation").is_null());
  EXPECT_EQ(json.at("coefficients").at(0).at("name"), "Intercept");
  const auto back = fit_from_report_json(json);
  EXPECT_EQ(back.periods, 12);
  for (int p = 1; p <= 12; ++p) EXPECT_EQ(predict(back, p), predict(fit, p));
  EXPECT_EQ(back.statistics.observations, fit.statistics.observations);
  EXPECT_THROW(fit_from_report_json(nlohmann::json::object()), FormatError);
}

TEST(Report, ExactFitWritesNullForInfiniteF) {
  const auto fit = fit_dummy_regression(series_from(2, 12, [](int, int p) { return 10.0 * p; }),
                                        PeriodScheme::uniform());
  const auto json = fit_report_to_json(fit, std::nullopt);
  EXPECT_TRUE(json["anova"]["regression"]["f"].is_null());
  EXPECT_NO_THROW(nlohmann::json::parse(json.dump()));
}
