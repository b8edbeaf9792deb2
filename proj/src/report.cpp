#include "hubflow/stats/report.hpp"

#include <cmath>
#include <limits>

#include "hubflow/error.hpp"

namespace hubflow::stats {

namespace {

using nlohmann::json;

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json number(const std::optional<double>& v) {
  return v ? number(*v) : json(nullptr);
}

double read_number(const json& j, const char* key, double if_null) {
  if (!j.contains(key)) {
    throw FormatError(std::string("fit report is missing '") + key + "'");
  }
  const auto& v = j.at(key);
  if (v.is_null()) return if_null;
  if (!v.is_number()) {
    throw FormatError(std::string("fit report field '") + key + "' is not a number");
  }
  return v.get<double>();
}

json coefficient_json(const Coefficient& c) {
  return {{"name", c.name},
          {"coefficient", number(c.estimate)},
          {"standard_error", number(c.standard_error)},
          {"t_stat", number(c.t_stat)},
          {"p_value", number(c.p_value)}};
}

Coefficient coefficient_from(const json& j) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  Coefficient c;
  c.name = j.value("name", "");
  c.estimate = read_number(j, "coefficient", nan);
  c.standard_error = read_number(j, "standard_error", nan);
  c.t_stat = read_number(j, "t_stat", nan);
  c.p_value = read_number(j, "p_value", nan);
  return c;
}

json source_json(const AnovaSource& s) {
  return {{"ss", number(s.ss)}, {"df", s.df}, {"ms", number(s.ms)}};
}

}  // namespace

json validation_to_json(const ValidationReport& report) {
  json samples = json::array();
  for (const auto& s : report.samples) {
    samples.push_back({{"date", format_date(s.date)},
                       {"period", s.period},
                       {"actual", number(s.actual)},
                       {"predicted", number(s.predicted)},
                       {"ape_percent", number(s.ape_percent)}});
  }
  return {{"maximum_error", number(report.max_percent)},
          {"minimum_error", number(report.min_percent)},
          {"mean_error", number(report.mean_percent)},
          {"excluded_zero_actuals", report.excluded_zero_actuals},
          {"samples", samples}};
}

json fit_report_to_json(const RegressionFit& fit,
                        const std::optional<ValidationReport>& validation) {
  const auto& s = fit.statistics;
  json coefficients = json::array();
  coefficients.push_back(coefficient_json(fit.intercept));
  for (const auto& c : fit.dummies) coefficients.push_back(coefficient_json(c));
  return {
      {"periods", fit.periods},
      {"period_counts", fit.period_counts},
      {"regression_statistics",
       {{"multiple_r", number(s.multiple_r)},
        {"r_square", number(s.r_square)},
        {"adjusted_r_square", number(s.adjusted_r_square)},
        {"standard_error", number(s.standard_error)},
        {"observations", s.observations}}},
      {"anova",
       {{"regression",
         {{"df", s.df_regression},
          {"ss", number(s.ss_regression)},
          {"ms", number(s.ms_regression)},
          {"f", number(s.f)},
          {"significance_f", number(s.significance_f)}}},
        {"residual",
         {{"df", s.df_residual},
          {"ss", number(s.ss_residual)},
          {"ms", number(s.ms_residual)}}},
        {"total", {{"df", s.df_total}, {"ss", number(s.ss_total)}}}}},
      {"coefficients", coefficients},
      {"validation", validation ? validation_to_json(*validation) : json(nullptr)},
  };
}

RegressionFit fit_from_report_json(const json& report) {
  try {
    RegressionFit fit;
    const auto& coefficients = report.at("coefficients");
    if (!coefficients.is_array() || coefficients.size() < 2) {
      throw FormatError("fit report needs an intercept and at least one dummy");
    }
    fit.periods = report.value("periods", static_cast<int>(coefficients.size()));
    if (static_cast<std::size_t>(fit.periods) != coefficients.size()) {
      throw FormatError("fit report coefficient count does not match periods");
    }
    fit.intercept = coefficient_from(coefficients.at(0));
    for (std::size_t i = 1; i < coefficients.size(); ++i) {
      fit.dummies.push_back(coefficient_from(coefficients.at(i)));
    }
    if (report.contains("period_counts")) {
      fit.period_counts = report.at("period_counts").get<std::vector<std::size_t>>();
    }
    const auto& rs = report.at("regression_statistics");
    const auto& an = report.at("anova");
    auto& s = fit.statistics;
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    s.multiple_r = read_number(rs, "multiple_r", nan);
    s.r_square = read_number(rs, "r_square", nan);
    s.adjusted_r_square = read_number(rs, "adjusted_r_square", nan);
    s.standard_error = read_number(rs, "standard_error", nan);
    s.observations = rs.at("observations").get<std::size_t>();
    s.predictors = fit.periods - 1;
    s.df_regression = an.at("regression").at("df").get<int>();
    s.df_residual = an.at("residual").at("df").get<int>();
    s.df_total = an.at("total").at("df").get<int>();
    s.ss_regression = read_number(an.at("regression"), "ss", nan);
    s.ss_residual = read_number(an.at("residual"), "ss", nan);
    s.ss_total = read_number(an.at("total"), "ss", nan);
    s.ms_regression = read_number(an.at("regression"), "ms", nan);
    s.ms_residual = read_number(an.at("residual"), "ms", nan);
    s.f = read_number(an.at("regression"), "f",
                      std::numeric_limits<double>::infinity());
    s.significance_f = read_number(an.at("regression"), "significance_f", nan);
    return fit;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed fit report: ") + e.what());
  }
}

json anova_to_json(const AnovaResult& a) {
  return {{"alpha", a.alpha},
          {"degenerate", a.degenerate},
          {"date", source_json(a.rows)},
          {"period", source_json(a.cols)},
          {"error", source_json(a.error)},
          {"total", source_json(a.total)},
          {"f_date", number(a.f_rows)},
          {"f_period", number(a.f_cols)},
          {"p_date", number(a.p_rows)},
          {"p_period", number(a.p_cols)},
          {"date_significant", a.rows_significant},
          {"period_significant", a.cols_significant}};
}

}  // namespace hubflow::stats
