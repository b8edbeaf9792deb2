#pragma once

#include <optional>

#include <nlohmann/json.hpp>

#include "hubflow/stats/anova.hpp"
#include "hubflow/stats/regression.hpp"

namespace hubflow::stats {

// Fit report layout:
//   regression_statistics  multiple_r, r_square, adjusted_r_square,
//                          standard_error, observations
//   anova                  regression/residual/total rows of df, ss, ms, f,
//                          significance_f
//   coefficients           [{name, coefficient, standard_error, t_stat,
//                           p_value}], Intercept first
//   validation             maximum_error, minimum_error, mean_error (percent)
//                          plus per-sample detail; null when absent
// Non-finite numbers are written as null.
nlohmann::json fit_report_to_json(const RegressionFit& fit,
                                  const std::optional<ValidationReport>& validation);
// Inverse of fit_report_to_json for the model part. Throws FormatError.
RegressionFit fit_from_report_json(const nlohmann::json& report);

nlohmann::json validation_to_json(const ValidationReport& report);
nlohmann::json anova_to_json(const AnovaResult& anova);

}  // namespace hubflow::stats
