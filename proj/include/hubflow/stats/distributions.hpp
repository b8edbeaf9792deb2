#pragma once

namespace hubflow::stats {

// Lanczos approximation, x > 0. Reentrant, unlike std::lgamma which writes
// the global signgam.
double log_gamma(double x);
double log_beta(double a, double b);

// Regularized incomplete beta I_x(a, b) and its natural log. The log form
// stays finite for tails far below the smallest double.
double regularized_beta(double x, double a, double b);
double log_regularized_beta(double x, double a, double b);

// Two-sided p = 2 P(T >= |t|) for Student's t with df degrees of freedom.
// Throws ArgumentError for df < 1.
double tail_probability_t(double t, double df);
double log_tail_probability_t(double t, double df);

// Upper tail P(F' >= f) of the F distribution. Throws ArgumentError for a
// negative statistic or degrees of freedom below 1.
double tail_probability_f(double f, double df1, double df2);
double log_tail_probability_f(double f, double df1, double df2);

}  // namespace hubflow::stats
