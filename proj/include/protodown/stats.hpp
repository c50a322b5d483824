#pragma once

#include <span>
#include <vector>

namespace protodown::stats {

double mean(std::span<const double> x);
/// Sample variance (n - 1 denominator); 0 for fewer than two values.
double variance(std::span<const double> x);

/// Two-sided Student-t p-value, via the regularized incomplete beta.
double t_two_sided_p(double t, double df);

double digamma(double x);
double trigamma(double x);
/// Solves trigamma(y) = x for y > 0 by Newton iteration.
double trigamma_inverse(double x);

double normal_quantile(double p);

/// Type-7 (linear interpolation) quantile of sorted data.
double quantile_sorted(std::span<const double> sorted, double p);

/// Average ranks (1-based), ties share the mean rank.
std::vector<double> ranks(std::span<const double> x);
double spearman(std::span<const double> x, std::span<const double> y);
double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace protodown::stats
