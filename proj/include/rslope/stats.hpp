#pragma once

#include <cstddef>
#include <vector>

namespace rslope {

/// Linear interpolation between order statistics (type 7): position
/// q (m - 1) in the sorted sample.
double quantile(std::vector<double> sample, double q);

struct SlopeFit {
    double slope = 0.0;
    double std_error = 0.0;
    double intercept = 0.0;
    std::size_t points = 0;
};

/// Ordinary least squares of log y on log x. Needs at least three points, all
/// positive.
SlopeFit fit_loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys);

/// sup_t |F_a(t) - F_b(t)| of the two empirical distribution functions.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// Asymptotic critical value c(alpha) sqrt((m + k) / (m k)) of the two-sample
/// test, c(alpha) = sqrt(-log(alpha / 2) / 2).
double ks_critical_value(std::size_t m, std::size_t k, double alpha);

} // namespace rslope
