#include "rslope/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rslope {

double quantile(std::vector<double> sample, double q)
{
    if (sample.empty())
        throw std::invalid_argument("quantile: empty sample");
    if (!(q >= 0.0 && q <= 1.0))
        throw std::invalid_argument("quantile: level must lie in [0, 1]");
    std::sort(sample.begin(), sample.end());
    const double h = q * static_cast<double>(sample.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sample.size() - 1);
    return sample[lo] + (h - static_cast<double>(lo)) * (sample[hi] - sample[lo]);
}

SlopeFit fit_loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys)
{
    if (xs.size() != ys.size())
        throw std::invalid_argument("fit_loglog_slope: xs and ys differ in length");
    if (xs.size() < 3)
        throw std::invalid_argument("fit_loglog_slope: needs at least three points");
    const auto m = xs.size();
    std::vector<double> lx(m), ly(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0) || !std::isfinite(xs[i]) || !std::isfinite(ys[i]))
            throw std::invalid_argument("fit_loglog_slope: inputs must be positive and finite");
        lx[i] = std::log(xs[i]);
        ly[i] = std::log(ys[i]);
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(m);
    my /= static_cast<double>(m);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0.0))
        throw std::invalid_argument("fit_loglog_slope: xs must not all be equal");
    SlopeFit fit;
    fit.points = m;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double e = ly[i] - fit.intercept - fit.slope * lx[i];
        rss += e * e;
    }
    fit.std_error = std::sqrt(rss / static_cast<double>(m - 2) / sxx);
    return fit;
}

double ks_statistic(std::vector<double> a, std::vector<double> b)
{
    if (a.empty() || b.empty())
        throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double t = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == t)
            ++i;
        while (j < b.size() && b[j] == t)
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_critical_value(std::size_t m, std::size_t k, double alpha)
{
    if (m == 0 || k == 0)
        throw std::invalid_argument("ks_critical_value: empty sample");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("ks_critical_value: alpha must lie in (0, 1)");
    const double c = std::sqrt(-std::log(alpha / 2.0) / 2.0);
    const double dm = static_cast<double>(m), dk = static_cast<double>(k);
    return c * std::sqrt((dm + dk) / (dm * dk));
}

} // namespace rslope
