#include "rslope/penalties.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace rslope {

std::string to_string(MuRegime regime)
{
    switch (regime) {
    case MuRegime::sorted_heavy: return "sorted_heavy";
    case MuRegime::sorted_subgauss: return "sorted_subgauss";
    case MuRegime::fixed: return "fixed";
    }
    return "unknown";
}

MuRegime mu_regime_from_string(const std::string& name)
{
    if (name == "sorted_heavy")
        return MuRegime::sorted_heavy;
    if (name == "sorted_subgauss")
        return MuRegime::sorted_subgauss;
    if (name == "fixed")
        return MuRegime::fixed;
    throw std::invalid_argument("unknown mu regime '" + name + "'");
}

void PenaltyConfig::check() const
{
    if (!(c_lambda > 0.0) || !std::isfinite(c_lambda))
        throw std::invalid_argument("c_lambda must be positive and finite");
    if (!(c_mu > 0.0) || !std::isfinite(c_mu))
        throw std::invalid_argument("c_mu must be positive and finite");
    if (!(tau >= 2.0))
        throw std::invalid_argument("tau must be >= 2 (or inf)");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("delta must lie in (0, 1)");
    if (regime == MuRegime::sorted_subgauss && std::isfinite(tau))
        throw std::invalid_argument("sorted_subgauss requires tau = inf");
    if (regime == MuRegime::sorted_heavy && !std::isfinite(tau))
        throw std::invalid_argument("sorted_heavy requires a finite tau");
}

namespace {

std::vector<double> log_sequence(std::size_t n_obs, std::size_t length, double c)
{
    // c * sqrt(log(e * length / i) / n); the last entry is c / sqrt(n) exactly.
    std::vector<double> w(length);
    const double len = static_cast<double>(length);
    const double n = static_cast<double>(n_obs);
    for (std::size_t i = 1; i <= length; ++i) {
        const double l = 1.0 + std::log(len / static_cast<double>(i));
        w[i - 1] = c * std::sqrt(l / n);
    }
    return w;
}

void require_positive(std::size_t n, const char* what)
{
    if (n == 0)
        throw std::invalid_argument(std::string(what) + " must be positive");
}

} // namespace

WeightSequence build_lambda(std::size_t n, std::size_t p, const PenaltyConfig& cfg)
{
    require_positive(n, "n");
    require_positive(p, "p");
    cfg.check();
    return WeightSequence::validate(log_sequence(n, p, cfg.c_lambda));
}

WeightSequence build_mu(std::size_t n, const PenaltyConfig& cfg)
{
    require_positive(n, "n");
    cfg.check();
    const double nd = static_cast<double>(n);
    const double root_n = std::sqrt(nd);
    switch (cfg.regime) {
    case MuRegime::sorted_subgauss:
        return WeightSequence::validate(log_sequence(n, n, cfg.c_mu));
    case MuRegime::sorted_heavy: {
        std::vector<double> w(n);
        for (std::size_t i = 1; i <= n; ++i)
            w[i - 1] = cfg.c_mu * (std::pow(nd / static_cast<double>(i), 1.0 / cfg.tau) / root_n);
        return WeightSequence::validate(std::move(w));
    }
    case MuRegime::fixed: {
        const double log_inv_delta = -std::log(cfg.delta);
        if (log_inv_delta > nd)
            throw std::invalid_argument("fixed mu: log(1/delta) exceeds n");
        // tau = inf gives exponent 0, i.e. the constant c_mu / sqrt(n).
        const double level = cfg.c_mu * (std::pow(nd / log_inv_delta, 1.0 / cfg.tau) / root_n);
        return WeightSequence::validate(std::vector<double>(n, level));
    }
    }
    throw std::logic_error("unreachable mu regime");
}

bool check_lambda_mu_compat(const WeightSequence& lam, const WeightSequence& mu)
{
    const std::size_t k = std::min(lam.size(), mu.size());
    for (std::size_t i = 0; i < k; ++i)
        if (lam[i] > mu[i])
            return false;
    return true;
}

} // namespace rslope
