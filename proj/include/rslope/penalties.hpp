#pragma once

#include <cstddef>
#include <limits>
#include <string>

#include "rslope/sorted_l1.hpp"

namespace rslope {

/// Moment exponent of the noise; `kSubGaussian` stands for tau = infinity.
inline constexpr double kSubGaussian = std::numeric_limits<double>::infinity();

enum class MuRegime { sorted_heavy, sorted_subgauss, fixed };

std::string to_string(MuRegime regime);
MuRegime mu_regime_from_string(const std::string& name);

/// Constants and noise assumptions behind the lambda / mu sequences.
///
/// `c_lambda` and `c_mu` are the unspecified "large absolute constants";
/// everything else is known to the statistician (tau, or a lower bound of
/// it) or chosen by them (delta, used only by the fixed regime).
struct PenaltyConfig {
    double c_lambda = 1.0;
    double c_mu = 0.7;
    double tau = kSubGaussian;
    double delta = 0.05;
    MuRegime regime = MuRegime::sorted_subgauss;

    /// Throws std::invalid_argument on a broken invariant.
    void check() const;
};

/// lambda_i = c_lambda * sqrt(log(e p / i) / n), i = 1..p.
WeightSequence build_lambda(std::size_t n, std::size_t p, const PenaltyConfig& cfg);

/// Length-n mu sequence for the configured regime.
WeightSequence build_mu(std::size_t n, const PenaltyConfig& cfg);

/// lam[i] <= mu[i] for every i below min(len(lam), len(mu)).
bool check_lambda_mu_compat(const WeightSequence& lam, const WeightSequence& mu);

} // namespace rslope
