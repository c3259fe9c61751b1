#pragma once

#include <cstddef>
#include <cstdint>

#include "rslope/sorted_l1.hpp"
#include "rslope/types.hpp"

namespace rslope {

/// Constants of the incoherence checks: the C' of the deviation term and the
/// confidence level delta inside sqrt((log(1/delta) + 1) / n).
struct IncoherenceConstants {
    double c_prime = 4.0;
    double delta = 0.01;
};

struct DesignCheckReport {
    double property1_margin = 0.0;
    double property2_margin = 0.0;
    double property3_margin = 0.0;
    double kappa_hat = 0.0;
    std::size_t probes = 0;
    bool violated = false;
};

struct NoiseEventReport {
    bool lower_ok = false;
    bool upper_ok = false;
    bool quantile_ok = false;
    std::size_t o_prime = 0;

    bool holds() const { return lower_ok && upper_ok && quantile_ok; }
};

/// Probe results for the restricted eigenvalue: `kappa_hat` is the smallest
/// Rayleigh quotient seen inside the cone, hence an upper bound on kappa(s);
/// `lambda_min` is a lower bound.
struct KappaEstimate {
    double kappa_hat = 0.0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
};

/// |Xu|^2 / n - |u|_Sigma^2 / 2 + |u|_lam^2 / 4.
double property1_margin(const Matrix& X, const Matrix& Sigma, const WeightSequence& lam, VectorRef u);

/// Right side minus left side of the two-sided incoherence bound. `lam_n`
/// weighs the length-n vector v.
double property2_slack(const Matrix& X, const Matrix& Sigma, const WeightSequence& lam,
                       const WeightSequence& lam_n, VectorRef u, VectorRef v,
                       const IncoherenceConstants& k = {});

/// Right side minus left side of the one-sided bound at fixed v.
double property3_slack(const Matrix& X, const Matrix& Sigma, const WeightSequence& lam, VectorRef u,
                       VectorRef v, const IncoherenceConstants& k = {});

/// Minimum property-1 margin over probes normalized to |u|_Sigma = 1:
/// random sparse (support 1..min(p, 20)), random dense, and the directions
/// minimizing |Xu|^2 / |u|_Sigma^2 with perturbations of them.
double check_property1(const Matrix& X, const Matrix& Sigma, const WeightSequence& lam, std::size_t probes,
                       std::uint64_t seed);

/// Minimum slack over pairs with |u|_Sigma = |v|_2 = 1. Pairs are random,
/// aligned (v along Xu) or dual (u along Sigma^{-1} X'v).
double check_property2(const Matrix& X, const Matrix& Sigma, const WeightSequence& lam,
                       const WeightSequence& lam_n, std::size_t probes, std::uint64_t seed,
                       const IncoherenceConstants& k = {});

/// Minimum slack over u at the given v.
double check_property3(const Matrix& X, const Matrix& Sigma, const WeightSequence& lam, VectorRef v,
                       std::size_t probes, std::uint64_t seed, const IncoherenceConstants& k = {});

/// Probes the cone |u|_lam <= 4 sqrt(sum_{i<=s} lam_i^2) |u|_2. Every
/// s-subset is probed through its smallest eigenvector when there are at
/// most `probes` of them, random subsets otherwise; cone-boundary mixtures
/// with the global minimal eigenvector are added.
KappaEstimate estimate_kappa(const Matrix& Sigma, const WeightSequence& lam, std::size_t s, std::size_t probes,
                             std::uint64_t seed);

/// All three properties plus kappa(s). Property 3 uses a fixed Gaussian v
/// drawn from `seed`, independent of X.
DesignCheckReport check_design(const Matrix& X, const Matrix& Sigma, const WeightSequence& lam,
                               const WeightSequence& lam_n, std::size_t s, std::size_t probes,
                               std::uint64_t seed, const IncoherenceConstants& k = {});

/// Ranks are 1-based and "j >= o_prime" keeps rank o_prime itself (all
/// ranks when o_prime is 0).
NoiseEventReport check_event_E(VectorRef xi, std::size_t o_prime, const WeightSequence& mu, double c_prime);

/// max_{i >= o} |xi|_(i) / (sqrt(n) mu_i) < 1/20.
bool check_order_stat_bound(VectorRef xi, std::size_t o, const WeightSequence& mu);

/// n / 100 <= sum_{i >= o} xi_(i)^2 <= 2 n.
bool check_variance_window(VectorRef xi, std::size_t o);

/// max_i |xi|_(i) / sqrt(log(e n / i)).
double max_ratio_statistic(VectorRef xi);

/// |u|_lam + |v|_mu <= c0 (sqrt(sum_{i<=s} lam_i^2 / kappa + log(1/delta) / n) |u|_Sigma
///                       + sqrt(sum_{i<=o} mu_i^2) |v|_2).
bool cone_membership(VectorRef u, VectorRef v, const Matrix& Sigma, const WeightSequence& lam,
                     const WeightSequence& mu, std::size_t s, std::size_t o, double delta, double kappa,
                     double c0 = 4.0);

/// o' = o + ceil(log(1/delta)).
std::size_t default_o_prime(std::size_t o, double delta);

} // namespace rslope
