#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rslope/penalties.hpp"
#include "rslope/solver.hpp"
#include "rslope/types.hpp"

namespace rslope {

enum class NoiseFamily { gaussian, student_t, symmetric_pareto, rademacher };
std::string to_string(NoiseFamily family);
NoiseFamily noise_family_from_string(const std::string& name);

/// Unit-variance noise law with declared moment exponent `tau`.
///
/// `shape` is the degrees of freedom (student_t) or the tail index
/// (symmetric_pareto); 0 derives it from tau as tau + 1 and tau + 0.5.
struct NoiseSpec {
    NoiseFamily family = NoiseFamily::gaussian;
    double tau = kSubGaussian;
    double shape = 0.0;

    static NoiseSpec gaussian() { return {}; }
    static NoiseSpec rademacher() { return {NoiseFamily::rademacher, kSubGaussian, 0.0}; }
    static NoiseSpec student_t(double tau) { return {NoiseFamily::student_t, tau, 0.0}; }
    static NoiseSpec symmetric_pareto(double tau) { return {NoiseFamily::symmetric_pareto, tau, 0.0}; }

    double effective_shape() const;
    /// Standard deviation of the raw draw, divided out by gen_noise.
    double raw_scale() const;
    /// Bound a with E|xi|^tau <= a^tau for the standardized law (finite tau).
    double moment_bound() const;
    void check() const;
};

enum class CovarianceKind { identity, ar1 };

struct CovarianceSpec {
    CovarianceKind kind = CovarianceKind::identity;
    double rho = 0.0;
};

enum class RowFamily { gaussian, rademacher };
std::string to_string(RowFamily family);
RowFamily row_family_from_string(const std::string& name);

enum class BetaPattern { flat, decaying };

enum class AdversaryStrategy { none, random_large, residual_aligned, theorem3 };
std::string to_string(AdversaryStrategy strategy);
AdversaryStrategy adversary_from_string(const std::string& name);

struct GroundTruth {
    Vector beta_star;
    Vector theta_star;
    double sigma = 1.0;
    Matrix Sigma;
    NoiseSpec noise;
    std::vector<Eigen::Index> support_S;
    std::vector<Eigen::Index> support_O;
};

struct RegressionInstance {
    Dataset ds;
    GroundTruth truth;
    std::uint64_t seed = 0;
    Vector xi;
};

/// X beta + sqrt(n) theta + sigma xi, evaluated in one fixed order so that
/// every generator reproduces Y bit for bit.
Vector assemble_response(const Matrix& X, VectorRef beta, VectorRef theta, double sigma, VectorRef xi);

/// Identity or the Toeplitz matrix rho^|i-j|.
Matrix gen_covariance(std::size_t p, const CovarianceSpec& spec);

/// Rows Sigma^{1/2} z with z isotropic Gaussian or Rademacher.
Matrix gen_design(std::size_t n, std::size_t p, const Matrix& Sigma, RowFamily rows, std::uint64_t seed);

Vector gen_noise(std::size_t n, const NoiseSpec& spec, std::uint64_t seed);

/// s-sparse vector on a random support. Flat: entries +-magnitude; decaying:
/// the k-th largest has modulus magnitude / k.
Vector gen_beta(std::size_t p, std::size_t s, double magnitude, BetaPattern pattern, std::uint64_t seed);

/// Replaces theta_star by an o-sparse contamination and rebuilds Y.
///
/// random_large: random support, entries +-magnitude. residual_aligned: the
/// o largest |sigma xi_i|, entries magnitude * sign(sigma xi_i). theorem3: random
/// support of size exactly o, entries -magnitude * sigma (o/n)^{-1/tau}
/// sign(X_i1) / sqrt(n) (sqrt(log(n/o)) in place of the power when tau is
/// infinite); magnitude 1 is the two-point construction.
RegressionInstance contaminate(const RegressionInstance& inst, AdversaryStrategy strategy, std::size_t o,
                               double magnitude);

struct InstanceSpec {
    std::size_t n = 100;
    std::size_t p = 200;
    std::size_t s = 5;
    double beta_magnitude = 1.0;
    BetaPattern pattern = BetaPattern::flat;
    CovarianceSpec covariance;
    RowFamily rows = RowFamily::gaussian;
    NoiseSpec noise;
    double sigma = 1.0;
    std::size_t o = 0;
    AdversaryStrategy adversary = AdversaryStrategy::none;
    double adversary_magnitude = 1.0;
};

/// Deterministic in (spec, seed); design, noise, signal and contamination use
/// separate streams.
RegressionInstance make_instance(const InstanceSpec& spec, std::uint64_t seed);

/// Two models with the same response law. The first has beta = b e_1 with
/// b = sigma (o/n)^{1-1/tau}, Rademacher noise and Bernoulli(o/n) outliers
/// on a Rademacher design; the second has no signal and no outliers, noise
/// level sigma~ with sigma~^2 = sigma^2 (1 + x (1 - x)), x = (o/n)^{1-2/tau}.
/// For tau = infinity, (o/n)^{-1/tau} is replaced by sqrt(log(n/o)).
std::pair<RegressionInstance, RegressionInstance> lower_bound_pair(std::size_t n, std::size_t o, double sigma,
                                                                   double tau, std::uint64_t seed,
                                                                   std::size_t p = 1);

/// Instance file: a versioned binary layout, or CSV (y first, then x columns).
void save_instance(const RegressionInstance& inst, const std::string& path);
RegressionInstance load_instance(const std::string& path);
Dataset load_dataset_csv(const std::string& path);

} // namespace rslope
