#include "rslope/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "rslope/errors.hpp"
#include "rslope/rng.hpp"

namespace rslope {

namespace {

enum Stream : std::uint64_t { kDesign = 1, kNoise = 2, kBeta = 3, kContamination = 4, kLowerBound = 5 };

// The first k entries of a random permutation of 0..n-1, sorted.
std::vector<Eigen::Index> random_subset(std::size_t n, std::size_t k, StreamRng& rng)
{
    std::vector<Eigen::Index> idx(n);
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(k);
    return idx;
}

double amplitude(std::size_t o, std::size_t n, double tau)
{
    const double frac = static_cast<double>(o) / static_cast<double>(n);
    if (std::isinf(tau))
        return std::sqrt(std::log(1.0 / frac));
    return std::pow(frac, -1.0 / tau);
}

bool is_identity(const Matrix& S)
{
    return S.rows() == S.cols() && S.isIdentity(0.0);
}

} // namespace

std::string to_string(NoiseFamily family)
{
    switch (family) {
    case NoiseFamily::gaussian: return "gaussian";
    case NoiseFamily::student_t: return "student_t";
    case NoiseFamily::symmetric_pareto: return "symmetric_pareto";
    case NoiseFamily::rademacher: return "rademacher";
    }
    return "unknown";
}

NoiseFamily noise_family_from_string(const std::string& name)
{
    if (name == "gaussian") return NoiseFamily::gaussian;
    if (name == "student_t") return NoiseFamily::student_t;
    if (name == "symmetric_pareto") return NoiseFamily::symmetric_pareto;
    if (name == "rademacher") return NoiseFamily::rademacher;
    throw std::invalid_argument("unknown noise family '" + name + "'");
}

std::string to_string(RowFamily family)
{
    return family == RowFamily::gaussian ? "gaussian" : "rademacher";
}

RowFamily row_family_from_string(const std::string& name)
{
    if (name == "gaussian") return RowFamily::gaussian;
    if (name == "rademacher") return RowFamily::rademacher;
    throw std::invalid_argument("unknown design family '" + name + "'");
}

std::string to_string(AdversaryStrategy strategy)
{
    switch (strategy) {
    case AdversaryStrategy::none: return "none";
    case AdversaryStrategy::random_large: return "random_large";
    case AdversaryStrategy::residual_aligned: return "residual_aligned";
    case AdversaryStrategy::theorem3: return "theorem3";
    }
    return "unknown";
}

AdversaryStrategy adversary_from_string(const std::string& name)
{
    if (name == "none") return AdversaryStrategy::none;
    if (name == "random_large") return AdversaryStrategy::random_large;
    if (name == "residual_aligned") return AdversaryStrategy::residual_aligned;
    if (name == "theorem3") return AdversaryStrategy::theorem3;
    throw std::invalid_argument("unknown adversary strategy '" + name + "'");
}

double NoiseSpec::effective_shape() const
{
    if (shape > 0.0)
        return shape;
    switch (family) {
    case NoiseFamily::student_t: return tau + 1.0;
    case NoiseFamily::symmetric_pareto: return tau + 0.5;
    default: return 0.0;
    }
}

double NoiseSpec::raw_scale() const
{
    const double k = effective_shape();
    switch (family) {
    case NoiseFamily::student_t: return std::sqrt(k / (k - 2.0));
    case NoiseFamily::symmetric_pareto: return std::sqrt(k / (k - 2.0));
    default: return 1.0;
    }
}

double NoiseSpec::moment_bound() const
{
    if (std::isinf(tau))
        return 1.0;
    const double k = effective_shape();
    const double scale = raw_scale();
    double raw = 1.0;
    switch (family) {
    case NoiseFamily::gaussian:
        raw = std::pow(2.0, tau / 2.0) * std::tgamma((tau + 1.0) / 2.0) / std::sqrt(M_PI);
        break;
    case NoiseFamily::student_t:
        raw = std::pow(k, tau / 2.0) * std::tgamma((tau + 1.0) / 2.0) * std::tgamma((k - tau) / 2.0) /
              (std::sqrt(M_PI) * std::tgamma(k / 2.0));
        break;
    case NoiseFamily::symmetric_pareto:
        raw = k / (k - tau);
        break;
    case NoiseFamily::rademacher:
        raw = 1.0;
        break;
    }
    return std::pow(raw, 1.0 / tau) / scale;
}

void NoiseSpec::check() const
{
    if (!(tau >= 2.0))
        throw std::invalid_argument("noise tau must be at least 2");
    const double k = effective_shape();
    switch (family) {
    case NoiseFamily::gaussian:
    case NoiseFamily::rademacher:
        break;
    case NoiseFamily::student_t:
        if (std::isinf(tau) && shape <= 0.0)
            throw std::invalid_argument("student_t needs a finite tau or explicit degrees of freedom");
        if (!(k > 2.0))
            throw std::invalid_argument("student_t with at most 2 degrees of freedom has infinite variance");
        if (!(k > tau))
            throw std::invalid_argument("student_t degrees of freedom must exceed tau");
        break;
    case NoiseFamily::symmetric_pareto:
        if (std::isinf(tau) && shape <= 0.0)
            throw std::invalid_argument("symmetric_pareto needs a finite tau or explicit tail index");
        if (!(k > 2.0))
            throw std::invalid_argument("symmetric_pareto tail index must exceed 2");
        if (!(k > tau))
            throw std::invalid_argument("symmetric_pareto tail index must exceed tau");
        break;
    }
}

Vector assemble_response(const Matrix& X, VectorRef beta, VectorRef theta, double sigma, VectorRef xi)
{
    const double root_n = std::sqrt(static_cast<double>(X.rows()));
    Vector Y = X * beta;
    for (Eigen::Index i = 0; i < Y.size(); ++i)
        Y[i] = Y[i] + root_n * theta[i] + sigma * xi[i];
    return Y;
}

Matrix gen_covariance(std::size_t p, const CovarianceSpec& spec)
{
    if (p == 0)
        throw std::invalid_argument("gen_covariance: p must be positive");
    const auto d = static_cast<Eigen::Index>(p);
    if (spec.kind == CovarianceKind::identity)
        return Matrix::Identity(d, d);
    if (!(std::abs(spec.rho) < 1.0))
        throw std::invalid_argument("gen_covariance: ar1 needs |rho| < 1");
    Matrix S(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            S(i, j) = std::pow(spec.rho, static_cast<double>(std::abs(i - j)));
    return S;
}

Matrix gen_design(std::size_t n, std::size_t p, const Matrix& Sigma, RowFamily rows, std::uint64_t seed)
{
    const auto rn = static_cast<Eigen::Index>(n);
    const auto cp = static_cast<Eigen::Index>(p);
    if (Sigma.rows() != cp || Sigma.cols() != cp)
        throw DimensionMismatch("gen_design: Sigma must be p x p");
    StreamRng rng(seed);
    Matrix Z(rn, cp);
    if (rows == RowFamily::gaussian) {
        std::normal_distribution<double> normal;
        for (Eigen::Index j = 0; j < cp; ++j)
            for (Eigen::Index i = 0; i < rn; ++i)
                Z(i, j) = normal(rng);
    } else {
        for (Eigen::Index j = 0; j < cp; ++j)
            for (Eigen::Index i = 0; i < rn; ++i)
                Z(i, j) = (rng() >> 63) ? 1.0 : -1.0;
    }
    if (is_identity(Sigma))
        return Z;
    Eigen::LLT<Matrix> llt(Sigma);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("gen_design: Sigma is not positive definite");
    const Matrix L = llt.matrixL();
    return Z * L.transpose();
}

Vector gen_noise(std::size_t n, const NoiseSpec& spec, std::uint64_t seed)
{
    spec.check();
    StreamRng rng(seed);
    Vector xi(static_cast<Eigen::Index>(n));
    const double scale = spec.raw_scale();
    switch (spec.family) {
    case NoiseFamily::gaussian: {
        std::normal_distribution<double> normal;
        for (Eigen::Index i = 0; i < xi.size(); ++i)
            xi[i] = normal(rng);
        break;
    }
    case NoiseFamily::student_t: {
        std::student_t_distribution<double> t(spec.effective_shape());
        for (Eigen::Index i = 0; i < xi.size(); ++i)
            xi[i] = t(rng) / scale;
        break;
    }
    case NoiseFamily::symmetric_pareto: {
        const double inv_alpha = 1.0 / spec.effective_shape();
        for (Eigen::Index i = 0; i < xi.size(); ++i) {
            const bool negative = rng() >> 63;
            const double u = 1.0 - rng.uniform();  // (0, 1]
            const double mag = std::pow(u, -inv_alpha) / scale;
            xi[i] = negative ? -mag : mag;
        }
        break;
    }
    case NoiseFamily::rademacher:
        for (Eigen::Index i = 0; i < xi.size(); ++i)
            xi[i] = (rng() >> 63) ? 1.0 : -1.0;
        break;
    }
    return xi;
}

Vector gen_beta(std::size_t p, std::size_t s, double magnitude, BetaPattern pattern, std::uint64_t seed)
{
    if (s > p)
        throw std::invalid_argument("gen_beta: s exceeds p");
    Vector beta = Vector::Zero(static_cast<Eigen::Index>(p));
    StreamRng rng(seed);
    std::vector<Eigen::Index> idx(p);
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    for (std::size_t k = 0; k < s; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, p - 1);
        std::swap(idx[k], idx[pick(rng)]);
        const double sign = (rng() >> 63) ? 1.0 : -1.0;
        const double value = pattern == BetaPattern::flat ? magnitude : magnitude / static_cast<double>(k + 1);
        beta[idx[k]] = sign * value;
    }
    return beta;
}

RegressionInstance contaminate(const RegressionInstance& inst, AdversaryStrategy strategy, std::size_t o,
                               double magnitude)
{
    const auto n = static_cast<std::size_t>(inst.ds.n());
    if (o > n)
        throw std::invalid_argument("contaminate: o exceeds n");
    RegressionInstance out = inst;
    Vector theta = Vector::Zero(static_cast<Eigen::Index>(n));
    std::vector<Eigen::Index> support;
    StreamRng rng(inst.seed, kContamination);

    if (o > 0) {
        switch (strategy) {
        case AdversaryStrategy::none:
            throw std::invalid_argument("contaminate: strategy 'none' with o > 0");
        case AdversaryStrategy::random_large:
            support = random_subset(n, o, rng);
            for (auto i : support)
                theta[i] = (rng() >> 63) ? magnitude : -magnitude;
            break;
        case AdversaryStrategy::residual_aligned: {
            const Vector noise = inst.truth.sigma * inst.xi;
            const auto order = order_by_magnitude(noise);
            support.assign(order.begin(), order.begin() + static_cast<long>(o));
            std::sort(support.begin(), support.end());
            for (auto i : support)
                theta[i] = noise[i] < 0.0 ? -magnitude : magnitude;
            break;
        }
        case AdversaryStrategy::theorem3: {
            support = random_subset(n, o, rng);
            std::sort(support.begin(), support.end());
            const double level = magnitude * inst.truth.sigma * amplitude(o, n, inst.truth.noise.tau) /
                                 std::sqrt(static_cast<double>(n));
            for (auto i : support)
                theta[i] = inst.ds.X()(i, 0) < 0.0 ? level : -level;
            break;
        }
        }
    }
    out.truth.theta_star = theta;
    out.truth.support_O = std::move(support);
    out.ds = Dataset(inst.ds.X(), assemble_response(inst.ds.X(), out.truth.beta_star, theta,
                                                    inst.truth.sigma, inst.xi));
    return out;
}

RegressionInstance make_instance(const InstanceSpec& spec, std::uint64_t seed)
{
    if (spec.s > spec.p)
        throw std::invalid_argument("make_instance: s exceeds p");
    if (spec.o > spec.n)
        throw std::invalid_argument("make_instance: o exceeds n");
    if (!(spec.sigma >= 0.0))
        throw std::invalid_argument("make_instance: sigma must be non-negative");
    GroundTruth truth;
    truth.Sigma = gen_covariance(spec.p, spec.covariance);
    truth.noise = spec.noise;
    truth.sigma = spec.sigma;
    Matrix X = gen_design(spec.n, spec.p, truth.Sigma, spec.rows, derive_seed(seed, kDesign));
    Vector xi = gen_noise(spec.n, spec.noise, derive_seed(seed, kNoise));
    truth.beta_star = gen_beta(spec.p, spec.s, spec.beta_magnitude, spec.pattern, derive_seed(seed, kBeta));
    for (Eigen::Index j = 0; j < truth.beta_star.size(); ++j)
        if (truth.beta_star[j] != 0.0)
            truth.support_S.push_back(j);
    truth.theta_star = Vector::Zero(static_cast<Eigen::Index>(spec.n));
    Vector Y = assemble_response(X, truth.beta_star, truth.theta_star, spec.sigma, xi);
    RegressionInstance inst{Dataset(std::move(X), std::move(Y)), std::move(truth), seed, std::move(xi)};
    if (spec.o > 0)
        return contaminate(inst, spec.adversary, spec.o, spec.adversary_magnitude);
    return inst;
}

std::pair<RegressionInstance, RegressionInstance> lower_bound_pair(std::size_t n, std::size_t o, double sigma,
                                                                   double tau, std::uint64_t seed, std::size_t p)
{
    if (o == 0 || o > n)
        throw std::invalid_argument("lower_bound_pair: need 1 <= o <= n");
    if (!(tau >= 2.0))
        throw std::invalid_argument("lower_bound_pair: tau must be at least 2");
    if (!(sigma > 0.0))
        throw std::invalid_argument("lower_bound_pair: sigma must be positive");
    if (p == 0)
        throw std::invalid_argument("lower_bound_pair: p must be positive");

    const auto rn = static_cast<Eigen::Index>(n);
    const double frac = static_cast<double>(o) / static_cast<double>(n);
    const double amp = amplitude(o, n, tau);
    const double x = std::min(amp * amp * frac, 1.0);  // (o/n)^{1-2/tau}
    const double sigma_tilde = sigma * std::sqrt(1.0 + x * (1.0 - x));
    const double root_n = std::sqrt(static_cast<double>(n));

    const Matrix Sigma = Matrix::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    Matrix X = gen_design(n, p, Sigma, RowFamily::rademacher, derive_seed(seed, kLowerBound));
    const Vector v = X.col(0);

    Vector beta = Vector::Zero(static_cast<Eigen::Index>(p));
    beta[0] = sigma * amp * frac;

    // One Bernoulli(o/n) outlier pattern and Rademacher noise per model.
    auto draw = [&](std::uint64_t stream, Vector& theta, Vector& xi, std::vector<Eigen::Index>& support) {
        StreamRng rng(seed, stream);
        theta = Vector::Zero(rn);
        xi.resize(rn);
        for (Eigen::Index i = 0; i < rn; ++i) {
            if (rng.uniform() < frac) {
                theta[i] = -sigma * amp * v[i] / root_n;
                support.push_back(i);
            }
            xi[i] = (rng() >> 63) ? 1.0 : -1.0;
        }
    };

    NoiseSpec rad = NoiseSpec::rademacher();
    rad.tau = tau;

    GroundTruth ta;
    ta.Sigma = Sigma;
    ta.sigma = sigma;
    ta.noise = rad;
    ta.beta_star = beta;
    ta.support_S = {0};
    Vector xi_a;
    draw(kLowerBound + 1, ta.theta_star, xi_a, ta.support_O);
    Vector Ya = assemble_response(X, beta, ta.theta_star, sigma, xi_a);

    // Same formula with fresh draws, then reread as pure noise of level sigma~.
    Vector theta_b, xi_b;
    std::vector<Eigen::Index> unused;
    draw(kLowerBound + 2, theta_b, xi_b, unused);
    const Vector Yb_raw = assemble_response(X, beta, theta_b, sigma, xi_b);
    Vector zeta = Yb_raw / sigma_tilde;

    GroundTruth tb;
    tb.Sigma = Sigma;
    tb.sigma = sigma_tilde;
    tb.noise = rad;
    tb.beta_star = Vector::Zero(static_cast<Eigen::Index>(p));
    tb.theta_star = Vector::Zero(rn);
    Vector Yb = assemble_response(X, tb.beta_star, tb.theta_star, sigma_tilde, zeta);

    RegressionInstance a{Dataset(X, std::move(Ya)), std::move(ta), seed, std::move(xi_a)};
    RegressionInstance b{Dataset(std::move(X), std::move(Yb)), std::move(tb), seed, std::move(zeta)};
    return {std::move(a), std::move(b)};
}

} // namespace rslope
