#include "rslope/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "rslope/errors.hpp"
#include "rslope/rng.hpp"

namespace rslope {

namespace {

enum Stream : std::uint64_t { kProbe1 = 11, kProbe2 = 12, kProbe3 = 13, kKappa = 14, kFixedV = 15 };

constexpr std::size_t kMaxSparse = 20;
constexpr std::size_t kExtremeDirections = 5;

double sigma_norm(const Matrix& Sigma, VectorRef u)
{
    return std::sqrt(std::max(u.dot(Sigma * u), 0.0));
}

void check_design_dims(const Matrix& X, const Matrix& Sigma, const WeightSequence& lam)
{
    require_same_size(static_cast<std::size_t>(X.cols()), static_cast<std::size_t>(Sigma.rows()),
                      "columns of X vs Sigma");
    require_same_size(static_cast<std::size_t>(Sigma.rows()), static_cast<std::size_t>(Sigma.cols()),
                      "Sigma rows vs columns");
    require_same_size(static_cast<std::size_t>(X.cols()), lam.size(), "columns of X vs lambda");
}

double deviation_term(std::size_t n, const IncoherenceConstants& k)
{
    if (!(k.delta > 0.0 && k.delta < 1.0) || !(k.c_prime >= 0.0))
        throw std::invalid_argument("incoherence constants need 0 < delta < 1 and c_prime >= 0");
    return k.c_prime * std::sqrt((std::log(1.0 / k.delta) + 1.0) / static_cast<double>(n));
}

Vector gaussian(Eigen::Index d, StreamRng& rng)
{
    std::normal_distribution<double> g;
    Vector z(d);
    for (Eigen::Index i = 0; i < d; ++i)
        z[i] = g(rng);
    return z;
}

Vector sparse_gaussian(Eigen::Index d, std::size_t k, StreamRng& rng)
{
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(d));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    k = std::min(k, idx.size());
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    std::normal_distribution<double> g;
    Vector z = Vector::Zero(d);
    for (std::size_t i = 0; i < k; ++i)
        z[idx[i]] = g(rng);
    return z;
}

// Generalized eigenvectors of (X'X / n, Sigma) for the smallest eigenvalues,
// i.e. the minimizers of |Xu|^2 / (n |u|_Sigma^2).
std::vector<Vector> flattest_directions(const Matrix& X, const Matrix& Sigma)
{
    const double n = static_cast<double>(X.rows());
    const Matrix G = X.transpose() * X / n;
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(G, Sigma);
    std::vector<Vector> out;
    if (es.info() != Eigen::Success)
        return out;
    const Eigen::Index k = std::min<Eigen::Index>(static_cast<Eigen::Index>(kExtremeDirections), G.rows());
    for (Eigen::Index j = 0; j < k; ++j)
        out.push_back(es.eigenvectors().col(j));
    return out;
}

// Probe number i of the property-1 family cycle, before normalization.
Vector design_probe(std::size_t i, Eigen::Index p, const std::vector<Vector>& flat, StreamRng& rng)
{
    const std::size_t max_s = std::min<std::size_t>(static_cast<std::size_t>(p), kMaxSparse);
    switch (i % 3) {
    case 0: return sparse_gaussian(p, 1 + (i / 3) % max_s, rng);
    case 1: return gaussian(p, rng);
    default:
        if (flat.empty())
            return gaussian(p, rng);
        {
            const Vector& f = flat[(i / 3) % flat.size()];
            const double scale = 0.1 * std::exp2(-static_cast<double>((i / 3) % 8));
            return f / std::max(f.norm(), 1e-300) + scale * gaussian(p, rng) / std::sqrt(static_cast<double>(p));
        }
    }
}

bool normalize_sigma(const Matrix& Sigma, Vector& u)
{
    const double s = sigma_norm(Sigma, u);
    if (!(s > 0.0) || !std::isfinite(s))
        return false;
    u /= s;
    return true;
}

bool normalize_l2(Vector& v)
{
    const double s = v.norm();
    if (!(s > 0.0) || !std::isfinite(s))
        return false;
    v /= s;
    return true;
}

double nchoosek_capped(std::size_t p, std::size_t s, double cap)
{
    double c = 1.0;
    for (std::size_t i = 0; i < s; ++i) {
        c = c * static_cast<double>(p - i) / static_cast<double>(i + 1);
        if (c > cap)
            return cap + 1.0;
    }
    return c;
}

bool next_combination(std::vector<Eigen::Index>& c, Eigen::Index p)
{
    const auto k = static_cast<Eigen::Index>(c.size());
    for (Eigen::Index i = k - 1; i >= 0; --i) {
        if (c[static_cast<std::size_t>(i)] < p - k + i) {
            ++c[static_cast<std::size_t>(i)];
            for (Eigen::Index j = i + 1; j < k; ++j)
                c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
            return true;
        }
    }
    return false;
}

double rayleigh(const Matrix& Sigma, VectorRef u)
{
    return u.dot(Sigma * u) / u.dot(u);
}

std::vector<double> sorted_abs_desc(VectorRef xi)
{
    std::vector<double> a(static_cast<std::size_t>(xi.size()));
    for (Eigen::Index i = 0; i < xi.size(); ++i)
        a[static_cast<std::size_t>(i)] = std::abs(xi[i]);
    std::sort(a.begin(), a.end(), std::greater<>());
    return a;
}

// First 0-based position covered by "rank >= o" with 1-based ranks.
std::size_t first_kept(std::size_t o)
{
    return o == 0 ? 0 : o - 1;
}

} // namespace

double property1_margin(const Matrix& X, const Matrix& Sigma, const WeightSequence& lam, VectorRef u)
{
    check_design_dims(X, Sigma, lam);
    require_same_size(static_cast<std::size_t>(X.cols()), static_cast<std::size_t>(u.size()), "probe u");
    const double n = static_cast<double>(X.rows());
    const double l = norm_eval(u, lam);
    return (X * u).squaredNorm() / n - 0.5 * u.dot(Sigma * u) + 0.25 * l * l;
}

double property2_slack(const Matrix& X, const Matrix& Sigma, const WeightSequence& lam,
                       const WeightSequence& lam_n, VectorRef u, VectorRef v, const IncoherenceConstants& k)
{
    check_design_dims(X, Sigma, lam);
    require_same_size(static_cast<std::size_t>(X.rows()), static_cast<std::size_t>(v.size()), "probe v");
    require_same_size(static_cast<std::size_t>(X.rows()), lam_n.size(), "rows of X vs length-n weights");
    const std::size_t n = static_cast<std::size_t>(X.rows());
    const double us = sigma_norm(Sigma, u);
    const double lhs = std::abs(v.dot(X * u)) / std::sqrt(static_cast<double>(n));
    const double rhs = norm_eval(u, lam) * v.norm() / 10.0 + norm_eval(v, lam_n) * us / 10.0 +
                       deviation_term(n, k) * us * v.norm();
    return rhs - lhs;
}

double property3_slack(const Matrix& X, const Matrix& Sigma, const WeightSequence& lam, VectorRef u,
                       VectorRef v, const IncoherenceConstants& k)
{
    check_design_dims(X, Sigma, lam);
    require_same_size(static_cast<std::size_t>(X.rows()), static_cast<std::size_t>(v.size()), "probe v");
    const std::size_t n = static_cast<std::size_t>(X.rows());
    const double us = sigma_norm(Sigma, u);
    const double lhs = std::abs(v.dot(X * u)) / std::sqrt(static_cast<double>(n));
    const double rhs = norm_eval(u, lam) * v.norm() / 10.0 + deviation_term(n, k) * us * v.norm();
    return rhs - lhs;
}

double check_property1(const Matrix& X, const Matrix& Sigma, const WeightSequence& lam, std::size_t probes,
                       std::uint64_t seed)
{
    check_design_dims(X, Sigma, lam);
    if (probes == 0)
        throw std::invalid_argument("check_property1: probes must be positive");
    StreamRng rng(seed, kProbe1);
    const auto flat = flattest_directions(X, Sigma);
    double worst = std::numeric_limits<double>::infinity();
    std::size_t done = 0;
    for (const Vector& f : flat) {
        Vector u = f;
        if (done < probes && normalize_sigma(Sigma, u)) {
            worst = std::min(worst, property1_margin(X, Sigma, lam, u));
            ++done;
        }
    }
    for (std::size_t i = 0; done < probes; ++i) {
        Vector u = design_probe(i, X.cols(), flat, rng);
        if (!normalize_sigma(Sigma, u))
            continue;
        worst = std::min(worst, property1_margin(X, Sigma, lam, u));
        ++done;
    }
    return worst;
}

double check_property2(const Matrix& X, const Matrix& Sigma, const WeightSequence& lam,
                       const WeightSequence& lam_n, std::size_t probes, std::uint64_t seed,
                       const IncoherenceConstants& k)
{
    check_design_dims(X, Sigma, lam);
    require_same_size(static_cast<std::size_t>(X.rows()), lam_n.size(), "rows of X vs length-n weights");
    if (probes == 0)
        throw std::invalid_argument("check_property2: probes must be positive");
    StreamRng rng(seed, kProbe2);
    const auto flat = flattest_directions(X, Sigma);
    const Eigen::LDLT<Matrix> sigma_solve(Sigma);
    const Eigen::Index n = X.rows();
    const std::size_t max_s = std::min<std::size_t>(static_cast<std::size_t>(n), kMaxSparse);
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0, done = 0; done < probes; ++i) {
        Vector u, v;
        switch (i % 4) {
        case 0:
            u = design_probe(i / 4, X.cols(), flat, rng);
            v = gaussian(n, rng);
            break;
        case 1:
            u = design_probe(i / 4, X.cols(), flat, rng);
            v = X * u;
            break;
        case 2:
            v = (i / 4) % 2 ? gaussian(n, rng) : sparse_gaussian(n, 1 + (i / 8) % max_s, rng);
            u = sigma_solve.solve(X.transpose() * v);
            break;
        default:
            v = sparse_gaussian(n, 1 + (i / 4) % max_s, rng);
            u = design_probe(i / 4, X.cols(), flat, rng);
            break;
        }
        if (!normalize_sigma(Sigma, u) || !normalize_l2(v))
            continue;
        worst = std::min(worst, property2_slack(X, Sigma, lam, lam_n, u, v, k));
        ++done;
    }
    return worst;
}

double check_property3(const Matrix& X, const Matrix& Sigma, const WeightSequence& lam, VectorRef v,
                       std::size_t probes, std::uint64_t seed, const IncoherenceConstants& k)
{
    check_design_dims(X, Sigma, lam);
    require_same_size(static_cast<std::size_t>(X.rows()), static_cast<std::size_t>(v.size()), "fixed v");
    if (probes == 0)
        throw std::invalid_argument("check_property3: probes must be positive");
    StreamRng rng(seed, kProbe3);
    const auto flat = flattest_directions(X, Sigma);
    const Eigen::LDLT<Matrix> sigma_solve(Sigma);
    // The unpenalized maximizer of |v'Xu| / |u|_Sigma and its sparse truncations.
    const Vector best = sigma_solve.solve(X.transpose() * v);
    const auto order = order_by_magnitude(best);
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0, done = 0; done < probes; ++i) {
        Vector u;
        if (i % 2 == 0) {
            const std::size_t keep = 1 + (i / 2) % order.size();
            u = Vector::Zero(best.size());
            for (std::size_t j = 0; j < keep; ++j)
                u[order[j]] = best[order[j]];
        } else {
            u = design_probe(i / 2, X.cols(), flat, rng);
        }
        if (!normalize_sigma(Sigma, u))
            continue;
        worst = std::min(worst, property3_slack(X, Sigma, lam, u, v, k));
        ++done;
    }
    return worst;
}

KappaEstimate estimate_kappa(const Matrix& Sigma, const WeightSequence& lam, std::size_t s, std::size_t probes,
                             std::uint64_t seed)
{
    const auto p = static_cast<std::size_t>(Sigma.rows());
    require_same_size(p, static_cast<std::size_t>(Sigma.cols()), "Sigma rows vs columns");
    require_same_size(p, lam.size(), "Sigma vs lambda");
    if (s < 1 || s > p)
        throw std::invalid_argument("estimate_kappa: s must lie in [1, p]");
    if (probes == 0)
        throw std::invalid_argument("estimate_kappa: probes must be positive");

    Eigen::SelfAdjointEigenSolver<Matrix> full(Sigma);
    KappaEstimate est;
    est.lambda_min = full.eigenvalues()[0];
    est.lambda_max = full.eigenvalues()[static_cast<Eigen::Index>(p) - 1];
    const double radius = 4.0 * std::sqrt(lam.sum_of_squares(s));
    auto in_cone = [&](const Vector& u) { return norm_eval(u, lam) <= radius * u.norm() * (1.0 + 1e-12); };

    StreamRng rng(seed, kKappa);
    double best = std::numeric_limits<double>::infinity();
    std::vector<Vector> sparse_minimizers;
    auto probe_subset = [&](const std::vector<Eigen::Index>& S) {
        const auto k = static_cast<Eigen::Index>(S.size());
        Matrix sub(k, k);
        for (Eigen::Index a = 0; a < k; ++a)
            for (Eigen::Index b = 0; b < k; ++b)
                sub(a, b) = Sigma(S[static_cast<std::size_t>(a)], S[static_cast<std::size_t>(b)]);
        Eigen::SelfAdjointEigenSolver<Matrix> es(sub);
        Vector u = Vector::Zero(static_cast<Eigen::Index>(p));
        for (Eigen::Index a = 0; a < k; ++a)
            u[S[static_cast<std::size_t>(a)]] = es.eigenvectors()(a, 0);
        best = std::min(best, rayleigh(Sigma, u));
        if (sparse_minimizers.size() < 64)
            sparse_minimizers.push_back(u);
    };

    const std::size_t mixtures = std::min<std::size_t>(probes / 10, 64);
    const std::size_t budget = probes - mixtures;
    if (nchoosek_capped(p, s, static_cast<double>(budget)) <= static_cast<double>(budget)) {
        std::vector<Eigen::Index> S(s);
        std::iota(S.begin(), S.end(), Eigen::Index{0});
        do
            probe_subset(S);
        while (next_combination(S, static_cast<Eigen::Index>(p)));
    } else {
        std::vector<Eigen::Index> idx(p);
        for (std::size_t t = 0; t < budget; ++t) {
            std::iota(idx.begin(), idx.end(), Eigen::Index{0});
            for (std::size_t i = 0; i < s; ++i) {
                std::uniform_int_distribution<std::size_t> pick(i, p - 1);
                std::swap(idx[i], idx[pick(rng)]);
            }
            std::vector<Eigen::Index> S(idx.begin(), idx.begin() + static_cast<long>(s));
            std::sort(S.begin(), S.end());
            probe_subset(S);
        }
    }

    // Push sparse minimizers toward the global minimal eigenvector while
    // staying inside the cone.
    const Vector w = full.eigenvectors().col(0);
    if (in_cone(w))
        best = std::min(best, rayleigh(Sigma, w));
    for (std::size_t m = 0; m < mixtures && !sparse_minimizers.empty(); ++m) {
        const Vector& base = sparse_minimizers[m % sparse_minimizers.size()];
        const Vector dir = (m / sparse_minimizers.size()) % 2 ? Vector(-w) : w;
        double lo = 0.0, hi = 1.0;
        while (in_cone(base + hi * dir) && hi < 1e6)
            hi *= 2.0;
        for (int it = 0; it < 50; ++it) {
            const double mid = 0.5 * (lo + hi);
            (in_cone(base + mid * dir) ? lo : hi) = mid;
        }
        const Vector u = base + lo * dir;
        best = std::min(best, rayleigh(Sigma, u));
    }
    est.kappa_hat = best;
    return est;
}

DesignCheckReport check_design(const Matrix& X, const Matrix& Sigma, const WeightSequence& lam,
                               const WeightSequence& lam_n, std::size_t s, std::size_t probes,
                               std::uint64_t seed, const IncoherenceConstants& k)
{
    DesignCheckReport rep;
    rep.probes = probes;
    rep.property1_margin = check_property1(X, Sigma, lam, probes, seed);
    rep.property2_margin = check_property2(X, Sigma, lam, lam_n, probes, seed, k);
    StreamRng rng(seed, kFixedV);
    rep.property3_margin = check_property3(X, Sigma, lam, gaussian(X.rows(), rng), probes, seed, k);
    rep.kappa_hat = estimate_kappa(Sigma, lam, s, probes, seed).kappa_hat;
    rep.violated = rep.property1_margin < 0.0 || rep.property2_margin < 0.0 || rep.property3_margin < 0.0;
    return rep;
}

NoiseEventReport check_event_E(VectorRef xi, std::size_t o_prime, const WeightSequence& mu, double c_prime)
{
    const auto n = static_cast<std::size_t>(xi.size());
    require_same_size(n, mu.size(), "noise vs mu");
    if (o_prime >= n)
        throw std::invalid_argument("check_event_E: o_prime must be below n");
    if (!(c_prime > 0.0))
        throw std::invalid_argument("check_event_E: c_prime must be positive");
    const auto a = sorted_abs_desc(xi);
    const double dn = static_cast<double>(n);
    double tail = 0.0;
    bool quantile = true;
    for (std::size_t j = first_kept(o_prime); j < n; ++j) {
        tail += a[j] * a[j];
        quantile = quantile && a[j] * a[j] <= dn * mu[j] * mu[j];
    }
    NoiseEventReport rep;
    rep.o_prime = o_prime;
    rep.lower_ok = dn / c_prime <= tail;
    rep.upper_ok = tail <= c_prime * dn;
    rep.quantile_ok = quantile;
    return rep;
}

bool check_order_stat_bound(VectorRef xi, std::size_t o, const WeightSequence& mu)
{
    const auto n = static_cast<std::size_t>(xi.size());
    require_same_size(n, mu.size(), "noise vs mu");
    if (o < 1 || o > n)
        throw std::invalid_argument("check_order_stat_bound: o must lie in [1, n]");
    const auto a = sorted_abs_desc(xi);
    const double root_n = std::sqrt(static_cast<double>(n));
    double worst = 0.0;
    for (std::size_t j = first_kept(o); j < n; ++j) {
        if (a[j] == 0.0)
            break;
        worst = std::max(worst, mu[j] > 0.0 ? a[j] / (root_n * mu[j]) : std::numeric_limits<double>::infinity());
    }
    return worst < 1.0 / 20.0;
}

bool check_variance_window(VectorRef xi, std::size_t o)
{
    const auto n = static_cast<std::size_t>(xi.size());
    if (o > n)
        throw std::invalid_argument("check_variance_window: o exceeds n");
    const auto a = sorted_abs_desc(xi);
    double tail = 0.0;
    for (std::size_t j = first_kept(o); j < n; ++j)
        tail += a[j] * a[j];
    const double dn = static_cast<double>(n);
    return dn / 100.0 <= tail && tail <= 2.0 * dn;
}

double max_ratio_statistic(VectorRef xi)
{
    const auto a = sorted_abs_desc(xi);
    const double dn = static_cast<double>(a.size());
    double best = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        best = std::max(best, a[i] / std::sqrt(std::log(M_E * dn / static_cast<double>(i + 1))));
    return best;
}

bool cone_membership(VectorRef u, VectorRef v, const Matrix& Sigma, const WeightSequence& lam,
                     const WeightSequence& mu, std::size_t s, std::size_t o, double delta, double kappa,
                     double c0)
{
    require_same_size(static_cast<std::size_t>(u.size()), lam.size(), "u vs lambda");
    require_same_size(static_cast<std::size_t>(v.size()), mu.size(), "v vs mu");
    require_same_size(static_cast<std::size_t>(u.size()), static_cast<std::size_t>(Sigma.rows()), "u vs Sigma");
    if (!(kappa > 0.0))
        throw std::invalid_argument("cone_membership: kappa must be positive");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("cone_membership: delta must lie in (0, 1)");
    const double n = static_cast<double>(mu.size());
    const double lhs = norm_eval(u, lam) + norm_eval(v, mu);
    const double a = std::sqrt(lam.sum_of_squares(std::min(s, lam.size())) / kappa + std::log(1.0 / delta) / n);
    const double b = std::sqrt(mu.sum_of_squares(std::min(o, mu.size())));
    return lhs <= c0 * (a * sigma_norm(Sigma, u) + b * v.norm());
}

std::size_t default_o_prime(std::size_t o, double delta)
{
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("default_o_prime: delta must lie in (0, 1)");
    return o + static_cast<std::size_t>(std::ceil(std::log(1.0 / delta)));
}

} // namespace rslope
