#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rslope/datagen.hpp"
#include "rslope/diagnostics.hpp"
#include "rslope/penalties.hpp"

using namespace rslope;

namespace {

WeightSequence zeros(std::size_t d)
{
    return WeightSequence::validate(std::vector<double>(d, 0.0));
}

Vector unit(Eigen::Index d, Eigen::Index i)
{
    Vector e = Vector::Zero(d);
    e[i] = 1.0;
    return e;
}

} // namespace

TEST(Property1, IsometryAndZeroDesign)
{
    const int n = 6;
    const Matrix I = Matrix::Identity(n, n);
    const Matrix X = std::sqrt(static_cast<double>(n)) * I;
    EXPECT_NEAR(property1_margin(X, I, zeros(n), unit(n, 2)), 0.5, 1e-15);
    EXPECT_NEAR(check_property1(X, I, zeros(n), 200, 1), 0.5, 1e-12);
    EXPECT_NEAR(check_property1(Matrix::Zero(n, n), I, zeros(n), 200, 1), -0.5, 1e-12);
}

TEST(Property1, GaussianDesignHasPositiveMargin)
{
    PenaltyConfig pc;
    pc.c_lambda = 2.0;
    const auto lam = build_lambda(200, 50, pc);
    const Matrix I = Matrix::Identity(50, 50);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Matrix X = gen_design(200, 50, I, RowFamily::gaussian, seed);
        EXPECT_GE(check_property1(X, I, lam, 2000, seed), 0.0);
    }
}

TEST(Property23, ZeroVectorsHaveNonNegativeSlack)
{
    const Matrix X = gen_design(30, 10, Matrix::Identity(10, 10), RowFamily::gaussian, 2);
    const Matrix I = Matrix::Identity(10, 10);
    const auto lam = build_lambda(30, 10, {});
    const auto lam_n = build_mu(30, {});
    const Vector v = Vector::Ones(30);
    const Vector u = Vector::Ones(10);
    EXPECT_GE(property2_slack(X, I, lam, lam_n, Vector::Zero(10), v), 0.0);
    EXPECT_DOUBLE_EQ(property2_slack(X, I, lam, lam_n, u, Vector::Zero(30)),
                     norm_eval(Vector::Zero(30), lam_n) * std::sqrt(10.0) / 10.0);
    EXPECT_GE(property3_slack(X, I, lam, Vector::Zero(10), v), 0.0);
    EXPECT_EQ(property3_slack(X, I, lam, u, Vector::Zero(30)), 0.0);
}

TEST(Property23, IdentityDesignBreaksIncoherence)
{
    const int n = 20;
    const Matrix I = Matrix::Identity(n, n);
    const Matrix X = std::sqrt(static_cast<double>(n)) * I;
    const auto small = WeightSequence::validate(std::vector<double>(n, 1e-3));
    IncoherenceConstants k;
    k.c_prime = 0.1;
    const Vector e = unit(n, 0);
    EXPECT_LT(property2_slack(X, I, small, small, e, e, k), 0.0);
    EXPECT_LT(property3_slack(X, I, small, e, e, k), 0.0);
    EXPECT_LT(check_property2(X, I, small, small, 100, 1, k), 0.0);
    EXPECT_LT(check_property3(X, I, small, e, 100, 1, k), 0.0);
}

TEST(Property23, GaussianDesignRandomPairsAreIncoherent)
{
    const auto lam = build_lambda(200, 50, {});
    const auto lam_n = build_mu(200, {});
    const Matrix I = Matrix::Identity(50, 50);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Matrix X = gen_design(200, 50, I, RowFamily::gaussian, seed);
        double worst = std::numeric_limits<double>::infinity();
        for (int t = 0; t < 2000; ++t) {
            Vector u(50), v(200);
            for (auto& x : u)
                x = g(rng);
            for (auto& x : v)
                x = g(rng);
            worst = std::min(worst, property2_slack(X, I, lam, lam_n, u / u.norm(), v / v.norm()));
        }
        EXPECT_GE(worst, 0.0);
        Vector v(200);
        for (auto& x : v)
            x = g(rng);
        EXPECT_GE(check_property3(X, I, lam, v / v.norm(), 2000, seed), 0.0);
    }
}

TEST(Property2, AlignedPairsAreFoundByTheProbeSet)
{
    // v along Xu maximizes |v'Xu|: the probe minimum is at most that slack.
    const Matrix I = Matrix::Identity(50, 50);
    const Matrix X = gen_design(200, 50, I, RowFamily::gaussian, 4);
    const auto lam = build_lambda(200, 50, {});
    const auto lam_n = build_mu(200, {});
    const Vector u = unit(50, 3);
    const Vector v = (X * u).normalized();
    const double aligned = property2_slack(X, I, lam, lam_n, u / std::sqrt(u.dot(I * u)), v);
    EXPECT_LE(check_property2(X, I, lam, lam_n, 4000, 4), aligned + 0.2);
}

TEST(EstimateKappa, Examples)
{
    const auto lam3 = build_lambda(100, 3, {});
    for (std::size_t s = 1; s <= 3; ++s)
        EXPECT_EQ(estimate_kappa(Matrix::Identity(3, 3), lam3, s, 100, 1).kappa_hat, 1.0);
    const auto lam20 = build_lambda(100, 20, {});
    EXPECT_EQ(estimate_kappa(Matrix::Identity(20, 20), lam20, 3, 500, 1).kappa_hat, 1.0);

    Matrix D = Matrix::Zero(2, 2);
    D(0, 0) = 1.0;
    D(1, 1) = 0.01;
    const auto lam2 = build_lambda(100, 2, {});
    EXPECT_LE(estimate_kappa(D, lam2, 1, 10, 1).kappa_hat, 0.01 + 1e-15);

    const Matrix A = gen_covariance(20, {CovarianceKind::ar1, 0.5});
    Eigen::SelfAdjointEigenSolver<Matrix> es(A);
    const auto est = estimate_kappa(A, lam20, 3, 2000, 2);
    EXPECT_GE(est.kappa_hat, es.eigenvalues()[0] - 1e-12);
    EXPECT_LE(est.kappa_hat, es.eigenvalues()[19] + 1e-12);
    EXPECT_NEAR(est.lambda_min, es.eigenvalues()[0], 1e-12);
    EXPECT_NEAR(est.lambda_max, es.eigenvalues()[19], 1e-12);
    EXPECT_GT(est.lambda_min, 0.33);
    EXPECT_LT(est.lambda_max, 3.0);
    EXPECT_GE(est.kappa_hat, est.lambda_min - 1e-12);
    EXPECT_THROW(estimate_kappa(A, lam20, 0, 10, 1), std::invalid_argument);
    EXPECT_THROW(estimate_kappa(A, lam20, 21, 10, 1), std::invalid_argument);
}

TEST(CheckDesign, ReportIsConsistent)
{
    const Matrix I = Matrix::Identity(30, 30);
    const Matrix X = gen_design(100, 30, I, RowFamily::rademacher, 5);
    const auto rep = check_design(X, I, build_lambda(100, 30, {}), build_mu(100, {}), 3, 500, 5);
    EXPECT_EQ(rep.violated,
              rep.property1_margin < 0 || rep.property2_margin < 0 || rep.property3_margin < 0);
    EXPECT_EQ(rep.kappa_hat, 1.0);
    EXPECT_EQ(rep.probes, 500u);
    const auto again = check_design(X, I, build_lambda(100, 30, {}), build_mu(100, {}), 3, 500, 5);
    EXPECT_EQ(again.property2_margin, rep.property2_margin);
}

TEST(EventE, Examples)
{
    const std::size_t n = 50;
    const Vector ones = Vector::Ones(n);
    const auto high = WeightSequence::validate(std::vector<double>(n, 1.0 / std::sqrt(50.0)));
    const auto r = check_event_E(ones, 0, high, 2.0);
    EXPECT_TRUE(r.lower_ok);
    EXPECT_TRUE(r.upper_ok);
    EXPECT_TRUE(r.quantile_ok);
    EXPECT_TRUE(r.holds());
    const auto low = WeightSequence::validate(std::vector<double>(n, 0.99 / std::sqrt(50.0)));
    EXPECT_FALSE(check_event_E(ones, 0, low, 2.0).quantile_ok);
    EXPECT_FALSE(check_event_E(Vector::Zero(n), 0, high, 2.0).lower_ok);
    EXPECT_THROW(check_event_E(ones, n, high, 2.0), std::invalid_argument);
}

TEST(EventE, IsTheConjunctionOfItsParts)
{
    std::mt19937_64 rng(6);
    std::student_t_distribution<double> t(3.0);
    PenaltyConfig pc;
    pc.c_mu = 2.0;
    const auto mu = build_mu(300, pc);
    for (int rep = 0; rep < 200; ++rep) {
        Vector xi(300);
        for (auto& x : xi)
            x = t(rng);
        const std::size_t o = 1 + rng() % 30;
        const auto e = check_event_E(xi, o, mu, 100.0);
        // Quantile part: the order-statistic condition with 1/20 replaced by 1.
        EXPECT_EQ(e.quantile_ok, check_order_stat_bound(xi, o, mu.scaled(20.0)));
        double tail = 0.0;
        std::vector<double> a(xi.data(), xi.data() + 300);
        for (auto& x : a)
            x = std::abs(x);
        std::sort(a.rbegin(), a.rend());
        for (std::size_t j = o - 1; j < 300; ++j)
            tail += a[j] * a[j];
        EXPECT_EQ(e.lower_ok && e.upper_ok, 3.0 <= tail && tail <= 30000.0);
    }
}

TEST(OrderStatBound, Examples)
{
    const auto mu = build_mu(100, {});
    EXPECT_TRUE(check_order_stat_bound(Vector::Zero(100), 1, mu));
    Vector xi = Vector::Constant(100, 1e-4);
    xi[17] = 1e6;
    EXPECT_TRUE(check_order_stat_bound(xi, 2, mu));
    EXPECT_FALSE(check_order_stat_bound(xi, 1, mu));
    xi[3] = 1e6;
    EXPECT_FALSE(check_order_stat_bound(xi, 2, mu));
    EXPECT_THROW(check_order_stat_bound(xi, 0, mu), std::invalid_argument);
}

TEST(OrderStatBound, HeavyTailFailureFrequency)
{
    PenaltyConfig pc;
    pc.regime = MuRegime::sorted_heavy;
    pc.tau = 4.0;
    pc.c_mu = 40.0;
    const auto mu = build_mu(1000, pc);
    int failures = 0;
    const int seeds = 2000;
    for (int seed = 0; seed < seeds; ++seed) {
        const Vector xi = gen_noise(1000, NoiseSpec::student_t(4.0), static_cast<std::uint64_t>(seed));
        failures += !check_order_stat_bound(xi, 30, mu);
    }
    EXPECT_LE(failures, seeds / 20);
}

TEST(VarianceWindow, Examples)
{
    EXPECT_TRUE(check_variance_window(Vector::Ones(40), 0));
    EXPECT_FALSE(check_variance_window(Vector::Zero(40), 0));
    int hits = 0;
    for (int seed = 0; seed < 1000; ++seed)
        hits += check_variance_window(gen_noise(1000, NoiseSpec::gaussian(), static_cast<std::uint64_t>(seed)), 20);
    EXPECT_GE(hits, 990);
}

TEST(MaxRatio, Examples)
{
    EXPECT_EQ(max_ratio_statistic(Vector::Zero(10)), 0.0);
    EXPECT_DOUBLE_EQ(max_ratio_statistic(Vector::Constant(1, -2.5)), 2.5);
    double sum = 0.0;
    for (int seed = 0; seed < 500; ++seed)
        sum += max_ratio_statistic(gen_noise(1000, NoiseSpec::gaussian(), static_cast<std::uint64_t>(seed)));
    EXPECT_LE(sum / 500.0, 20.0);
}

TEST(Cone, Examples)
{
    const Matrix I = Matrix::Identity(10, 10);
    const auto lam = build_lambda(40, 10, {});
    const auto mu = build_mu(40, {});
    EXPECT_TRUE(cone_membership(Vector::Zero(10), Vector::Zero(40), I, lam, mu, 2, 2, 0.05, 1.0));
    Vector u = Vector::Zero(10);
    u[0] = 3.0;
    u[1] = -1.0;
    // Supported on the top-s weights: inside the cone with c0 = 1.
    EXPECT_TRUE(cone_membership(u, Vector::Zero(40), I, lam, mu, 2, 0, 0.05, 1.0, 1.0));
    const Vector dense = Vector::Ones(10);
    EXPECT_FALSE(cone_membership(dense, Vector::Zero(40), I, lam, mu, 1, 0, 0.5, 1.0, 1.0));
    EXPECT_THROW(cone_membership(u, Vector::Zero(40), I, lam, mu, 2, 2, 0.05, 0.0), std::invalid_argument);
}

TEST(DefaultOPrime, AddsTheConfidenceTerm)
{
    EXPECT_EQ(default_o_prime(5, 0.05), 8u);
    EXPECT_EQ(default_o_prime(0, std::exp(-4.0)), 4u);
}
