#include <gtest/gtest.h>

#include <cmath>

#include "rslope/penalties.hpp"

using namespace rslope;

TEST(BuildLambda, Formula)
{
    PenaltyConfig cfg;
    cfg.c_lambda = 1.0;
    const auto lam = build_lambda(100, 200, cfg);
    ASSERT_EQ(lam.size(), 200u);
    EXPECT_NEAR(lam[0], std::sqrt((1.0 + std::log(200.0)) / 100.0), 1e-15);
    EXPECT_NEAR(lam[0], 0.25096, 1e-5);
    EXPECT_DOUBLE_EQ(lam[199], 0.1);
    for (std::size_t i = 1; i < lam.size(); ++i)
        EXPECT_LT(lam[i], lam[i - 1]);
}

TEST(BuildLambda, LinearInConstantExactly)
{
    PenaltyConfig one, two;
    one.c_lambda = 1.0;
    two.c_lambda = 2.0;
    one.c_mu = 1.0;
    two.c_mu = 2.0;
    const auto a = build_lambda(37, 91, one), b = build_lambda(37, 91, two);
    for (std::size_t i = 0; i < a.size(); ++i)
        EXPECT_EQ(b[i], 2.0 * a[i]);
    for (auto regime : {MuRegime::sorted_subgauss, MuRegime::sorted_heavy, MuRegime::fixed}) {
        one.regime = two.regime = regime;
        one.tau = two.tau = regime == MuRegime::sorted_subgauss ? kSubGaussian : 3.0;
        const auto m1 = build_mu(53, one), m2 = build_mu(53, two);
        for (std::size_t i = 0; i < m1.size(); ++i)
            EXPECT_EQ(m2[i], 2.0 * m1[i]);
    }
}

TEST(BuildMu, Examples)
{
    PenaltyConfig cfg;
    cfg.c_mu = 1.0;
    cfg.regime = MuRegime::sorted_heavy;
    cfg.tau = 2.0;
    EXPECT_NEAR(build_mu(100, cfg)[3], 0.5, 1e-15);

    cfg.regime = MuRegime::fixed;
    cfg.delta = std::exp(-4.0);
    const auto fixed = build_mu(100, cfg);
    for (std::size_t i = 0; i < fixed.size(); ++i)
        EXPECT_NEAR(fixed[i], 0.5, 1e-12);

    cfg.regime = MuRegime::sorted_subgauss;
    cfg.tau = kSubGaussian;
    const auto sg = build_mu(100, cfg);
    EXPECT_DOUBLE_EQ(sg[99], 0.1);
}

TEST(BuildMu, HeavyConvergesToConstantForLargeTau)
{
    PenaltyConfig cfg;
    cfg.c_mu = 1.5;
    cfg.regime = MuRegime::sorted_heavy;
    cfg.tau = 1e6;
    const auto mu = build_mu(400, cfg);
    const double limit = 1.5 / std::sqrt(400.0);
    for (std::size_t i : {0u, 1u, 9u, 99u, 399u})
        EXPECT_NEAR(mu[i] / limit, 1.0, 1e-4);
}

TEST(BuildMu, Rejections)
{
    PenaltyConfig cfg;
    cfg.regime = MuRegime::fixed;
    cfg.tau = 2.0;
    cfg.delta = std::exp(-20.0);
    EXPECT_THROW(build_mu(10, cfg), std::invalid_argument);
    cfg.regime = MuRegime::sorted_heavy;
    cfg.tau = kSubGaussian;
    EXPECT_THROW(build_mu(10, cfg), std::invalid_argument);
    cfg.regime = MuRegime::sorted_subgauss;
    cfg.tau = 3.0;
    EXPECT_THROW(build_mu(10, cfg), std::invalid_argument);
    cfg.tau = kSubGaussian;
    cfg.c_mu = 0.0;
    EXPECT_THROW(build_mu(10, cfg), std::invalid_argument);
    cfg.c_mu = 1.0;
    cfg.delta = 1.0;
    EXPECT_THROW(cfg.check(), std::invalid_argument);
    cfg.delta = 0.5;
    cfg.tau = 1.5;
    cfg.regime = MuRegime::sorted_heavy;
    EXPECT_THROW(cfg.check(), std::invalid_argument);
}

TEST(BuildSequences, AlwaysValidWeightSequences)
{
    for (std::size_t n : {1u, 2u, 7u, 100u, 1000u})
        for (double tau : {2.0, 3.5, 10.0}) {
            PenaltyConfig cfg;
            cfg.regime = MuRegime::sorted_heavy;
            cfg.tau = tau;
            const auto mu = build_mu(n, cfg);
            EXPECT_NO_THROW(WeightSequence::validate({mu.weights().begin(), mu.weights().end()}));
            const auto lam = build_lambda(n, 3 * n, cfg);
            EXPECT_NO_THROW(WeightSequence::validate({lam.weights().begin(), lam.weights().end()}));
        }
}

TEST(Compat, Examples)
{
    PenaltyConfig lam_cfg;
    lam_cfg.c_lambda = 1.0;
    PenaltyConfig mu_cfg;
    mu_cfg.c_mu = 3.0;
    mu_cfg.regime = MuRegime::sorted_heavy;
    mu_cfg.tau = 2.0;
    const auto lam = build_lambda(100, 100, lam_cfg);
    EXPECT_TRUE(check_lambda_mu_compat(lam, build_mu(100, mu_cfg)));
    EXPECT_TRUE(check_lambda_mu_compat(lam, lam));
    EXPECT_FALSE(check_lambda_mu_compat(lam, lam.scaled(0.5)));
}

TEST(MuRegime, StringRoundTrip)
{
    for (auto r : {MuRegime::sorted_heavy, MuRegime::sorted_subgauss, MuRegime::fixed})
        EXPECT_EQ(mu_regime_from_string(to_string(r)), r);
    EXPECT_THROW(mu_regime_from_string("nope"), std::invalid_argument);
}
