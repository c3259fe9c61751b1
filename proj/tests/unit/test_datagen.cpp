#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "rslope/datagen.hpp"
#include "rslope/errors.hpp"

using namespace rslope;

namespace {

double sample_mean(const Vector& v) { return v.mean(); }

double sample_var(const Vector& v)
{
    const double m = v.mean();
    return (v.array() - m).square().sum() / static_cast<double>(v.size() - 1);
}

// Two-sample Kolmogorov-Smirnov statistic by merging sorted samples.
double ks_two_sample(std::vector<double> a, std::vector<double> b)
{
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x)
            ++i;
        while (j < b.size() && b[j] == x)
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
    }
    return d;
}

InstanceSpec contaminated_spec(AdversaryStrategy a)
{
    InstanceSpec spec;
    spec.n = 60;
    spec.p = 40;
    spec.s = 4;
    spec.o = 5;
    spec.noise = NoiseSpec::student_t(3.0);
    spec.sigma = 0.7;
    spec.adversary = a;
    spec.adversary_magnitude = 1e3;
    return spec;
}

} // namespace

TEST(GenCovariance, Examples)
{
    EXPECT_EQ(gen_covariance(3, {}), Matrix::Identity(3, 3));
    const Matrix a = gen_covariance(2, {CovarianceKind::ar1, 0.5});
    EXPECT_EQ(a(0, 0), 1.0);
    EXPECT_EQ(a(0, 1), 0.5);
    EXPECT_EQ(a(1, 0), 0.5);
    const Matrix b = gen_covariance(3, {CovarianceKind::ar1, 0.5});
    Eigen::SelfAdjointEigenSolver<Matrix> es(b);
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
    EXPECT_DOUBLE_EQ(b(0, 2), 0.25);
    EXPECT_THROW(gen_covariance(3, {CovarianceKind::ar1, 1.0}), std::invalid_argument);
    EXPECT_THROW(gen_covariance(0, {}), std::invalid_argument);
}

TEST(GenDesign, RademacherEntries)
{
    const Matrix X = gen_design(50, 7, Matrix::Identity(7, 7), RowFamily::rademacher, 3);
    EXPECT_TRUE((X.array().abs() == 1.0).all());
}

TEST(GenDesign, GaussianColumnCovariance)
{
    const Matrix X = gen_design(10000, 2, Matrix::Identity(2, 2), RowFamily::gaussian, 4);
    const Matrix C = X.transpose() * X / 10000.0;
    EXPECT_LE((C - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 0.05);
}

TEST(GenDesign, CorrelatedRowsFollowSigma)
{
    const Matrix S = gen_covariance(3, {CovarianceKind::ar1, 0.6});
    const Matrix X = gen_design(40000, 3, S, RowFamily::gaussian, 5);
    const Matrix C = X.transpose() * X / 40000.0;
    EXPECT_LE((C - S).cwiseAbs().maxCoeff(), 0.05);
}

TEST(GenDesign, DeterministicPerSeedAndValidated)
{
    const Matrix I = Matrix::Identity(4, 4);
    EXPECT_EQ(gen_design(20, 4, I, RowFamily::gaussian, 9), gen_design(20, 4, I, RowFamily::gaussian, 9));
    EXPECT_NE(gen_design(20, 4, I, RowFamily::gaussian, 9), gen_design(20, 4, I, RowFamily::gaussian, 10));
    Matrix bad = I;
    bad(0, 0) = -1.0;
    EXPECT_THROW(gen_design(5, 4, bad, RowFamily::gaussian, 1), std::invalid_argument);
    EXPECT_THROW(gen_design(5, 3, I, RowFamily::gaussian, 1), DimensionMismatch);
}

TEST(GenNoise, GaussianVariance)
{
    const Vector xi = gen_noise(100000, NoiseSpec::gaussian(), 1);
    EXPECT_GE(sample_var(xi), 0.97);
    EXPECT_LE(sample_var(xi), 1.03);
}

TEST(GenNoise, StandardizedStudentT)
{
    NoiseSpec spec;
    spec.family = NoiseFamily::student_t;
    spec.shape = 5.0;
    spec.tau = 4.0;
    const Vector xi = gen_noise(100000, spec, 2);
    EXPECT_GE(sample_var(xi), 0.95);
    EXPECT_LE(sample_var(xi), 1.05);
}

TEST(GenNoise, RademacherEntries)
{
    const Vector xi = gen_noise(100000, NoiseSpec::rademacher(), 3);
    EXPECT_TRUE((xi.array().abs() == 1.0).all());
    EXPECT_LE(std::abs(sample_mean(xi)), 0.02);
}

TEST(GenNoise, ParetoIsSymmetricWithUnitVariance)
{
    const Vector xi = gen_noise(400000, NoiseSpec::symmetric_pareto(4.0), 4);
    EXPECT_LE(std::abs(sample_mean(xi)), 0.02);
    EXPECT_NEAR(sample_var(xi), 1.0, 0.1);
}

TEST(GenNoise, RejectsInfiniteVariance)
{
    NoiseSpec spec;
    spec.family = NoiseFamily::student_t;
    spec.shape = 2.0;
    spec.tau = 2.0;
    EXPECT_THROW(gen_noise(10, spec, 1), std::invalid_argument);
    EXPECT_THROW(gen_noise(10, NoiseSpec::student_t(1.5), 1), std::invalid_argument);
    EXPECT_THROW(gen_noise(10, NoiseSpec::student_t(kSubGaussian), 1), std::invalid_argument);
}

TEST(GenNoise, SmallBallHoldsForEveryFamily)
{
    for (const NoiseSpec& spec : {NoiseSpec::gaussian(), NoiseSpec::rademacher(), NoiseSpec::student_t(2.0),
                                  NoiseSpec::student_t(4.0), NoiseSpec::symmetric_pareto(2.0),
                                  NoiseSpec::symmetric_pareto(4.0)}) {
        const Vector xi = gen_noise(1000000, spec, 5);
        const double mass = (xi.array().abs() <= 2.0).select(xi.array().square(), 0.0).mean();
        EXPECT_GE(mass, 0.25) << to_string(spec.family) << " tau " << spec.tau;
    }
}

TEST(GenNoise, DeclaredMomentIsStableAcrossSeeds)
{
    for (double tau : {2.0, 3.0, 4.0}) {
        std::vector<double> moments;
        for (std::uint64_t seed = 0; seed < 8; ++seed) {
            const Vector xi = gen_noise(1000000, NoiseSpec::student_t(tau), 100 + seed);
            moments.push_back(xi.array().abs().pow(tau).mean());
        }
        const double m = std::accumulate(moments.begin(), moments.end(), 0.0) / moments.size();
        double v = 0.0;
        for (double x : moments)
            v += (x - m) * (x - m);
        const double cv = std::sqrt(v / (moments.size() - 1)) / m;
        EXPECT_TRUE(std::isfinite(m));
        EXPECT_LT(cv, 0.5) << "tau " << tau;
    }
}

TEST(NoiseSpec, MomentBoundMatchesMonteCarlo)
{
    const NoiseSpec g = NoiseSpec::gaussian();
    NoiseSpec g4 = g;
    g4.tau = 4.0;
    EXPECT_NEAR(g4.moment_bound(), std::pow(3.0, 0.25), 1e-12);
    const NoiseSpec t = NoiseSpec::student_t(3.0);
    const Vector xi = gen_noise(2000000, t, 6);
    const double mc = std::pow(xi.array().abs().pow(2.0).mean(), 0.5);
    EXPECT_NEAR(NoiseSpec::student_t(2.0).moment_bound(), 1.0, 1e-12);
    EXPECT_NEAR(mc, 1.0, 0.03);
}

TEST(GenBeta, Examples)
{
    EXPECT_EQ(gen_beta(5, 0, 1.0, BetaPattern::flat, 1), Vector::Zero(5));
    const Vector b = gen_beta(4, 2, 1.0, BetaPattern::flat, 7);
    EXPECT_EQ((b.array() != 0.0).count(), 2);
    EXPECT_EQ((b.array().abs() == 1.0).count(), 2);
    const Vector d = gen_beta(10, 3, 6.0, BetaPattern::decaying, 7);
    std::vector<double> mags;
    for (double x : d)
        if (x != 0.0)
            mags.push_back(std::abs(x));
    std::sort(mags.rbegin(), mags.rend());
    ASSERT_EQ(mags.size(), 3u);
    EXPECT_DOUBLE_EQ(mags[0], 6.0);
    EXPECT_DOUBLE_EQ(mags[1], 3.0);
    EXPECT_DOUBLE_EQ(mags[2], 2.0);
    EXPECT_THROW(gen_beta(3, 4, 1.0, BetaPattern::flat, 1), std::invalid_argument);
}

TEST(Contaminate, NoOutliersLeavesInstanceUnchanged)
{
    InstanceSpec spec = contaminated_spec(AdversaryStrategy::none);
    spec.o = 0;
    const auto inst = make_instance(spec, 11);
    const auto same = contaminate(inst, AdversaryStrategy::random_large, 0, 1e3);
    EXPECT_EQ(same.ds.Y(), inst.ds.Y());
    EXPECT_EQ(same.truth.theta_star, Vector::Zero(60));
}

TEST(Contaminate, RandomLarge)
{
    const auto inst = make_instance(contaminated_spec(AdversaryStrategy::random_large), 12);
    EXPECT_EQ((inst.truth.theta_star.array() != 0.0).count(), 5);
    EXPECT_EQ((inst.truth.theta_star.array().abs() == 1e3).count(), 5);
    EXPECT_EQ(inst.truth.support_O.size(), 5u);
}

TEST(Contaminate, ResidualAlignedUsesTopNoise)
{
    const auto inst = make_instance(contaminated_spec(AdversaryStrategy::residual_aligned), 13);
    std::vector<Eigen::Index> idx(60);
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return std::abs(inst.xi[a]) > std::abs(inst.xi[b]); });
    std::vector<Eigen::Index> top(idx.begin(), idx.begin() + 5);
    std::sort(top.begin(), top.end());
    EXPECT_EQ(inst.truth.support_O, top);
    for (auto i : top)
        EXPECT_EQ(inst.truth.theta_star[i], inst.xi[i] > 0 ? 1e3 : -1e3);
}

TEST(Contaminate, LowerBoundStrategyOpposesTheFirstColumn)
{
    auto spec = contaminated_spec(AdversaryStrategy::theorem3);
    spec.adversary_magnitude = 1.0;
    const auto inst = make_instance(spec, 14);
    EXPECT_EQ(inst.truth.support_O.size(), 5u);
    const double level = 0.7 * std::pow(5.0 / 60.0, -1.0 / 3.0) / std::sqrt(60.0);
    for (auto i : inst.truth.support_O)
        EXPECT_DOUBLE_EQ(inst.truth.theta_star[i], inst.ds.X()(i, 0) < 0 ? level : -level);
}

TEST(Contaminate, RejectsTooManyOutliers)
{
    const auto inst = make_instance(contaminated_spec(AdversaryStrategy::random_large), 15);
    EXPECT_THROW(contaminate(inst, AdversaryStrategy::random_large, 61, 1.0), std::invalid_argument);
}

TEST(MakeInstance, ReconstructionIdentityIsBitExact)
{
    for (auto a : {AdversaryStrategy::none, AdversaryStrategy::random_large, AdversaryStrategy::residual_aligned,
                   AdversaryStrategy::theorem3}) {
        auto spec = contaminated_spec(a);
        if (a == AdversaryStrategy::none)
            spec.o = 0;
        spec.covariance = {CovarianceKind::ar1, 0.3};
        const auto inst = make_instance(spec, 16);
        const Vector Y = inst.ds.X() * inst.truth.beta_star + std::sqrt(60.0) * inst.truth.theta_star +
                         inst.truth.sigma * inst.xi;
        EXPECT_EQ(inst.ds.Y(), Y) << to_string(a);
    }
}

TEST(MakeInstance, Deterministic)
{
    const auto spec = contaminated_spec(AdversaryStrategy::random_large);
    const auto a = make_instance(spec, 17);
    const auto b = make_instance(spec, 17);
    const auto c = make_instance(spec, 18);
    EXPECT_EQ(a.ds.X(), b.ds.X());
    EXPECT_EQ(a.ds.Y(), b.ds.Y());
    EXPECT_EQ(a.truth.theta_star, b.truth.theta_star);
    EXPECT_NE(a.ds.Y(), c.ds.Y());
}

TEST(LowerBoundPair, SigmaTildeRange)
{
    for (double tau : {2.0, 3.0, 8.0, kSubGaussian})
        for (std::size_t o : {1u, 10u, 50u, 100u}) {
            const auto [a, b] = lower_bound_pair(100, o, 1.5, tau, 1);
            const double r = b.truth.sigma / a.truth.sigma;
            EXPECT_GE(r, 1.0);
            EXPECT_LE(r, std::sqrt(2.0));
        }
}

TEST(LowerBoundPair, BoundaryAllOutliers)
{
    const auto [a, b] = lower_bound_pair(50, 50, 1.0, 2.0, 2);
    EXPECT_DOUBLE_EQ(b.truth.sigma, 1.0);
    EXPECT_DOUBLE_EQ(a.truth.beta_star[0], 1.0);
    EXPECT_EQ(a.truth.support_O.size(), 50u);
}

TEST(LowerBoundPair, SignalLevel)
{
    const auto [a, b] = lower_bound_pair(400, 16, 2.0, 4.0, 3);
    const double expect = 2.0 * std::pow(16.0 / 400.0, 1.0 - 0.25);
    EXPECT_NEAR((a.ds.X() * a.truth.beta_star).norm() / std::sqrt(400.0), expect, 1e-12);
    EXPECT_EQ(b.truth.beta_star, Vector::Zero(1));
    EXPECT_EQ(b.truth.theta_star, Vector::Zero(400));
    EXPECT_THROW(lower_bound_pair(10, 0, 1.0, 2.0, 1), std::invalid_argument);
}

TEST(LowerBoundPair, ResponsesShareOneLaw)
{
    std::vector<double> ya, yb;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto [a, b] = lower_bound_pair(10000, 100, 1.0, 2.0, 1000 + seed);
        ya.insert(ya.end(), a.ds.Y().begin(), a.ds.Y().end());
        yb.insert(yb.end(), b.ds.Y().begin(), b.ds.Y().end());
    }
    const double m = static_cast<double>(ya.size());
    const double critical = 1.628 * std::sqrt(2.0 / m);
    EXPECT_LT(ks_two_sample(ya, yb), critical);
}

TEST(InstanceIo, BinaryRoundTrip)
{
    const auto inst = make_instance(contaminated_spec(AdversaryStrategy::random_large), 19);
    const auto path = (std::filesystem::temp_directory_path() / "rslope_io_test.bin").string();
    save_instance(inst, path);
    const auto back = load_instance(path);
    std::remove(path.c_str());
    EXPECT_EQ(back.ds.X(), inst.ds.X());
    EXPECT_EQ(back.ds.Y(), inst.ds.Y());
    EXPECT_EQ(back.truth.beta_star, inst.truth.beta_star);
    EXPECT_EQ(back.truth.theta_star, inst.truth.theta_star);
    EXPECT_EQ(back.truth.sigma, inst.truth.sigma);
    EXPECT_EQ(back.xi, inst.xi);
    EXPECT_EQ(back.seed, inst.seed);
    EXPECT_EQ(back.truth.support_O, inst.truth.support_O);
}

TEST(InstanceIo, CsvAndBadFiles)
{
    const auto dir = std::filesystem::temp_directory_path();
    const auto csv = (dir / "rslope_io_test.csv").string();
    {
        std::ofstream f(csv);
        f << "y,x1,x2\n1.5,1,2\n-0.5,3,4\n";
    }
    const Dataset ds = load_dataset_csv(csv);
    std::remove(csv.c_str());
    EXPECT_EQ(ds.n(), 2);
    EXPECT_EQ(ds.p(), 2);
    EXPECT_EQ(ds.Y()[1], -0.5);
    EXPECT_EQ(ds.X()(1, 0), 3.0);

    const auto junk = (dir / "rslope_io_junk.bin").string();
    {
        std::ofstream f(junk, std::ios::binary);
        f << "not an instance";
    }
    EXPECT_THROW(load_instance(junk), std::runtime_error);
    std::remove(junk.c_str());
    EXPECT_THROW(load_instance((dir / "rslope_missing_file.bin").string()), std::runtime_error);
}
