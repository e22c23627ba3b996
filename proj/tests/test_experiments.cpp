#include <gtest/gtest.h>

#include <set>

#include "psm/experiments.hpp"

using namespace psm;
using namespace psm::experiments;

TEST(Rng, DeterministicPerSeedAndStream)
{
    Rng a(5, 1), b(5, 1), c(5, 2), d(6, 1);
    const auto x = a.bits();
    EXPECT_EQ(x, b.bits());
    EXPECT_NE(x, c.bits());
    EXPECT_NE(x, d.bits());
}

TEST(Rng, UniformAndIndexRanges)
{
    Rng rng(11);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
        const double v = rng.uniform(1.0, 2.0);
        EXPECT_GE(v, 1.0);
        EXPECT_LT(v, 2.0);
        const Index k = rng.index(7);
        EXPECT_GE(k, 0);
        EXPECT_LT(k, 7);
    }
}

TEST(Rng, NormalMoments)
{
    Rng rng(2);
    const int n = 200000;
    double s = 0.0, ss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        s += z;
        ss += z * z;
    }
    EXPECT_NEAR(s / n, 0.0, 0.01);
    EXPECT_NEAR(ss / n, 1.0, 0.02);
}

TEST(GenDantzig, ShapesAndColumnScaling)
{
    DantzigGenConfig cfg;
    cfg.n = 30;
    cfg.d = 50;
    cfg.s = 5;
    const auto data = gen_dantzig(cfg);
    ASSERT_EQ(data.X.rows(), 30);
    ASSERT_EQ(data.X.cols(), 50);
    ASSERT_EQ(data.y.size(), 30);
    EXPECT_EQ((data.theta0.array() != 0.0).count(), 5);
    for (Index j = 0; j < 50; ++j)
        EXPECT_NEAR(data.X.col(j).norm(), std::sqrt(30.0), 1e-12);
    cfg.column_norm = 1.0;
    const auto unit = gen_dantzig(cfg);
    EXPECT_NEAR(unit.X.col(3).norm(), 1.0, 1e-12);
}

TEST(GenDantzig, AmplitudesFollowTheRule)
{
    DantzigGenConfig cfg;
    cfg.d = 400;
    cfg.s = 200;
    const auto data = gen_dantzig(cfg);
    for (Index j = 0; j < cfg.d; ++j)
        if (data.theta0(j) != 0.0)
            EXPECT_GE(std::abs(data.theta0(j)), 1.0);
    cfg.amplitude = AmplitudeRule::OnePlusGaussian;
    const auto raw = gen_dantzig(cfg);
    EXPECT_GT((raw.theta0.array().abs() < 1.0 && raw.theta0.array() != 0.0).count(), 0);
}

TEST(GenDantzig, DeterministicAndNoiseFree)
{
    DantzigGenConfig cfg;
    cfg.n = 20;
    cfg.d = 40;
    cfg.seed = 77;
    const auto a = gen_dantzig(cfg, 3), b = gen_dantzig(cfg, 3), c = gen_dantzig(cfg, 4);
    EXPECT_EQ(a.X, b.X);
    EXPECT_EQ(a.y, b.y);
    EXPECT_NE(a.X, c.X);
    cfg.sigma = 0.0;
    const auto clean = gen_dantzig(cfg);
    EXPECT_LE((clean.y - clean.X * clean.theta0).norm(), 1e-12);
}

TEST(GenDantzig, RejectsBadConfig)
{
    DantzigGenConfig cfg;
    cfg.s = cfg.d + 1;
    EXPECT_THROW(gen_dantzig(cfg), Error);
    cfg = {};
    cfg.sigma = -1.0;
    EXPECT_THROW(gen_dantzig(cfg), Error);
}

TEST(Amplitude, ParseRoundTrip)
{
    for (auto r : {AmplitudeRule::OnePlusGaussian, AmplitudeRule::OnePlusAbsGaussian, AmplitudeRule::Gaussian})
        EXPECT_EQ(parse_amplitude_rule(to_string(r)), r);
    EXPECT_THROW(parse_amplitude_rule("laplace"), ParseError);
}

TEST(FeasibilityViolation, Examples)
{
    const DenseMatrix I = DenseMatrix::Identity(2, 2);
    const Vector y{{3.0, 0.0}};
    EXPECT_DOUBLE_EQ(feasibility_violation(I, y, Vector::Zero(2), 3.0), 0.0);
    EXPECT_DOUBLE_EQ(feasibility_violation(I, y, Vector::Zero(2), 1.0), 2.0);
    EXPECT_DOUBLE_EQ(feasibility_violation(I, y, Vector{{2.0, 0.0}}, 1.0), 0.0);
    EXPECT_DOUBLE_EQ(feasibility_violation(I, y, Vector{{3.0, 0.0}}, 0.5), -0.5);
}

TEST(StopRule, ParseAndScale)
{
    EXPECT_EQ(StopRule::parse("path-demo").kind, StopRuleKind::PathDemo);
    EXPECT_EQ(StopRule::parse("benchmark").kind, StopRuleKind::Benchmark);
    const auto v = StopRule::parse("value:2.5");
    EXPECT_EQ(v.kind, StopRuleKind::Value);
    EXPECT_DOUBLE_EQ(v.lambda(100, 250, 1.0), 2.5);
    const double rate = 100.0 * std::sqrt(std::log(250.0) / 100.0);
    EXPECT_NEAR(StopRule::parse("path-demo").lambda(100, 250, 1.0), rate, 1e-12);
    EXPECT_NEAR(StopRule::parse("benchmark").lambda(100, 250, 0.5), rate, 1e-12);
    for (const char* bad : {"value:", "value:-1", "value:1x", "fast", ""})
        EXPECT_THROW(StopRule::parse(bad), ParseError) << bad;
}

TEST(DantzigBench, RecordsAreConsistent)
{
    DantzigGenConfig cfg;
    cfg.n = 40;
    cfg.d = 80;
    cfg.s = 3;
    const auto recs = run_dantzig_bench(cfg, StopRule::parse("benchmark"), 3);
    ASSERT_EQ(recs.size(), 3u);
    for (const auto& r : recs) {
        EXPECT_TRUE(r.error.empty()) << r.error;
        EXPECT_EQ(r.n, 40);
        EXPECT_EQ(r.d, 80);
        EXPECT_GT(r.pivots, 0);
        EXPECT_LE(r.max_violation, 1e-8);
        EXPECT_EQ(r.true_nnz, 3);
        EXPECT_EQ(r.termination, "ReachedTarget");
        EXPECT_NEAR(r.terminal_lambda, StopRule::parse("benchmark").lambda(40, 80, 1.0), 1e-9);
        if (r.support_ok)
            EXPECT_GE(r.pivots_to_support, 0);
    }
    const auto again = run_dantzig_bench(cfg, StopRule::parse("benchmark"), 3);
    for (std::size_t k = 0; k < recs.size(); ++k)
        EXPECT_EQ(recs[k].pivots, again[k].pivots);
}

TEST(DantzigBench, ContainsAll)
{
    EXPECT_TRUE(contains_all({1, 3, 5}, {1, 5}));
    EXPECT_TRUE(contains_all({1, 3, 5}, {}));
    EXPECT_FALSE(contains_all({1, 3}, {2}));
}

TEST(GenDiffnet, StructureOfTheModels)
{
    DiffNetGenConfig cfg;
    cfg.d = 8;
    cfg.n = 50;
    cfg.sparsity = 0.2;
    cfg.seed = 4;
    const auto data = gen_diffnet(cfg);
    auto min_eig = [](const DenseMatrix& M) {
        return Eigen::SelfAdjointEigenSolver<DenseMatrix>(M, Eigen::EigenvaluesOnly).eigenvalues()(0);
    };
    EXPECT_GT(min_eig(data.Omega_x), 0.0);
    EXPECT_GT(min_eig(data.Omega_y), 0.0);
    EXPECT_GE(min_eig(data.S_X), -1e-12);
    EXPECT_LE((data.S_X - data.S_X.transpose()).norm(), 1e-12);
    EXPECT_LE((data.S_Y - data.S_Y.transpose()).norm(), 1e-12);
    EXPECT_LE((data.Omega_x - data.Omega_y - data.Delta0).norm(), 1e-9);
    EXPECT_LE((data.Delta0 - data.Delta0.transpose()).norm(), 1e-12);
    // −Δ⁰ = D₁ + 2|λ_min(D₁)| I is positive semidefinite
    EXPECT_GE(min_eig(-data.Delta0), -1e-9);
}

TEST(GenDiffnet, DeterministicPerStream)
{
    DiffNetGenConfig cfg;
    cfg.d = 5;
    const auto a = gen_diffnet(cfg, 2), b = gen_diffnet(cfg, 2), c = gen_diffnet(cfg, 3);
    EXPECT_EQ(a.S_X, b.S_X);
    EXPECT_NE(a.S_X, c.S_X);
}

TEST(GenDiffnet, TargetNonzeros)
{
    DiffNetGenConfig cfg;
    cfg.d = 25;
    cfg.sparsity = 0.02;
    EXPECT_EQ(diffnet_target_nonzeros(cfg), 13);
    cfg.d = 50;
    EXPECT_EQ(diffnet_target_nonzeros(cfg), 50);
    cfg.sparsity = 0.0;
    EXPECT_EQ(diffnet_target_nonzeros(cfg), 1);
}

TEST(DiffnetViolation, Example)
{
    const DenseMatrix SX = DenseMatrix::Constant(1, 1, 2.0), SY = DenseMatrix::Constant(1, 1, 1.0);
    EXPECT_DOUBLE_EQ(diffnet_violation(SX, SY, DenseMatrix::Zero(1, 1), 1.0), 0.0);
    EXPECT_DOUBLE_EQ(diffnet_violation(SX, SY, DenseMatrix::Constant(1, 1, 0.25), 0.5), 0.0);
}

TEST(DiffnetBench, ReachesTarget)
{
    DiffNetGenConfig cfg;
    cfg.d = 6;
    cfg.n = 60;
    cfg.sparsity = 0.1;
    const auto recs = run_diffnet_bench(cfg, std::nullopt, 2);
    for (const auto& r : recs) {
        EXPECT_TRUE(r.error.empty()) << r.error;
        EXPECT_TRUE(r.support_ok);
        EXPECT_GE(r.terminal_nnz, diffnet_target_nonzeros(cfg));
        EXPECT_LE(r.max_violation, 1e-8);
    }
}

TEST(Summary, MeanSeAndMedian)
{
    const auto m = mean_se({1.0, 2.0, 3.0, 4.0});
    EXPECT_DOUBLE_EQ(m.mean, 2.5);
    EXPECT_NEAR(m.se, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
    EXPECT_DOUBLE_EQ(mean_se({7.0}).se, 0.0);
    EXPECT_DOUBLE_EQ(median({3.0, 1.0, 2.0}), 2.0);
    EXPECT_DOUBLE_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
    EXPECT_TRUE(std::isnan(median({})));
}

TEST(Summary, FailuresAreCountedSeparately)
{
    std::vector<BenchRecord> recs(3);
    recs[0].pivots = 10;
    recs[0].support_ok = true;
    recs[0].max_violation = -1.0;
    recs[1].pivots = 20;
    recs[1].max_violation = 1e-12;
    recs[2].error = "boom";
    const auto s = summarize(recs);
    EXPECT_EQ(s.count, 3);
    EXPECT_EQ(s.failures, 1);
    EXPECT_DOUBLE_EQ(s.pivots.mean, 15.0);
    EXPECT_DOUBLE_EQ(s.violation.mean, 0.5e-12);
    EXPECT_DOUBLE_EQ(s.median_pivots, 15.0);
    EXPECT_DOUBLE_EQ(s.support_rate, 1.0 / 3.0);
}
