#include <gtest/gtest.h>

#include "fracalc/ctrw.hpp"

using namespace fracalc;

namespace {

const WaitingDist& half()
{
    static const WaitingDist w(0.5);
    return w;
}

} // namespace

// 1/zeta(3/2) from mpmath at 30 digits.
TEST(Waiting, NormalizationConstant)
{
    EXPECT_NEAR(half().d_alpha(), 0.38279338399942656225, 1e-15);
    EXPECT_NEAR(WaitingDist(0.3).d_alpha(), 0.25432678453641175982, 1e-14);
    EXPECT_LE(half().mass_error(), 1e-12);
}

TEST(Waiting, SurvivalMatchesPmf)
{
    const auto& w = half();
    EXPECT_EQ(w.survival(0), 1.0);
    for (std::uint64_t n : {1ULL, 2ULL, 10ULL, 1000ULL})
        EXPECT_NEAR(w.survival(n - 1) - w.survival(n), w.pmf(n), 1e-15);
    // Across the end of the table the analytic tail takes over smoothly.
    const std::uint64_t N = WaitingDist::kTable;
    EXPECT_NEAR(w.survival(N) - w.survival(N + 1), w.pmf(N + 1), 1e-17);
}

TEST(Waiting, InversionIsExactOnTheTable)
{
    const auto& w = half();
    for (std::uint64_t n : {1ULL, 2ULL, 3ULL, 17ULL, 4096ULL, 1000000ULL}) {
        const double v = 0.5 * (w.survival(n - 1) + w.survival(n));
        EXPECT_EQ(w.invert(v), n);
    }
    EXPECT_EQ(w.invert(1.0), 1u);
    EXPECT_GT(w.invert(1e-300), WaitingDist::kTable);
}

TEST(Waiting, FrequencyOfOneWithinThreeSigma)
{
    const auto& w = half();
    auto rng = SplitMix64::stream(11, 0);
    const long n = 1000000;
    long ones = 0;
    for (long i = 0; i < n; ++i) ones += sample_waiting(w, rng) == 1;
    const double p = w.d_alpha();
    EXPECT_NEAR(static_cast<double>(ones) / n, p, 3.0 * std::sqrt(p * (1 - p) / n));
}

TEST(Waiting, TruncatedMeanKeepsGrowing)
{
    const auto& w = half();
    auto mean_of = [&](long draws) {
        auto rng = SplitMix64::stream(3, 0);
        double s = 0;
        for (long i = 0; i < draws; ++i) s += static_cast<double>(std::min<std::uint64_t>(sample_waiting(w, rng), 1000000));
        return s / static_cast<double>(draws);
    };
    EXPECT_GT(mean_of(1000000), mean_of(10000));
}

TEST(Waiting, MemorylessMode)
{
    const WaitingDist w(1.0);
    auto rng = SplitMix64::stream(1, 1);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_waiting(w, rng), 1u);
    EXPECT_THROW(WaitingDist(0.0), DomainError);
}

TEST(Ensemble, ClassicalMsdIsLinear)
{
    WalkConfig c;
    c.alpha = 1.0;
    c.dtau = 0.01;
    c.dx = 0.1;
    c.t_end = 100.0;
    c.n_walkers = 100000;
    c.seed = 5;
    const auto s = run_ensemble(c);
    EXPECT_NEAR(s.msd.back() / c.t_end, 1.0, 0.05);
    EXPECT_NEAR(msd_slope(s), 1.0, 0.05);
    EXPECT_LE(compare_to_fundamental(s, {1.0, walk_diffusivity(1.0, c.dx, c.dtau, 1.0), c.t_end}), 0.02);
    long total = 0;
    for (long k : s.histogram.counts) total += k;
    EXPECT_EQ(total, c.n_walkers);
}

TEST(Ensemble, SubdiffusiveSlope)
{
    WalkConfig c;
    c.alpha = 0.5;
    c.dtau = 1e-5;
    c.t_end = 1.0;
    c.n_walkers = 20000;
    c.seed = 9;
    c.dx = walk_step_for(0.5, 1.0, c.dtau, half().d_alpha());
    const auto s = run_ensemble(c);
    EXPECT_NEAR(msd_slope(s), 0.5, 0.05);
    EXPECT_NEAR(walk_diffusivity(0.5, c.dx, c.dtau, half().d_alpha()), 1.0, 1e-12);
    EXPECT_LE(compare_to_fundamental(s, {0.5, 1.0, 1.0}), 0.05);
}

TEST(Ensemble, SymmetricMean)
{
    WalkConfig c;
    c.alpha = 0.7;
    c.dtau = 1e-3;
    c.t_end = 1.0;
    c.n_walkers = 20000;
    c.seed = 21;
    const auto s = run_ensemble(c);
    for (std::size_t k = 0; k < s.times.size(); ++k) {
        const double sd = std::sqrt(std::max(0.0, s.msd[k] - s.mean[k] * s.mean[k]));
        EXPECT_LE(std::abs(s.mean[k]), 3.0 * sd / std::sqrt(static_cast<double>(c.n_walkers)) + 1e-15);
    }
}

TEST(Ensemble, SmoothedMsdNondecreasing)
{
    WalkConfig c;
    c.alpha = 0.5;
    c.dtau = 1e-4;
    c.t_end = 1.0;
    c.n_walkers = 20000;
    c.seed = 4;
    const auto s = run_ensemble(c);
    std::vector<double> sm;
    for (std::size_t k = 1; k + 1 < s.msd.size(); ++k) sm.push_back((s.msd[k - 1] + s.msd[k] + s.msd[k + 1]) / 3.0);
    for (std::size_t k = 1; k < sm.size(); ++k) EXPECT_GE(sm[k], sm[k - 1]);
}

TEST(Ensemble, SeedDeterminismAcrossThreadCounts)
{
    WalkConfig c;
    c.alpha = 0.5;
    c.dtau = 1e-3;
    c.t_end = 2.0;
    c.n_walkers = 3001;
    c.seed = 77;
    c.record_paths = true;
    c.threads = 1;
    const auto a = run_ensemble(c);
    c.threads = 4;
    const auto b = run_ensemble(c);
    EXPECT_EQ(a.msd, b.msd);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.paths, b.paths);
    EXPECT_EQ(a.histogram.counts, b.histogram.counts);
    EXPECT_EQ(a.histogram.edges, b.histogram.edges);
    c.seed = 78;
    EXPECT_NE(run_ensemble(c).paths, a.paths);
}

TEST(Ensemble, SingleWalkerReplay)
{
    WalkConfig c;
    c.alpha = 1.0;
    c.n_walkers = 1;
    c.t_end = 5.0;
    c.seed = 123;
    c.record_paths = true;
    EXPECT_EQ(run_ensemble(c).paths, run_ensemble(c).paths);
}

TEST(Ensemble, ZeroTimeDegenerate)
{
    WalkConfig c;
    c.alpha = 1.0;
    c.dtau = 1.0;
    c.t_end = 0.5;
    c.n_walkers = 50;
    const auto s = run_ensemble(c);
    ASSERT_EQ(s.histogram.counts.size(), 1u);
    EXPECT_EQ(s.histogram.counts[0], 50);
    EXPECT_EQ(s.msd.back(), 0.0);
}

TEST(Ensemble, MemoryCap)
{
    WalkConfig c;
    c.n_walkers = 1000000;
    c.record_paths = true;
    c.memory_cap = 1000;
    EXPECT_THROW(run_ensemble(c), DomainError);
}

TEST(Ensemble, CompareRejectsMismatch)
{
    WalkConfig c;
    c.n_walkers = 100;
    const auto s = run_ensemble(c);
    EXPECT_THROW(compare_to_fundamental(s, {0.5, 1.0, c.t_end}), DomainError);
    EXPECT_THROW(compare_to_fundamental(s, {1.0, 1.0, 2.0 * c.t_end}), DomainError);
    auto broken = s;
    broken.histogram.counts.pop_back();
    EXPECT_THROW(compare_to_fundamental(broken, {1.0, 1.0, c.t_end}), DomainError);
}

TEST(Ensemble, InvalidConfig)
{
    WalkConfig c;
    c.dx = 0.0;
    EXPECT_THROW(run_ensemble(c), DomainError);
    c = WalkConfig{};
    c.alpha = 1.5;
    EXPECT_THROW(run_ensemble(c), DomainError);
    c = WalkConfig{};
    c.n_walkers = 0;
    EXPECT_THROW(run_ensemble(c), DomainError);
}
