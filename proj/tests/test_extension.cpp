#include <gtest/gtest.h>

#include "fracalc/extension.hpp"

using namespace fracalc;

namespace {

double ratio_spread(const TraceResult& r)
{
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
        const double q = r.trace[i] / r.oracle[i];
        lo = std::min(lo, q);
        hi = std::max(hi, q);
    }
    return (hi - lo) / std::abs(hi);
}

} // namespace

TEST(Extension, ConstantIsAnnihilated)
{
    for (double a : {0.2, 0.5, 0.8}) {
        const auto g = solve_extension(HistoryFunction::constant(2.5), a);
        for (double v : g.U) EXPECT_EQ(v, 2.5);
        for (double t : weighted_trace(g).trace) EXPECT_EQ(t, 0.0);
    }
}

TEST(Extension, ExponentialTraceFollowsEigenRelation)
{
    for (double a : {0.3, 0.5, 0.7}) {
        const auto r = weighted_trace(solve_extension(HistoryFunction::exponential(1.0), a));
        EXPECT_LE(ratio_spread(r), 0.01) << a;
        // trace / e^t constant, since D^alpha e^t = e^t.
        for (std::size_t i = 1; i < r.trace.size(); ++i)
            EXPECT_NEAR(r.trace[i] / std::exp(r.t_points[i]), r.trace[0] / std::exp(r.t_points[0]),
                        0.01 * r.trace[0] / std::exp(r.t_points[0]));
    }
}

TEST(Extension, PowerTraceExponent)
{
    const auto r = weighted_trace(solve_extension(HistoryFunction::power_plus(1.0), 0.5));
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(r.trace.size());
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
        const double x = std::log(r.t_points[i]), yv = std::log(r.trace[i]);
        sx += x;
        sy += yv;
        sxx += x * x;
        sxy += x * yv;
    }
    EXPECT_NEAR((n * sxy - sx * sy) / (n * sxx - sx * sx), 0.5, 0.02);
}

TEST(Extension, ConstantIsOperandIndependent)
{
    for (double a : {0.3, 0.5, 0.7}) {
        std::vector<double> d;
        for (double lam : {0.5, 1.0, 2.0}) d.push_back(weighted_trace(solve_extension(HistoryFunction::exponential(lam), a)).d_alpha_est);
        d.push_back(weighted_trace(solve_extension(HistoryFunction::power_plus(1.0), a)).d_alpha_est);
        const double lo = *std::min_element(d.begin(), d.end()), hi = *std::max_element(d.begin(), d.end());
        EXPECT_GT(lo, 0.0);
        EXPECT_LE((hi - lo) / hi, 0.02) << a;
    }
}

TEST(Extension, Linearity)
{
    std::vector<double> knots, f, h, comb;
    for (int i = 0; i <= 300; ++i) {
        const double t = -1.0 + 0.01 * i;
        knots.push_back(t);
        f.push_back(std::sin(2.0 * t) + 1.0);
        h.push_back(t * t);
        comb.push_back(2.0 * f.back() - 3.0 * h.back());
    }
    ExtensionSpec s;
    s.T0 = 0.5;
    s.T1 = 1.5;
    s.n_t = 200;
    s.M = 200;
    s.Y = 10.0;
    const auto gu = solve_extension(HistoryFunction::piecewise_linear(knots, f, ConstantBefore{f.front()}), 0.4, s);
    const auto gv = solve_extension(HistoryFunction::piecewise_linear(knots, h, ConstantBefore{h.front()}), 0.4, s);
    const auto gw = solve_extension(HistoryFunction::piecewise_linear(knots, comb, ConstantBefore{comb.front()}), 0.4, s);
    double worst = 0.0;
    for (std::size_t i = 0; i < gw.U.size(); ++i) worst = std::max(worst, std::abs(gw.U[i] - (2.0 * gu.U[i] - 3.0 * gv.U[i])));
    EXPECT_LE(worst, 1e-9);
}

TEST(Extension, DiscreteResidualSmall)
{
    ExtensionSpec s;
    s.n_t = 200;
    s.M = 200;
    EXPECT_LE(extension_residual(solve_extension(HistoryFunction::exponential(1.0), 0.5, s)), 1e-8);
}

TEST(Extension, MeshRefinementHalvesTraceError)
{
    // Self-convergence: differences between successive grids shrink by at least 2.
    std::vector<double> d;
    for (long M : {100L, 200L, 400L, 800L}) {
        ExtensionSpec s;
        s.M = M;
        s.n_t = 2000;
        d.push_back(weighted_trace(solve_extension(HistoryFunction::exponential(1.0), 0.5, s)).d_alpha_est);
    }
    const double e1 = std::abs(d[1] - d[0]), e2 = std::abs(d[2] - d[1]), e3 = std::abs(d[3] - d[2]);
    EXPECT_GE(e1 / e2, 2.0);
    EXPECT_GE(e2 / e3, 2.0);
}

TEST(Extension, FarFieldIsQuiet)
{
    const auto g = solve_extension(HistoryFunction::exponential(1.0), 0.5);
    const std::size_t n = g.t_grid.size() - 1, M = g.y_grid.size() - 1;
    EXPECT_LE(std::abs(g.at(n, M) - g.at(n, 0)) / std::abs(g.at(n, 0)), 1.0);
    EXPECT_LE(std::abs(g.at(n, M)), 1e-7);
}

TEST(Extension, Validation)
{
    EXPECT_THROW(solve_extension(HistoryFunction::exponential(1.0), 0.0), DomainError);
    ExtensionSpec s;
    s.T1 = s.T0;
    EXPECT_THROW(solve_extension(HistoryFunction::exponential(1.0), 0.5, s), DomainError);
    s = ExtensionSpec{};
    s.grading = 1.0;
    EXPECT_THROW(solve_extension(HistoryFunction::exponential(1.0), 0.5, s), DomainError);
    const auto heavy = HistoryFunction::grid_sampled(-1.0, 0.5, {1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0}, PowerDecay{1.0, 0.3, -1.0});
    EXPECT_THROW(solve_extension(heavy, 0.5), DivergentTailError);
}
