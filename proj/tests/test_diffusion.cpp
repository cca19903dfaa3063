#include <gtest/gtest.h>

#include <numbers>

#include "fracalc/diffusion.hpp"

using namespace fracalc;

namespace {

double gaussian(double x, double k, double t)
{
    return std::exp(-x * x / (2.0 * k * t)) / std::sqrt(2.0 * std::numbers::pi * k * t);
}

std::vector<double> linspace(double a, double b, int n)
{
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

} // namespace

TEST(Fundamental, GaussianAtAlphaOne)
{
    EXPECT_NEAR(fundamental_solution({1.0, 1.0, 1.0}, {0.0})[0], 0.3989422804014327, 1e-12);
    const auto x = linspace(-6.0, 6.0, 49);
    for (double k : {0.5, 1.0, 3.0}) {
        const auto u = fundamental_solution({1.0, k, 1.7}, x);
        for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(u[i], gaussian(x[i], k, 1.7), 1e-8);
    }
}

// Frozen from tests/oracles/diffusion_oracle.py (mpmath quadosc at 30 digits).
TEST(Fundamental, HalfOrderOracle)
{
    const std::vector<double> x{0.0, 0.5, 1.0, 2.0, 4.0};
    const std::vector<double> ref{0.57703373861646969, 0.3424627355362051, 0.19166522116514657,
                                  0.051902872351038204, 0.0024121782777910757};
    const auto u = fundamental_solution({0.5, 1.0, 1.0}, x);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(u[i], ref[i], 1e-10) << "x=" << x[i];
    EXPECT_NEAR(fundamental_solution({0.5, 1.0, 2.0}, {0.0})[0], 0.48522560228303827, 1e-10);
}

TEST(Fundamental, EvenAndNonNegative)
{
    for (double a : {0.3, 0.5, 0.8}) {
        auto x = linspace(-10.0, 10.0, 201);
        for (std::size_t i = 0; i < 100; ++i) x[200 - i] = -x[i];
        const auto u = fundamental_solution({a, 1.0, 1.0}, x);
        for (std::size_t i = 0; i < x.size(); ++i) {
            EXPECT_EQ(u[i], u[x.size() - 1 - i]);
            EXPECT_GE(u[i], -1e-9);
        }
    }
}

TEST(Fundamental, Normalization)
{
    for (double a : {0.3, 0.5, 0.8, 1.0}) EXPECT_NEAR(moments({a, 1.0, 1.0}).normalization, 1.0, 1e-6) << a;
}

TEST(Fundamental, RefinedGridAgrees)
{
    SpectralGrid fine;
    fine.n_omega = 4096;
    fine.tail_tol = 1e-14;
    const std::vector<double> x{0.0, 0.3, 1.1, 2.5};
    const auto a = fundamental_solution({0.4, 2.0, 0.7}, x);
    const auto b = fundamental_solution({0.4, 2.0, 0.7}, x, fine);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-10);
}

TEST(Profile, GaussianProfileConstant)
{
    // With s = sqrt(k t / 2): H_1(r) = exp(-r^2/4) / (2 sqrt(pi)).
    const auto H = self_similar_profile(1.0, {0.0, 1.0, 2.0});
    EXPECT_NEAR(H[0], 0.5 / std::sqrt(std::numbers::pi), 1e-15);
    const double s = similarity_scale({1.0, 1.0, 1.0});
    for (double r : {0.0, 1.0, 2.0}) EXPECT_NEAR(std::exp(-r * r / 4.0) / (2.0 * std::sqrt(std::numbers::pi)) / s,
                                                  gaussian(r * s, 1.0, 1.0), 1e-15);
}

TEST(Profile, ScalingReconstruction)
{
    for (double a : {0.3, 0.5, 0.8}) {
        const auto r = linspace(0.0, 8.0, 33);
        const auto H = self_similar_profile(a, r);
        for (double t : {0.5, 2.0}) {
            const DiffusionParams p{a, 1.3, t};
            const double s = similarity_scale(p);
            std::vector<double> x(r.size());
            for (std::size_t i = 0; i < r.size(); ++i) x[i] = r[i] * s;
            const auto u = fundamental_solution(p, x);
            for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(u[i], H[i] / s, 1e-6);
        }
    }
}

TEST(Moments, ClassicalMsd)
{
    EXPECT_NEAR(msd_check({1.0, 1.0, 1.0}), 1.0, 1e-6);
    EXPECT_NEAR(msd_check({1.0, 1.0, 2.5}), 2.5, 1e-6);
}

TEST(Moments, SubdiffusiveScaling)
{
    for (double a : {0.3, 0.5, 0.8}) {
        const double m1 = msd_check({a, 1.0, 1.0}), m2 = msd_check({a, 1.0, 2.0});
        EXPECT_NEAR(m2 / m1, std::pow(2.0, a), 1e-3 * std::pow(2.0, a)) << a;
    }
    // Frozen: k t^alpha / Gamma(1 + alpha) at alpha = 1/2, t = 1 is 2/sqrt(pi).
    EXPECT_NEAR(msd_check({0.5, 1.0, 1.0}), 1.1283791670955126, 1e-8);
}

TEST(Moments, ShrinksAsTimeShrinks)
{
    double prev = std::numeric_limits<double>::infinity();
    for (double t : {1.0, 0.1, 0.01, 0.001}) {
        const double m = msd_check({0.5, 1.0, t});
        EXPECT_LT(m, prev);
        prev = m;
    }
    EXPECT_LT(prev, 0.04);
}

TEST(Inputs, Validation)
{
    EXPECT_THROW(fundamental_solution({0.0, 1.0, 1.0}, {0.0}), DomainError);
    EXPECT_THROW(fundamental_solution({1.2, 1.0, 1.0}, {0.0}), DomainError);
    EXPECT_THROW(fundamental_solution({0.5, -1.0, 1.0}, {0.0}), DomainError);
    EXPECT_THROW(fundamental_solution({0.5, 1.0, 0.0}, {0.0}), DomainError);
    SpectralGrid g;
    g.n_omega = 300;
    EXPECT_THROW(fundamental_solution({0.5, 1.0, 1.0}, {0.0}, g), DomainError);
    EXPECT_THROW(self_similar_profile(0.5, {-1.0}), DomainError);
}
