#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "errors.hpp"
#include "quadrature.hpp"

namespace fracalc {

struct MLParams {
    double alpha = 1.0;
    double beta = 1.0;
};

struct EvalPolicy {
    double series_tol = 1e-14;
    int max_terms = 2000;
    double asymptotic_threshold = 50.0;
};

namespace detail {

inline bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

// sin(pi x) with exact range reduction, so zeros land on the integers.
inline double sinpi(double x)
{
    double r = x - 2.0 * std::floor(0.5 * x);
    double sign = 1.0;
    if (r >= 1.0) {
        r -= 1.0;
        sign = -1.0;
    }
    if (r > 0.5) r = 1.0 - r;
    return sign * std::sin(std::numbers::pi * r);
}

inline constexpr std::array<double, 9> lanczos_p{
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

// Lanczos sum for x >= 0.5, returns (t, a) with Gamma(x) = sqrt(2 pi) t^(x-0.5) e^-t a.
inline void lanczos(double x, double& t, double& a)
{
    x -= 1.0;
    a = lanczos_p[0];
    for (int i = 1; i < 9; ++i) a += lanczos_p[i] / (x + i);
    t = x + 7.5;
}

} // namespace detail

inline double gamma(double x)
{
    if (detail::is_nonpositive_integer(x))
        throw PoleError("gamma: pole at non-positive integer " + std::to_string(x));
    if (std::isnan(x)) return x;
    if (x < 0.5) return std::numbers::pi / (detail::sinpi(x) * gamma(1.0 - x));
    if (x > 171.7) return std::numeric_limits<double>::infinity();
    if (x == std::floor(x) && x <= 30.0) {
        double f = 1.0;
        for (int i = 2; i < static_cast<int>(x); ++i) f *= i;
        return f;
    }
    double t, a;
    detail::lanczos(x, t, a);
    // Split the power to delay overflow near the top of the range.
    const double half = std::pow(t, 0.5 * (x - 0.5));
    return std::sqrt(2.0 * std::numbers::pi) * half * (half * std::exp(-t)) * a;
}

// log|Gamma(x)|.
inline double log_gamma(double x)
{
    if (detail::is_nonpositive_integer(x))
        throw PoleError("log_gamma: pole at non-positive integer " + std::to_string(x));
    if (x < 0.5)
        return std::log(std::numbers::pi / std::abs(detail::sinpi(x))) - log_gamma(1.0 - x);
    double t, a;
    detail::lanczos(x, t, a);
    return 0.5 * std::log(2.0 * std::numbers::pi) + (x - 0.5) * std::log(t) - t + std::log(a);
}

// 1/Gamma(x), zero at the poles.
inline double rgamma(double x)
{
    if (detail::is_nonpositive_integer(x)) return 0.0;
    return 1.0 / gamma(x);
}

namespace detail {

inline void validate(const MLParams& p, const EvalPolicy& pol)
{
    require(p.alpha > 0.0 && std::isfinite(p.alpha), "mittag_leffler: alpha must be > 0");
    require(p.beta > 0.0 && std::isfinite(p.beta), "mittag_leffler: beta must be > 0");
    require(pol.series_tol > 0.0, "mittag_leffler: series_tol must be > 0");
    require(pol.max_terms >= 1, "mittag_leffler: max_terms must be >= 1");
    require(pol.asymptotic_threshold > 0.0, "mittag_leffler: asymptotic_threshold must be > 0");
}

struct SeriesSum {
    double value;
    double abs_sum;
};

inline SeriesSum ml_series_sum(const MLParams& p, double t, const EvalPolicy& pol)
{
    const double at = std::abs(t);
    const double lt = std::log(at);
    long double sum = 0.0L, abs_sum = 0.0L;
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k < pol.max_terms; ++k) {
        const double arg = p.alpha * k + p.beta;
        double mag;
        if (k == 0)
            mag = rgamma(arg);
        else if (arg < 170.0 && k * lt < 700.0 && k * lt > -700.0)
            mag = std::pow(at, k) / gamma(arg);
        else
            mag = std::exp(k * lt - log_gamma(arg));
        const double term = (t < 0.0 && (k & 1)) ? -mag : mag;
        sum += term;
        abs_sum += mag;
        if (!std::isfinite(static_cast<double>(sum)))
            throw NonConvergenceError("mittag_leffler: series overflow at t=" + std::to_string(t));
        if (k > 0 && mag < prev) {
            const double r = mag / prev;
            const double tail = r < 1.0 ? mag * r / (1.0 - r) : mag;
            if (mag == 0.0 || tail <= pol.series_tol * std::abs(static_cast<double>(sum)))
                return {static_cast<double>(sum), static_cast<double>(abs_sum)};
        }
        prev = mag;
    }
    throw NonConvergenceError("mittag_leffler: series did not reach tolerance within max_terms at t=" +
                              std::to_string(t));
}

// Real-line integral representation, valid for 0 < alpha < 1 and 0 < beta < 1 + alpha.
inline double ml_integral(double alpha, double beta, double z)
{
    const double pi = std::numbers::pi;
    const double e = (1.0 - beta) / alpha;
    const double s1 = std::sin(pi * (1.0 - beta));
    const double s2 = std::sin(pi * (1.0 - beta + alpha));
    const double ca = std::cos(alpha * pi);
    auto kernel = [&](double c) {
        if (c <= 0.0) return 0.0;
        const double den = c * c - 2.0 * c * z * ca + z * z;
        return std::pow(c, e) * std::exp(-std::pow(c, 1.0 / alpha)) * (c * s1 - z * s2) / den;
    };
    const double az = std::abs(z);
    const double cmax = std::pow(745.0, alpha);
    std::vector<double> breaks{az, 2.0 * az, 1.0};
    if (z > 0.0 && ca > 0.0) breaks.push_back(z * ca);
    auto r = quad::integrate(kernel, 0.0, cmax, breaks, 0.0, 1e-13, 400);
    double v = r.value / (alpha * pi);
    if (z > 0.0) v += std::pow(z, e) * std::exp(std::pow(z, 1.0 / alpha)) / alpha;
    return v;
}

// Leading terms of E_{alpha,1}(-x) for large x; returns NaN when the next term
// is too large relative to the sum for the branch to be trusted.
inline double ml_asymptotic_neg(double alpha, double x)
{
    double sum = 0.0, xk = 1.0;
    for (int k = 1; k <= 3; ++k) {
        xk /= x;
        sum += ((k & 1) ? 1.0 : -1.0) * xk * rgamma(1.0 - alpha * k);
    }
    double next = 0.0;
    for (int k = 4; k <= 6 && next == 0.0; ++k) next = std::pow(x, -k) * rgamma(1.0 - alpha * k);
    if (std::abs(next) > 1e-8 * std::abs(sum)) return std::numeric_limits<double>::quiet_NaN();
    return sum;
}

} // namespace detail

// Plain truncated series with a geometric tail bound.
inline double mittag_leffler_series(const MLParams& p, double t, const EvalPolicy& pol = {})
{
    detail::validate(p, pol);
    if (t == 0.0) return rgamma(p.beta);
    return detail::ml_series_sum(p, t, pol).value;
}

inline double mittag_leffler(const MLParams& p, double t, const EvalPolicy& pol = {})
{
    detail::validate(p, pol);
    if (std::isnan(t)) return t;
    if (t == 0.0) return rgamma(p.beta);
    const double a = p.alpha, b = p.beta;
    if (a == 1.0 && b == 1.0 && t < 0.0) return std::exp(t);

    const bool has_integral = a < 1.0 && b < 1.0 + a;
    if (has_integral && std::abs(t) > 1.0) {
        if (t < 0.0 && b == 1.0 && -t > pol.asymptotic_threshold) {
            const double v = detail::ml_asymptotic_neg(a, -t);
            if (!std::isnan(v)) return v;
        }
        return detail::ml_integral(a, b, t);
    }

    const auto s = detail::ml_series_sum(p, t, pol);
    if (t < 0.0) {
        // Each term carries ~1 ulp of error; cancellation amplifies it by abs_sum/|sum|.
        const double rel = 4.0 * std::numeric_limits<double>::epsilon() * s.abs_sum /
                           std::max(std::abs(s.value), std::numeric_limits<double>::min());
        if (rel > 1e-10)
            throw NonConvergenceError("mittag_leffler: series loses precision at t=" + std::to_string(t) +
                                      " (alpha=" + std::to_string(a) + ", beta=" + std::to_string(b) + ")");
    }
    return s.value;
}

} // namespace fracalc
