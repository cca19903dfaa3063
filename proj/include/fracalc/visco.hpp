#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "frac_ops.hpp"
#include "history.hpp"
#include "special_fn.hpp"

namespace fracalc {

// Power-law material, G(t) = k t^-alpha for t > 0.
struct Material {
    double k = 1.0;
    double alpha = 0.5;
};

enum class PastRule { ConstantPast, ZeroPast };

// Piecewise-linear strain through (time, strain) breakpoints, held at the last
// value afterwards. Before the first breakpoint the strain is the first value
// (ConstantPast) or zero (ZeroPast); either way loading starts at the first time.
struct StrainProgram {
    std::vector<std::pair<double, double>> breakpoints;
    PastRule past = PastRule::ConstantPast;
};

namespace detail {

inline void validate(const Material& m)
{
    require(m.k > 0.0 && std::isfinite(m.k), "Material: k must be > 0");
    require(m.alpha > 0.0 && m.alpha < 1.0, "Material: alpha must lie in (0,1)");
}

inline void validate(const StrainProgram& s)
{
    require(!s.breakpoints.empty(), "StrainProgram: at least one breakpoint required");
    for (std::size_t i = 0; i < s.breakpoints.size(); ++i) {
        require(std::isfinite(s.breakpoints[i].first) && std::isfinite(s.breakpoints[i].second),
                "StrainProgram: breakpoints must be finite");
        if (i > 0)
            require(s.breakpoints[i].first > s.breakpoints[i - 1].first,
                    "StrainProgram: breakpoint times must be strictly increasing");
    }
}

// Strain at tau >= first breakpoint.
inline double strain_at(const StrainProgram& s, double tau)
{
    const auto& b = s.breakpoints;
    if (tau >= b.back().first) return b.back().second;
    std::size_t i = 0;
    while (tau >= b[i + 1].first) ++i;
    const double w = (tau - b[i].first) / (b[i + 1].first - b[i].first);
    return b[i].second + w * (b[i + 1].second - b[i].second);
}

inline double elapsed(const StrainProgram& s, double t)
{
    const double dt = t - s.breakpoints.front().first;
    if (!(dt > 0.0)) throw PoleError("visco: t must be after the first breakpoint (G is singular at 0)");
    return dt;
}

} // namespace detail

inline double modulus(const Material& m, double t)
{
    detail::validate(m);
    if (!(t > 0.0)) throw PoleError("modulus: G(t) is singular for t <= 0");
    return m.k * std::pow(t, -m.alpha);
}

// Stress after a step strain eps0 applied at time 0.
inline double relaxation_test(const Material& m, double eps0, double t)
{
    require(std::isfinite(eps0), "relaxation_test: eps0 must be finite");
    return eps0 * modulus(m, t);
}

// Discrete Boltzmann sum with dtau = (t - t_s)/(N + 1).
inline double superposition_sum(const Material& m, const StrainProgram& s, double t, long N)
{
    detail::validate(m);
    detail::validate(s);
    require(N >= 1, "superposition_sum: N must be >= 1");
    const double t_s = s.breakpoints.front().first;
    const double L = detail::elapsed(s, t);
    const double dtau = L / static_cast<double>(N + 1);
    double sigma = s.breakpoints.front().second * modulus(m, L);
    double prev = s.breakpoints.front().second;
    for (long n = 1; n <= N; ++n) {
        const double cur = detail::strain_at(s, t_s + dtau * static_cast<double>(n));
        sigma += (cur - prev) * modulus(m, L - dtau * static_cast<double>(n));
        prev = cur;
    }
    return sigma;
}

// eps(t_s) G(t - t_s) + int_{t_s}^t eps'(tau) G(t - tau) dtau, segment by segment.
inline double superposition_integral(const Material& m, const StrainProgram& s, double t)
{
    detail::validate(m);
    detail::validate(s);
    const double L = detail::elapsed(s, t);
    const auto& b = s.breakpoints;
    const double a1 = 1.0 - m.alpha;
    double sigma = b.front().second * modulus(m, L);
    for (std::size_t i = 0; i + 1 < b.size() && b[i].first < t; ++i) {
        const double lo = b[i].first, hi = std::min(b[i + 1].first, t);
        const double slope = (b[i + 1].second - b[i].second) / (b[i + 1].first - b[i].first);
        // int_lo^hi (t - tau)^-alpha dtau = ((t-lo)^(1-alpha) - (t-hi)^(1-alpha)) / (1-alpha)
        sigma += slope * m.k * detail::pow_diff(t - hi, t - lo, a1) / a1;
    }
    return sigma;
}

// k Gamma(1 - alpha) = alpha k |Gamma(-alpha)|.
inline double fractional_constant(const Material& m)
{
    detail::validate(m);
    return m.k * gamma(1.0 - m.alpha);
}

// The strain as a piecewise-linear operand, constant before the first breakpoint.
inline HistoryFunction strain_history(const StrainProgram& s, double t)
{
    detail::validate(s);
    std::vector<double> knots, values;
    for (const auto& [tau, e] : s.breakpoints) {
        knots.push_back(tau);
        values.push_back(e);
    }
    if (knots.size() == 1 || t > knots.back()) {
        knots.push_back(std::max(t, knots.back() + 1.0));
        values.push_back(values.back());
    }
    return HistoryFunction::piecewise_linear(std::move(knots), std::move(values),
                                             ConstantBefore{s.breakpoints.front().second, s.breakpoints.front().first});
}

// eps(t_s) G(t - t_s) + c_{k,alpha} D^alpha eps (t).
inline Estimate fractional_form(const Material& m, const StrainProgram& s, double t, const QuadratureSpec& q = {})
{
    detail::validate(m);
    detail::validate(s);
    if (s.past != PastRule::ConstantPast)
        throw DomainError("fractional_form: requires ConstantPast (the strain must be held constant before loading)");
    const double L = detail::elapsed(s, t);
    const double c = fractional_constant(m);
    const auto d = marchaud_derivative(strain_history(s, t), m.alpha, t, q);
    return {s.breakpoints.front().second * modulus(m, L) + c * d.value, c * d.est_error};
}

} // namespace fracalc
