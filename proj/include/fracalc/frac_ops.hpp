#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "history.hpp"
#include "quadrature.hpp"
#include "special_fn.hpp"

namespace fracalc {

// Zero eps/horizon select the defaults 1e-6*(|t|+1) and 1e4*(|t|+1).
struct QuadratureSpec {
    double eps = 0.0;
    double horizon = 0.0;
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    int max_subdiv = 60;
};

struct Estimate {
    double value = 0.0;
    double est_error = 0.0;
};

namespace detail {

inline void validate(const QuadratureSpec& q)
{
    require(q.eps >= 0.0 && q.horizon >= 0.0, "QuadratureSpec: eps and horizon must be >= 0");
    require(q.eps == 0.0 || q.horizon == 0.0 || q.eps < q.horizon, "QuadratureSpec: eps must be < horizon");
    require(q.rel_tol > 0.0 && q.abs_tol > 0.0, "QuadratureSpec: tolerances must be > 0");
    require(q.max_subdiv >= 1, "QuadratureSpec: max_subdiv must be >= 1");
}

inline void validate_order(double alpha)
{
    require(alpha > 0.0 && alpha < 1.0, "fractional order alpha must lie in (0,1)");
}

inline double split_eps(const QuadratureSpec& q, double t) { return q.eps > 0.0 ? q.eps : 1e-6 * (std::abs(t) + 1.0); }
inline double horizon(const QuadratureSpec& q, double t)
{
    return q.horizon > 0.0 ? q.horizon : 1e4 * (std::abs(t) + 1.0);
}

// c_alpha = -1/Gamma(-alpha) = alpha/Gamma(1-alpha) > 0.
inline double marchaud_constant(double alpha) { return alpha / gamma(1.0 - alpha); }

// (b^a - c^a) for b = c(1+h/c), accurate when h << c.
inline double pow_diff(double lo, double hi, double a)
{
    if (lo == 0.0) return std::pow(hi, a);
    return std::pow(lo, a) * std::expm1(a * std::log1p((hi - lo) / lo));
}

template <class F>
quad::Result checked_integral(F&& f, double a, double b, const std::vector<double>& breaks, double abs_tol,
                              const QuadratureSpec& q, const char* what)
{
    auto r = quad::integrate(std::forward<F>(f), a, b, breaks, abs_tol, q.rel_tol, q.max_subdiv);
    if (!r.converged && r.abs_error > 1e3 * std::max(abs_tol, q.rel_tol * std::abs(r.value)))
        throw NonConvergenceError(std::string(what) + ": quadrature did not converge (est. error " +
                                  std::to_string(r.abs_error) + ")");
    return r;
}

inline void check_power_tail(const TailView& tv, double alpha)
{
    if (tv.kind == TailView::Kind::Power && !(tv.p > alpha))
        throw DivergentTailError("PowerDecay tail requires p > alpha (p=" + std::to_string(tv.p) +
                                 ", alpha=" + std::to_string(alpha) + ")");
}

// Integral over [R0, inf) of r^-p (r + t)^e, with t + R0 > 0 and p - e > 1.
inline quad::Result power_tail_integral(double R0, double t, double p, double e, const QuadratureSpec& q)
{
    const double decay = p - e - 1.0;
    const double V = 40.0 / decay;
    auto f = [&](double v) {
        const double r = R0 * std::exp(v);
        return std::pow(r, 1.0 - p) * std::pow(r + t, e);
    };
    return checked_integral(f, 0.0, V, {}, 0.0, q, "PowerDecay tail");
}

// Marchaud derivative of piecewise-linear samples by exact product integration.
inline Estimate marchaud_sampled(const kind::Samples& s, double scale, double alpha, double t, const QuadratureSpec& q)
{
    const auto& x = s.knots;
    const auto& v = s.values;
    const double ca = marchaud_constant(alpha);
    const TailModel& tail = s.tail;
    if (t <= x.front()) {
        if (t == x.front()) {
            const double jump = v.front() - HistoryFunction::tail_value(tail, t);
            if (jump != 0.0) return {std::copysign(std::numeric_limits<double>::infinity(), scale * jump), 0.0};
        }
        if (const auto* pd = std::get_if<PowerDecay>(&tail))
            return {scale * pd->C * gamma(pd->p + alpha) / gamma(pd->p) * std::pow(-t, -pd->p - alpha), 0.0};
        return {0.0, 0.0};
    }
    if (t > x.back()) throw RangeError("marchaud_derivative: t=" + std::to_string(t) + " beyond last sample");
    const std::size_t i = HistoryFunction::segment(s, t);
    const double ut = v[i] + (t - x[i]) / (x[i + 1] - x[i]) * (v[i + 1] - v[i]);

    long double sum = 0.0L, mag = 0.0L;
    for (std::size_t j = i + 1; j-- > 0;) {
        const double lo_tau = x[j], hi_tau = std::min(x[j + 1], t);
        if (hi_tau <= lo_tau) continue;
        const double m = (v[j + 1] - v[j]) / (x[j + 1] - x[j]);
        const double s_lo = t - hi_tau, s_hi = t - lo_tau;
        double term;
        if (s_lo == 0.0) {
            term = m * std::pow(s_hi, 1.0 - alpha) / (1.0 - alpha);
        } else {
            const double u_hi = v[j] + (hi_tau - x[j]) * m;  // value at tau = hi_tau
            const double i0 = -pow_diff(s_lo, s_hi, -alpha) / alpha;
            const double i1 = pow_diff(s_lo, s_hi, 1.0 - alpha) / (1.0 - alpha);
            term = (ut - u_hi - m * s_lo) * i0 + m * i1;
        }
        sum += term;
        mag += std::abs(term);
    }
    const double L = t - x.front();
    double err = 0.0;
    std::visit(
        [&](const auto& m) {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, ZeroBefore>) {
                sum += ut * std::pow(L, -alpha) / alpha;
            } else if constexpr (std::is_same_v<M, ConstantBefore>) {
                sum += (ut - m.c) * std::pow(L, -alpha) / alpha;
            } else {
                if (!(m.p > alpha))
                    throw DivergentTailError("PowerDecay tail requires p > alpha (p=" + std::to_string(m.p) + ")");
                const double R0 = -x.front();
                auto J = power_tail_integral(R0, t, m.p, -1.0 - alpha, q);
                sum += ut * std::pow(L, -alpha) / alpha - m.C * J.value;
                err += std::abs(m.C) * J.abs_error;
            }
        },
        tail);
    const double rounding = 8.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(mag);
    return {scale * ca * static_cast<double>(sum), std::abs(scale) * ca * (err + rounding)};
}

inline Estimate weyl_sampled(const kind::Samples& s, double scale, double alpha, double t, const QuadratureSpec& q)
{
    const auto& x = s.knots;
    const auto& v = s.values;
    const double g = gamma(alpha);
    const TailModel& tail = s.tail;
    if (const auto* cb = std::get_if<ConstantBefore>(&tail); cb && cb->c != 0.0)
        throw DivergentTailError("weyl_integral: ConstantBefore tail with nonzero constant diverges");
    if (const auto* pd = std::get_if<PowerDecay>(&tail); pd && !(pd->p > alpha))
        throw DivergentTailError("weyl_integral: PowerDecay tail requires p > alpha");
    if (t <= x.front()) {
        if (const auto* pd = std::get_if<PowerDecay>(&tail))
            return {scale * pd->C * gamma(pd->p - alpha) / gamma(pd->p) * std::pow(-t, alpha - pd->p), 0.0};
        return {0.0, 0.0};
    }
    if (t > x.back()) throw RangeError("weyl_integral: t=" + std::to_string(t) + " beyond last sample");
    const std::size_t i = HistoryFunction::segment(s, t);

    long double sum = 0.0L, mag = 0.0L;
    for (std::size_t j = i + 1; j-- > 0;) {
        const double lo_tau = x[j], hi_tau = std::min(x[j + 1], t);
        if (hi_tau <= lo_tau) continue;
        const double m = (v[j + 1] - v[j]) / (x[j + 1] - x[j]);
        const double s_lo = t - hi_tau, s_hi = t - lo_tau;
        const double u_hi = v[j] + (hi_tau - x[j]) * m;
        // u(t - s) = u_hi + m s_lo - m s on this segment
        const double j0 = pow_diff(s_lo, s_hi, alpha) / alpha;
        const double j1 = pow_diff(s_lo, s_hi, 1.0 + alpha) / (1.0 + alpha);
        const double term = (u_hi + m * s_lo) * j0 - m * j1;
        sum += term;
        mag += std::abs(term);
    }
    double err = 0.0;
    if (const auto* pd = std::get_if<PowerDecay>(&tail)) {
        auto J = power_tail_integral(-x.front(), t, pd->p, alpha - 1.0, q);
        sum += pd->C * J.value;
        err += std::abs(pd->C) * J.abs_error;
    }
    const double rounding = 8.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(mag);
    return {scale * static_cast<double>(sum) / g, std::abs(scale) * (err + rounding) / g};
}

} // namespace detail

// Left Marchaud derivative D^alpha u(t) = c_alpha int_0^inf (u(t) - u(t-s)) s^(-1-alpha) ds.
inline Estimate marchaud_derivative(const HistoryFunction& u, double alpha, double t, const QuadratureSpec& q = {})
{
    detail::validate_order(alpha);
    detail::validate(q);
    require(std::isfinite(t), "marchaud_derivative: t must be finite");
    if (u.is_sampled()) return detail::marchaud_sampled(u.samples(), 1.0, alpha, t, q);
    if (std::holds_alternative<kind::Constant>(u.variant())) return {0.0, 0.0};

    const TailView tv = u.tail_view();
    if (tv.kind == TailView::Kind::Constant && t <= tv.start) return {0.0, 0.0};
    const double ca = detail::marchaud_constant(alpha);
    const double ut = u(t);
    const bool decaying = tv.kind == TailView::Kind::Decaying;
    const double L = decaying ? detail::horizon(q, t) : t - tv.start;
    const double e = std::min(detail::split_eps(q, t), 1e-3 * L);

    const double near = u.derivative(t) * std::pow(e, 1.0 - alpha) / (1.0 - alpha);
    auto f = [&](double lv) {
        const double s = std::exp(lv);
        return (ut - u(t - s)) * std::exp(-alpha * lv);
    };
    const auto mid = detail::checked_integral(f, std::log(e), std::log(L), {}, q.abs_tol / ca, q, "marchaud_derivative");
    double tail = 0.0, tail_err = 0.0;
    if (decaying) {
        tail = ut * std::pow(L, -alpha) / alpha;
        tail_err = std::abs(u(t - L)) * std::pow(L, -alpha) / alpha;
    } else {
        tail = (ut - tv.c) * std::pow(L, -alpha) / alpha;
    }
    // Taylor remainder of the near-field replacement, from a one-sided second difference.
    const double h = std::min(e, 1e-4 * L);
    const double u2 = std::abs(u.derivative(t) - u.derivative(t - h)) / h;
    const double near_err = 0.5 * u2 * std::pow(e, 2.0 - alpha) / (2.0 - alpha);
    return {ca * (near + mid.value + tail), ca * (mid.abs_error + tail_err + near_err)};
}

// Weyl fractional integral D^-alpha u(t) = (1/Gamma(alpha)) int_0^inf u(t-s) s^(alpha-1) ds.
inline Estimate weyl_integral(const HistoryFunction& u, double alpha, double t, const QuadratureSpec& q = {})
{
    detail::validate_order(alpha);
    detail::validate(q);
    require(std::isfinite(t), "weyl_integral: t must be finite");
    if (u.is_sampled()) return detail::weyl_sampled(u.samples(), 1.0, alpha, t, q);

    const TailView tv = u.tail_view();
    if (tv.kind == TailView::Kind::Constant && tv.c != 0.0)
        throw DivergentTailError("weyl_integral: operand tends to a nonzero constant at -infinity (" + u.name() + ")");
    if (tv.kind == TailView::Kind::Constant && t <= tv.start) return {0.0, 0.0};
    const double g = gamma(alpha);
    const bool decaying = tv.kind == TailView::Kind::Decaying;
    const double L = decaying ? detail::horizon(q, t) : t - tv.start;
    const double e = std::min(detail::split_eps(q, t), 1e-3 * L);

    const double ut = u(t), du = u.derivative(t);
    const double near = ut * std::pow(e, alpha) / alpha - du * std::pow(e, 1.0 + alpha) / (1.0 + alpha);
    auto f = [&](double lv) {
        const double s = std::exp(lv);
        return u(t - s) * std::exp(alpha * lv);
    };
    const auto mid = detail::checked_integral(f, std::log(e), std::log(L), {}, q.abs_tol * g, q, "weyl_integral");
    const double tail_err = decaying ? std::abs(u(t - L)) * std::pow(L, alpha) : 0.0;
    return {(near + mid.value) / g, (mid.abs_error + tail_err) / g};
}

// Right derivative of u at t, given the reflection v(tau) = u(-tau).
inline Estimate right_derivative(const HistoryFunction& reflected, double alpha, double t, const QuadratureSpec& q = {})
{
    return marchaud_derivative(reflected, alpha, -t, q);
}

// Reflection tau -> -tau of a sampled operand. future_tail describes u to the
// right of its last sample; it becomes the reflected operand's past.
inline HistoryFunction mirror(const HistoryFunction& u, TailModel future_tail = ZeroBefore{})
{
    require(u.is_sampled(), "mirror: only sampled operands can be reflected");
    const auto& s = u.samples();
    std::vector<double> knots(s.knots.rbegin(), s.knots.rend());
    for (double& k : knots) k = -k;
    std::vector<double> values(s.values.rbegin(), s.values.rend());
    if (s.uniform) {
        const double dt = (s.knots.back() - s.knots.front()) / static_cast<double>(s.knots.size() - 1);
        return HistoryFunction::grid_sampled(knots.front(), dt, std::move(values), future_tail);
    }
    return HistoryFunction::piecewise_linear(std::move(knots), std::move(values), future_tail);
}

// n-th classical derivative as a new operand.
inline HistoryFunction differentiate(const HistoryFunction& u, int n)
{
    require(n >= 0, "differentiate: n must be >= 0");
    if (n == 0) return u;
    const double a = u.amplitude();
    return std::visit(
        [&](const auto& k) -> HistoryFunction {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, kind::Constant>) {
                return HistoryFunction::constant(0.0);
            } else if constexpr (std::is_same_v<K, kind::PowerPlus>) {
                if (k.beta < n)
                    throw DomainError("composite_derivative: (t_+)^beta with beta=" + std::to_string(k.beta) +
                                      " is not " + std::to_string(n) + " times differentiable");
                double c = a;
                for (int i = 0; i < n; ++i) c *= (k.beta - i);
                return HistoryFunction::power_plus_unchecked(k.beta - n, c);
            } else if constexpr (std::is_same_v<K, kind::Exponential>) {
                return HistoryFunction::exponential(k.lambda).scaled(a * std::pow(k.lambda, n));
            } else if constexpr (std::is_same_v<K, kind::Samples>) {
                HistoryFunction cur = u;
                for (int r = 0; r < n; ++r) {
                    const auto& s = cur.samples();
                    const auto& x = s.knots;
                    const auto& v = s.values;
                    const std::size_t m = x.size();
                    if (std::abs(HistoryFunction::tail_value(s.tail, x.front()) - v.front()) >
                        1e-12 * (1.0 + std::abs(v.front())))
                        throw DomainError("composite_derivative: sampled operand jumps at its tail junction");
                    std::vector<double> d(m);
                    for (std::size_t i = 0; i < m; ++i) {
                        if (i == 0)
                            d[i] = (v[1] - v[0]) / (x[1] - x[0]);
                        else if (i + 1 == m)
                            d[i] = (v[m - 1] - v[m - 2]) / (x[m - 1] - x[m - 2]);
                        else
                            d[i] = (v[i + 1] - v[i - 1]) / (x[i + 1] - x[i - 1]);
                    }
                    TailModel nt = ZeroBefore{x.front()};
                    if (const auto* pd = std::get_if<PowerDecay>(&s.tail))
                        nt = PowerDecay{pd->C * pd->p, pd->p + 1.0, x.front()};
                    if (d.size() >= 2 && !s.uniform)
                        cur = HistoryFunction::piecewise_linear(x, std::move(d), nt);
                    else
                        cur = HistoryFunction::grid_sampled(x.front(), (x.back() - x.front()) / double(m - 1),
                                                            std::move(d), nt);
                }
                return cur;
            } else {
                throw DomainError("composite_derivative: " + u.name() + " operand is not differentiable on R");
            }
        },
        u.variant());
}

// D^(n+alpha) u(t) = D^alpha (d^n u / dt^n)(t).
inline Estimate composite_derivative(const HistoryFunction& u, FracOrder ord, double t, const QuadratureSpec& q = {})
{
    require(ord.n >= 0, "FracOrder: n must be >= 0");
    detail::validate_order(ord.alpha);
    return marchaud_derivative(differentiate(u, ord.n), ord.alpha, t, q);
}

// Piecewise-linear capture of f on [t_lo, t]: uniform steps h0 next to t, then
// geometrically growing steps (ratio) toward t_lo. Extra knots are inserted at breaks.
inline HistoryFunction graded_capture(const std::function<double(double)>& f, double t, double t_lo,
                                      const std::vector<double>& breaks, TailModel tail, double h0, double ratio,
                                      int uniform_steps = 100)
{
    require(t > t_lo, "graded_capture: empty window");
    require(h0 > 0.0 && ratio >= 1.0, "graded_capture: invalid grading");
    std::vector<double> s{0.0};
    double step = h0;
    while (s.back() < t - t_lo) {
        s.push_back(std::min(s.back() + step, t - t_lo));
        if (static_cast<int>(s.size()) > uniform_steps) step *= ratio;
    }
    std::vector<double> knots;
    knots.reserve(s.size() + breaks.size());
    for (auto it = s.rbegin(); it != s.rend(); ++it) knots.push_back(t - *it);
    knots.front() = t_lo;
    for (double b : breaks)
        if (b > t_lo && b < t) knots.push_back(b);
    std::sort(knots.begin(), knots.end());
    std::vector<double> clean;
    for (double k : knots)
        if (clean.empty() || k - clean.back() > 1e-12 * (1.0 + std::abs(k))) clean.push_back(k);
    clean.back() = t;
    std::vector<double> values(clean.size());
    for (std::size_t i = 0; i < clean.size(); ++i) values[i] = f(clean[i]);
    return HistoryFunction::piecewise_linear(std::move(clean), std::move(values), tail);
}

// Returns (D^alpha D^-alpha u (t), u(t)).
inline std::pair<double, double> ftfc_roundtrip(const HistoryFunction& u, double alpha, double t,
                                                const QuadratureSpec& q = {})
{
    detail::validate_order(alpha);
    detail::validate(q);
    const TailView tv = u.tail_view();
    const double scale = std::abs(t) + 1.0;
    const double h0 = std::sqrt(q.rel_tol) * scale;
    const double ratio = 1.0 + 100.0 * std::sqrt(q.rel_tol);

    double t_lo;
    TailModel tail;
    std::vector<double> breaks;
    if (tv.kind == TailView::Kind::Decaying) {
        const auto& e = std::get<kind::Exponential>(u.variant());
        t_lo = t - 40.0 / e.lambda;
        tail = ZeroBefore{t_lo};
    } else if (tv.kind == TailView::Kind::Power) {
        t_lo = tv.start;
        const double p = tv.p - alpha;
        require(p > alpha, "ftfc_roundtrip: PowerDecay tail requires p > 2 alpha");
        tail = PowerDecay{tv.C * gamma(tv.p - alpha) / gamma(tv.p), p, t_lo};
    } else {
        if (tv.c != 0.0) throw DivergentTailError("ftfc_roundtrip: Weyl integral of " + u.name() + " diverges");
        if (t <= tv.start) return {0.0, u(t)};
        t_lo = tv.start;
        tail = ZeroBefore{t_lo};
    }
    if (u.is_sampled()) {
        // Kinks of the captured integral sit where the samples have slope jumps.
        const auto& s = u.samples();
        for (std::size_t i = 1; i + 1 < s.knots.size(); ++i) {
            const double l = (s.values[i] - s.values[i - 1]) / (s.knots[i] - s.knots[i - 1]);
            const double r = (s.values[i + 1] - s.values[i]) / (s.knots[i + 1] - s.knots[i]);
            if (std::abs(r - l) > 1e-6 * (1.0 + std::abs(l))) breaks.push_back(s.knots[i]);
        }
    } else if (t_lo < 0.0 && t > 0.0) {
        breaks.push_back(0.0);
    }
    auto weyl = [&](double tau) { return weyl_integral(u, alpha, tau, q).value; };
    const auto cap = graded_capture(weyl, t, t_lo, breaks, tail, h0, ratio);
    return {marchaud_derivative(cap, alpha, t, q).value, u(t)};
}

enum class LimitDirection { to_zero, to_one };

inline std::vector<double> consistency_limit_probe(const HistoryFunction& u, double t, LimitDirection dir,
                                                   const QuadratureSpec& q = {})
{
    const std::vector<double> orders =
        dir == LimitDirection::to_one ? std::vector<double>{0.9, 0.99, 0.999} : std::vector<double>{0.1, 0.01, 0.001};
    std::vector<double> out;
    for (double a : orders) out.push_back(marchaud_derivative(u, a, t, q).value);
    return out;
}

// int_{-inf}^{cutoff} u(tau) (t - tau)^(-1-alpha) dtau for t > cutoff.
inline double past_weighted_integral(const HistoryFunction& u, double alpha, double t, double cutoff,
                                     const QuadratureSpec& q = {})
{
    detail::validate_order(alpha);
    require(t > cutoff, "past_weighted_integral: t must exceed the cutoff");
    if (u.is_sampled()) {
        const auto& s = u.samples();
        const auto& x = s.knots;
        const auto& v = s.values;
        long double sum = 0.0L;
        const double lo = x.front();
        const double hi = std::min(cutoff, x.back());
        if (cutoff > x.back())
            throw RangeError("past_weighted_integral: samples end before the cutoff");
        for (std::size_t j = 0; j + 1 < x.size() && x[j] < hi; ++j) {
            const double a = x[j], b = std::min(x[j + 1], hi);
            const double m = (v[j + 1] - v[j]) / (x[j + 1] - x[j]);
            // u = v_j + m (tau - a) = (v_j + m (t - a)) - m (t - tau), with r = t - tau in [t-b, t-a]
            const double r_lo = t - b, r_hi = t - a;
            const double k0 = -detail::pow_diff(r_lo, r_hi, -alpha) / alpha;        // int r^(-1-alpha)
            const double k1 = detail::pow_diff(r_lo, r_hi, 1.0 - alpha) / (1.0 - alpha);  // int r^-alpha
            sum += (v[j] + m * (t - a)) * k0 - m * k1;
        }
        if (lo < cutoff) {
            const double L = t - lo;
            if (const auto* c = std::get_if<ConstantBefore>(&s.tail)) sum += c->c * std::pow(L, -alpha) / alpha;
            if (const auto* pd = std::get_if<PowerDecay>(&s.tail)) {
                require(pd->p > -alpha, "past_weighted_integral: PowerDecay exponent too small");
                sum += pd->C * detail::power_tail_integral(-lo, t, pd->p, -1.0 - alpha, q).value;
            }
        } else {
            // Cutoff inside the tail region.
            const double L = t - cutoff;
            if (const auto* c = std::get_if<ConstantBefore>(&s.tail)) sum += c->c * std::pow(L, -alpha) / alpha;
            if (const auto* pd = std::get_if<PowerDecay>(&s.tail))
                sum += pd->C * detail::power_tail_integral(-cutoff, t, pd->p, -1.0 - alpha, q).value;
        }
        return static_cast<double>(sum);
    }
    const TailView tv = u.tail_view();
    // In r = t - tau = e^w the integrand is u(t - r) r^-alpha dw.
    auto f = [&](double w) {
        const double r = std::exp(w);
        return u(t - r) * std::exp(-alpha * w);
    };
    const double r0 = t - cutoff;
    if (tv.kind == TailView::Kind::Constant) {
        const double start = std::min(tv.start, cutoff);
        double v = tv.c * std::pow(t - start, -alpha) / alpha;
        if (start < cutoff)
            v += detail::checked_integral(f, std::log(r0), std::log(t - start), {}, q.abs_tol, q, "history").value;
        return v;
    }
    const double A = detail::horizon(q, t);
    return detail::checked_integral(f, std::log(r0), std::log(r0 + A), {}, q.abs_tol, q, "history").value;
}

} // namespace fracalc
