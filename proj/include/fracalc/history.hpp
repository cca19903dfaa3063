#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "special_fn.hpp"

namespace fracalc {

// Behaviour of an operand before t_start.
struct ZeroBefore {
    double t_start = 0.0;
};
struct ConstantBefore {
    double c = 0.0;
    double t_start = 0.0;
};
// u(tau) = C |tau|^-p for tau <= t_start (t_start < 0).
struct PowerDecay {
    double C = 0.0;
    double p = 1.0;
    double t_start = -1.0;
};
using TailModel = std::variant<ZeroBefore, ConstantBefore, PowerDecay>;

inline double tail_start(const TailModel& m)
{
    return std::visit([](const auto& x) { return x.t_start; }, m);
}

inline TailModel with_start(TailModel m, double t_start)
{
    std::visit([&](auto& x) { x.t_start = t_start; }, m);
    return m;
}

struct FracOrder {
    int n = 0;
    double alpha = 0.5;
};

namespace kind {
struct Constant {
    double c;
};
struct PowerPlus {
    double beta;
};
struct ModifiedPower {
    double beta;
};
struct Exponential {
    double lambda;
};
struct MittagLefflerPower {
    double alpha;
    double lambda;
};
// Piecewise-linear samples. Uniform grids are the GridSampled kind.
struct Samples {
    std::vector<double> knots;
    std::vector<double> values;
    TailModel tail;
    bool uniform = false;
};
} // namespace kind

// Summary of how an operand behaves to the left, used by the quadrature code.
struct TailView {
    enum class Kind { Constant, Power, Decaying } kind = Kind::Decaying;
    double start = -std::numeric_limits<double>::infinity();
    double c = 0.0;  // constant value (Constant)
    double C = 0.0;  // amplitude (Power)
    double p = 0.0;  // exponent (Power)
};

class HistoryFunction {
public:
    using Variant = std::variant<kind::Constant, kind::PowerPlus, kind::ModifiedPower, kind::Exponential,
                                 kind::MittagLefflerPower, kind::Samples>;

    static HistoryFunction constant(double c)
    {
        require(std::isfinite(c), "Constant: value must be finite");
        return HistoryFunction(kind::Constant{c});
    }
    static HistoryFunction power_plus(double beta)
    {
        require(beta > 0.0 && std::isfinite(beta), "PowerPlus: beta must be > 0");
        return HistoryFunction(kind::PowerPlus{beta});
    }
    static HistoryFunction modified_power(double beta)
    {
        require(beta > 0.0 && std::isfinite(beta), "ModifiedPower: beta must be > 0");
        return HistoryFunction(kind::ModifiedPower{beta});
    }
    static HistoryFunction exponential(double lambda)
    {
        require(lambda > 0.0 && std::isfinite(lambda), "Exponential: lambda must be > 0");
        return HistoryFunction(kind::Exponential{lambda});
    }
    static HistoryFunction mittag_leffler_power(double alpha, double lambda)
    {
        require(alpha > 0.0 && alpha <= 1.0, "MittagLefflerPower: alpha must be in (0,1]");
        require(std::isfinite(lambda), "MittagLefflerPower: lambda must be finite");
        return HistoryFunction(kind::MittagLefflerPower{alpha, lambda});
    }
    // Uniform samples values[i] at t0 + i*dt. The tail applies before t0.
    static HistoryFunction grid_sampled(double t0, double dt, std::vector<double> values, TailModel tail)
    {
        require(dt > 0.0 && std::isfinite(dt), "GridSampled: dt must be > 0");
        require(values.size() >= 2, "GridSampled: at least 2 samples required");
        std::vector<double> knots(values.size());
        for (std::size_t i = 0; i < knots.size(); ++i) knots[i] = t0 + dt * static_cast<double>(i);
        return sampled(std::move(knots), std::move(values), tail, true);
    }
    // Nonuniform knots, strictly increasing.
    static HistoryFunction piecewise_linear(std::vector<double> knots, std::vector<double> values, TailModel tail)
    {
        require(knots.size() == values.size(), "PiecewiseLinear: knots and values differ in length");
        require(knots.size() >= 2, "PiecewiseLinear: at least 2 knots required");
        for (std::size_t i = 1; i < knots.size(); ++i)
            require(knots[i] > knots[i - 1], "PiecewiseLinear: knots must be strictly increasing");
        return sampled(std::move(knots), std::move(values), tail, false);
    }

    const Variant& variant() const { return v_; }
    double amplitude() const { return scale_; }
    bool is_sampled() const { return std::holds_alternative<kind::Samples>(v_); }
    const kind::Samples& samples() const { return std::get<kind::Samples>(v_); }

    std::string name() const
    {
        static const char* names[] = {"constant", "power_plus", "modified_power", "exponential",
                                      "mittag_leffler_power", "sampled"};
        return names[v_.index()];
    }

    // a*u. Sampled operands are scaled in place so they stay plain samples.
    HistoryFunction scaled(double a) const
    {
        HistoryFunction r = *this;
        if (auto* s = std::get_if<kind::Samples>(&r.v_)) {
            for (double& x : s->values) x *= a;
            std::visit(
                [&](auto& m) {
                    using M = std::decay_t<decltype(m)>;
                    if constexpr (std::is_same_v<M, ConstantBefore>) m.c *= a;
                    if constexpr (std::is_same_v<M, PowerDecay>) m.C *= a;
                },
                s->tail);
        } else {
            r.scale_ *= a;
        }
        return r;
    }

    double operator()(double t) const { return scale_ * std::visit([&](const auto& k) { return eval(k, t); }, v_); }

    // Left derivative u'(t-).
    double derivative(double t) const
    {
        return scale_ * std::visit([&](const auto& k) { return deriv(k, t); }, v_);
    }

    TailView tail_view() const
    {
        TailView tv;
        std::visit(
            [&](const auto& k) {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, kind::Constant>) {
                    tv.kind = TailView::Kind::Constant;
                    tv.start = std::numeric_limits<double>::infinity();
                    tv.c = k.c;
                } else if constexpr (std::is_same_v<K, kind::PowerPlus>) {
                    tv.kind = TailView::Kind::Constant;
                    tv.start = 0.0;
                } else if constexpr (std::is_same_v<K, kind::ModifiedPower> ||
                                     std::is_same_v<K, kind::MittagLefflerPower>) {
                    tv.kind = TailView::Kind::Constant;
                    tv.start = 0.0;
                    tv.c = 1.0;
                } else if constexpr (std::is_same_v<K, kind::Exponential>) {
                    tv.kind = TailView::Kind::Decaying;
                } else {
                    std::visit(
                        [&](const auto& m) {
                            using M = std::decay_t<decltype(m)>;
                            tv.start = m.t_start;
                            if constexpr (std::is_same_v<M, ZeroBefore>) {
                                tv.kind = TailView::Kind::Constant;
                            } else if constexpr (std::is_same_v<M, ConstantBefore>) {
                                tv.kind = TailView::Kind::Constant;
                                tv.c = m.c;
                            } else {
                                tv.kind = TailView::Kind::Power;
                                tv.C = m.C;
                                tv.p = m.p;
                            }
                        },
                        k.tail);
                }
            },
            v_);
        tv.c *= scale_;
        tv.C *= scale_;
        return tv;
    }

    // Internal: PowerPlus with beta >= 0, where beta = 0 is the Heaviside step.
    static HistoryFunction power_plus_unchecked(double beta, double amplitude)
    {
        HistoryFunction h(kind::PowerPlus{beta});
        h.scale_ = amplitude;
        return h;
    }

private:
    explicit HistoryFunction(Variant v) : v_(std::move(v)) {}

    static HistoryFunction sampled(std::vector<double> knots, std::vector<double> values, TailModel tail, bool uniform)
    {
        for (double x : values) require(std::isfinite(x), "sampled operand: values must be finite");
        tail = with_start(tail, knots.front());
        if (const auto* pd = std::get_if<PowerDecay>(&tail)) {
            require(knots.front() < 0.0, "PowerDecay tail: samples must start at a negative time");
            require(pd->p > 0.0, "PowerDecay tail: p must be > 0");
        }
        return HistoryFunction(kind::Samples{std::move(knots), std::move(values), tail, uniform});
    }

    static double eval(const kind::Constant& k, double) { return k.c; }
    static double eval(const kind::PowerPlus& k, double t)
    {
        if (t <= 0.0) return 0.0;
        return k.beta == 0.0 ? 1.0 : std::pow(t, k.beta);
    }
    static double eval(const kind::ModifiedPower& k, double t) { return t > 0.0 ? std::pow(t, k.beta) : 1.0; }
    static double eval(const kind::Exponential& k, double t) { return std::exp(k.lambda * t); }
    static double eval(const kind::MittagLefflerPower& k, double t)
    {
        if (t <= 0.0) return 1.0;
        return mittag_leffler({k.alpha, 1.0}, k.lambda * std::pow(t, k.alpha));
    }
    static double eval(const kind::Samples& s, double t)
    {
        const auto& x = s.knots;
        if (t < x.front()) return tail_value(s.tail, t);
        if (t > x.back()) throw RangeError("sampled operand: t=" + std::to_string(t) + " beyond last sample");
        const std::size_t i = segment(s, t);
        const double w = (t - x[i]) / (x[i + 1] - x[i]);
        return s.values[i] + w * (s.values[i + 1] - s.values[i]);
    }

    static double deriv(const kind::Constant&, double) { return 0.0; }
    static double deriv(const kind::PowerPlus& k, double t)
    {
        if (t <= 0.0 || k.beta == 0.0) return 0.0;
        return k.beta * std::pow(t, k.beta - 1.0);
    }
    static double deriv(const kind::ModifiedPower& k, double t)
    {
        return t > 0.0 ? k.beta * std::pow(t, k.beta - 1.0) : 0.0;
    }
    static double deriv(const kind::Exponential& k, double t) { return k.lambda * std::exp(k.lambda * t); }
    static double deriv(const kind::MittagLefflerPower& k, double t)
    {
        if (t <= 0.0 || k.lambda == 0.0) return 0.0;
        const double ta = std::pow(t, k.alpha);
        return k.lambda * ta / t * mittag_leffler({k.alpha, k.alpha}, k.lambda * ta);
    }
    static double deriv(const kind::Samples& s, double t)
    {
        const auto& x = s.knots;
        if (t <= x.front()) return tail_slope(s.tail, t);
        if (t > x.back()) throw RangeError("sampled operand: t=" + std::to_string(t) + " beyond last sample");
        std::size_t i = segment(s, t);
        if (t == x[i] && i > 0) --i;  // left derivative at a knot
        return (s.values[i + 1] - s.values[i]) / (x[i + 1] - x[i]);
    }

public:
    // Index i of the segment [x_i, x_{i+1}] containing t (t inside the sampled range).
    static std::size_t segment(const kind::Samples& s, double t)
    {
        const auto& x = s.knots;
        const std::size_t n = x.size();
        std::size_t i;
        if (s.uniform) {
            const double dt = (x.back() - x.front()) / static_cast<double>(n - 1);
            i = static_cast<std::size_t>(std::max(0.0, std::floor((t - x.front()) / dt)));
            i = std::min(i, n - 2);
            while (i > 0 && t < x[i]) --i;
            while (i + 2 < n && t >= x[i + 1]) ++i;
        } else {
            i = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), t) - x.begin());
            i = i == 0 ? 0 : std::min(i - 1, n - 2);
        }
        return i;
    }

    static double tail_value(const TailModel& m, double t)
    {
        if (const auto* c = std::get_if<ConstantBefore>(&m)) return c->c;
        if (const auto* p = std::get_if<PowerDecay>(&m)) return p->C * std::pow(std::abs(t), -p->p);
        return 0.0;
    }
    static double tail_slope(const TailModel& m, double t)
    {
        if (const auto* p = std::get_if<PowerDecay>(&m)) return p->C * p->p * std::pow(std::abs(t), -p->p - 1.0);
        return 0.0;
    }

private:
    Variant v_;
    double scale_ = 1.0;
};

} // namespace fracalc
