#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"
#include "quadrature.hpp"
#include "special_fn.hpp"

namespace fracalc {

// Fundamental solution of d^alpha u / dt^alpha = (k/2) u_xx started from a point mass.
struct DiffusionParams {
    double alpha = 1.0;
    double k_alpha = 1.0;
    double t = 1.0;
};

// omega_max = 0 picks the cutoff from the residual tail bound. n_omega is the
// minimum number of 16-point Gauss panels on [0, omega_max].
struct SpectralGrid {
    double omega_max = 0.0;
    int n_omega = 1024;
    double tail_tol = 1e-12;
};

namespace detail {

inline void validate(const DiffusionParams& p)
{
    require(p.alpha > 0.0 && p.alpha <= 1.0, "diffusion: alpha must lie in (0,1]");
    require(p.k_alpha > 0.0 && std::isfinite(p.k_alpha), "diffusion: k_alpha must be > 0");
    require(p.t > 0.0 && std::isfinite(p.t), "diffusion: t must be > 0");
}

inline void validate(const SpectralGrid& g)
{
    require(g.omega_max >= 0.0 && std::isfinite(g.omega_max), "SpectralGrid: omega_max must be >= 0");
    require(g.n_omega >= 256 && (g.n_omega & (g.n_omega - 1)) == 0, "SpectralGrid: n_omega must be a power of two >= 256");
    require(g.tail_tol > 0.0, "SpectralGrid: tail_tol must be > 0");
}

} // namespace detail

// Length scale s = sqrt(k t^alpha / 2); u(x,t) = H(|x|/s)/s.
inline double similarity_scale(const DiffusionParams& p)
{
    detail::validate(p);
    return std::sqrt(0.5 * p.k_alpha * std::pow(p.t, p.alpha));
}

// H_alpha(r) = (1/pi) int_0^inf E_alpha(-xi^2) cos(xi r) dxi, evaluated for 0 <= r <= r_max.
// Two Lorentzians carry the xi^-2 and xi^-4 decay of E_alpha and are inverted in closed
// form; the xi^-6 residual is integrated by composite Gauss-Legendre.
class SimilarityProfile {
public:
    SimilarityProfile(double alpha, double r_max, const SpectralGrid& g = {}, double xi_max = 0.0) : alpha_(alpha)
    {
        require(alpha > 0.0 && alpha <= 1.0, "SimilarityProfile: alpha must lie in (0,1]");
        require(r_max >= 0.0 && std::isfinite(r_max), "SimilarityProfile: r_max must be finite and >= 0");
        detail::validate(g);
        if (alpha == 1.0) return;
        const double P = rgamma(1.0 - alpha), Q = rgamma(1.0 - 2.0 * alpha);
        // A1 b1^2 + A2 b2^2 = P and A1 b1^4 + A2 b2^4 = Q with b1 = 1, b2 = 2.
        A2_ = (Q - P) / 12.0;
        A1_ = P - 4.0 * A2_;

        double X = xi_max;
        if (X <= 0.0) {
            X = 8.0;
            // int_X^inf |R| <= |R(X)| X / 5 once R ~ xi^-6.
            while (std::abs(residual(X)) * X / 5.0 / std::numbers::pi > g.tail_tol) {
                X *= 2.0;
                if (X > 1e5)
                    throw NonConvergenceError("SimilarityProfile: frequency cutoff exceeds the cap 1e5");
            }
        }
        xi_max_ = X;
        // Panels narrow enough for cos(xi r) at r_max.
        long panels = g.n_omega;
        while (X / static_cast<double>(panels) * r_max > 8.0) panels *= 2;
        if (panels > (1L << 22)) throw NonConvergenceError("SimilarityProfile: r_max too large for the spectral grid");
        const auto rule = quad::gauss_legendre(16);
        const double w = X / static_cast<double>(panels);
        xi_.reserve(panels * 16);
        wr_.reserve(panels * 16);
        for (long i = 0; i < panels; ++i) {
            const double c = (static_cast<double>(i) + 0.5) * w;
            for (std::size_t j = 0; j < rule.x.size(); ++j) {
                const double x = c + 0.5 * w * rule.x[j];
                xi_.push_back(x);
                wr_.push_back(0.5 * w * rule.w[j] * residual(x) / std::numbers::pi);
            }
        }
        r_max_ = r_max;
    }

    double alpha() const { return alpha_; }
    double xi_max() const { return xi_max_; }
    std::size_t nodes() const { return xi_.size(); }

    double operator()(double r) const
    {
        r = std::abs(r);
        if (alpha_ == 1.0) return std::exp(-0.25 * r * r) / (2.0 * std::sqrt(std::numbers::pi));
        if (r > r_max_ * (1.0 + 1e-12))
            throw RangeError("SimilarityProfile: r=" + std::to_string(r) + " beyond r_max=" + std::to_string(r_max_));
        double s = 0.5 * A1_ * std::exp(-r) + A2_ * std::exp(-2.0 * r);
        long double acc = 0.0L;
        for (std::size_t i = 0; i < xi_.size(); ++i) acc += wr_[i] * std::cos(xi_[i] * r);
        return s + static_cast<double>(acc);
    }

    // int_0^R r^m H(r) dr for m = 0 or 2, integrating the representation exactly in r.
    double moment(double R, int m) const
    {
        require(m == 0 || m == 2, "SimilarityProfile::moment: m must be 0 or 2");
        require(R >= 0.0 && R <= r_max_ * (1.0 + 1e-12), "SimilarityProfile::moment: R outside [0, r_max]");
        // int_0^R r^m e^(-b r) dr
        auto expo = [&](double b) {
            const double x = b * R, e = std::exp(-x);
            return m == 0 ? -std::expm1(-x) / b : 2.0 / (b * b * b) * (1.0 - e * (1.0 + x + 0.5 * x * x));
        };
        double s = 0.5 * A1_ * expo(1.0) + A2_ * expo(2.0);
        long double acc = 0.0L;
        for (std::size_t i = 0; i < xi_.size(); ++i) acc += wr_[i] * cos_moment(xi_[i], R, m);
        return s + static_cast<double>(acc);
    }

private:
    // int_0^R r^m cos(xi r) dr
    static double cos_moment(double xi, double R, int m)
    {
        const double x = xi * R;
        if (x < 0.1) {
            const double x2 = x * x;
            if (m == 0) return R * (1.0 - x2 / 6.0 + x2 * x2 / 120.0 - x2 * x2 * x2 / 5040.0);
            return R * R * R * (1.0 / 3.0 - x2 / 10.0 + x2 * x2 / 168.0 - x2 * x2 * x2 / 6480.0);
        }
        const double sn = std::sin(x), cs = std::cos(x);
        if (m == 0) return sn / xi;
        return (R * R * sn) / xi + 2.0 * R * cs / (xi * xi) - 2.0 * sn / (xi * xi * xi);
    }

    double residual(double xi) const
    {
        const double z = xi * xi;
        EvalPolicy pol;
        pol.asymptotic_threshold = 1e3;
        return mittag_leffler({alpha_, 1.0}, -z, pol) - A1_ / (1.0 + z) - 4.0 * A2_ / (4.0 + z);
    }

    double alpha_;
    double A1_ = 0.0, A2_ = 0.0;
    double xi_max_ = 0.0, r_max_ = 0.0;
    std::vector<double> xi_, wr_;
};

inline std::vector<double> self_similar_profile(double alpha, const std::vector<double>& r, const SpectralGrid& g = {})
{
    double rmax = 0.0;
    for (double v : r) {
        require(v >= 0.0 && std::isfinite(v), "self_similar_profile: r must be finite and >= 0");
        rmax = std::max(rmax, v);
    }
    const SimilarityProfile H(alpha, rmax, g);
    std::vector<double> out(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) out[i] = H(r[i]);
    return out;
}

namespace detail {

inline double xi_cutoff(const DiffusionParams& p, const SpectralGrid& g)
{
    return g.omega_max > 0.0 ? g.omega_max * similarity_scale(p) : 0.0;
}

} // namespace detail

inline std::vector<double> fundamental_solution(const DiffusionParams& p, const std::vector<double>& x,
                                                const SpectralGrid& g = {})
{
    detail::validate(p);
    detail::validate(g);
    const double s = similarity_scale(p);
    double rmax = 0.0;
    for (double v : x) {
        require(std::isfinite(v), "fundamental_solution: x must be finite");
        rmax = std::max(rmax, std::abs(v) / s);
    }
    const SimilarityProfile H(p.alpha, rmax, g, detail::xi_cutoff(p, g));
    std::vector<double> u(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) u[i] = H(std::abs(x[i]) / s) / s;
    return u;
}

// int_0^R f(r) dr by 16-point Gauss panels of width <= 0.25.
template <class F>
double half_line_integral(F&& f, double R)
{
    static const auto rule = quad::gauss_legendre(16);
    const long panels = std::max(1L, static_cast<long>(std::ceil(R / 0.25)));
    const double w = R / static_cast<double>(panels);
    double sum = 0.0;
    for (long i = 0; i < panels; ++i) {
        const double c = (static_cast<double>(i) + 0.5) * w;
        for (std::size_t j = 0; j < rule.x.size(); ++j) sum += 0.5 * w * rule.w[j] * f(c + 0.5 * w * rule.x[j]);
    }
    return sum;
}

struct Moments {
    double normalization = 0.0;  // int u dx
    double msd = 0.0;            // int x^2 u dx
    double r_max = 0.0;          // truncation in similarity units
};

// Moments of u(., t). The truncation doubles until the second moment settles to 1e-4.
inline Moments moments(const DiffusionParams& p, const SpectralGrid& g = {})
{
    detail::validate(p);
    detail::validate(g);
    const double s = similarity_scale(p);
    auto eval = [&](double R) {
        const SimilarityProfile H(p.alpha, R, g, detail::xi_cutoff(p, g));
        Moments m;
        m.r_max = R;
        if (p.alpha == 1.0) {
            m.normalization = 2.0 * half_line_integral([&](double r) { return H(r); }, R);
            m.msd = 2.0 * s * s * half_line_integral([&](double r) { return r * r * H(r); }, R);
        } else {
            m.normalization = 2.0 * H.moment(R, 0);
            m.msd = 2.0 * s * s * H.moment(R, 2);
        }
        return m;
    };
    Moments a = eval(16.0);
    for (double R = 32.0; R <= 256.0; R *= 2.0) {
        const Moments b = eval(R);
        if (std::abs(b.msd - a.msd) <= 1e-4 * std::abs(b.msd) && std::abs(b.normalization - a.normalization) <= 1e-8)
            return b;
        a = b;
    }
    throw NonConvergenceError("moments: second moment did not converge as the x-range grew");
}

inline double msd_check(const DiffusionParams& p, const SpectralGrid& g = {}) { return moments(p, g).msd; }

// k t^alpha / Gamma(1 + alpha).
inline double msd_exact(const DiffusionParams& p)
{
    detail::validate(p);
    return p.k_alpha * std::pow(p.t, p.alpha) * rgamma(1.0 + p.alpha);
}

} // namespace fracalc
