#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"
#include "frac_ops.hpp"
#include "history.hpp"
#include "quadrature.hpp"
#include "special_fn.hpp"

namespace fracalc {

// Strip [T0, T1] x [0, Y]. Y = 0 picks a depth from the operand's time scale.
struct ExtensionSpec {
    double T0 = 1.0;
    double T1 = 2.0;
    long n_t = 1000;    // time steps
    long M = 800;       // y intervals
    double grading = 2.0;
    double Y = 0.0;
    int n_trace = 11;   // evenly spaced trace points on [T0, T1]
};

struct ExtensionGrid {
    double alpha = 0.5;
    std::vector<double> t_grid;
    std::vector<double> y_grid;
    std::vector<double> U;  // (t index) x (y index), row-major
    HistoryFunction u = HistoryFunction::constant(0.0);
    int n_trace = 11;

    double at(std::size_t n, std::size_t j) const { return U[n * y_grid.size() + j]; }
};

struct TraceResult {
    std::vector<double> t_points;
    std::vector<double> trace;
    std::vector<double> oracle;  // D^alpha u at t_points
    double d_alpha_est = 0.0;
};

namespace detail {

inline void validate(const ExtensionSpec& s)
{
    require(s.T1 > s.T0 && std::isfinite(s.T0) && std::isfinite(s.T1), "extension: need T0 < T1");
    require(s.n_t >= 2, "extension: n_t must be >= 2");
    require(s.M >= 8, "extension: M must be >= 8");
    require(s.grading >= 2.0, "extension: grading exponent must be >= 2");
    require(s.Y >= 0.0 && std::isfinite(s.Y), "extension: Y must be >= 0");
    require(s.n_trace >= 2, "extension: n_trace must be >= 2");
}

// Depth at which the operand's signal has decayed, from its time scale tau: the
// y-profile falls off like exp(-y / (2 sqrt(tau))) or faster.
inline double auto_depth(const HistoryFunction& u, const ExtensionSpec& s)
{
    double tau = s.T1 - s.T0;
    if (const auto* e = std::get_if<kind::Exponential>(&u.variant())) tau = std::max(tau, 1.0 / e->lambda);
    const TailView tv = u.tail_view();
    if (std::isfinite(tv.start) && tv.start < s.T0) tau = std::max(tau, s.T1 - tv.start);
    return 20.0 * std::sqrt(tau);
}

// Kinks of u (where the Poisson integrand loses smoothness).
inline std::vector<double> kinks(const HistoryFunction& u)
{
    std::vector<double> k;
    const TailView tv = u.tail_view();
    if (std::isfinite(tv.start)) k.push_back(tv.start);
    if (u.is_sampled()) {
        const auto& x = u.samples().knots;
        k.insert(k.end(), x.begin(), x.end());
    }
    return k;
}

// U(T0, y) - u(T0) from the Poisson formula. With sigma = y^2 / (4 w^(1/alpha)):
// U = u(T0) + (1/Gamma(1+alpha)) int_0^inf (u(T0 - sigma) - u(T0)) exp(-w^(1/alpha)) dw.
inline double poisson_deviation(const HistoryFunction& u, double alpha, double T0, double y, double u0,
                                const std::vector<double>& kink)
{
    if (y == 0.0) return 0.0;
    const double y2 = y * y;
    auto f = [&](double w) {
        if (w <= 0.0) return 0.0;
        const double v = std::pow(w, 1.0 / alpha);
        const double sigma = y2 / (4.0 * v);
        const double du = u(T0 - sigma) - u0;
        return du * std::exp(-v);
    };
    const double W = std::pow(745.0, alpha);
    std::vector<double> breaks;
    for (double s : kink)
        if (s < T0) {
            const double w = std::pow(y2 / (4.0 * (T0 - s)), alpha);
            if (w < W) breaks.push_back(w);
        }
    const auto r = quad::integrate(f, 0.0, W, breaks, 1e-15, 1e-12, 200);
    if (!r.converged && r.abs_error > 1e-9 * (1.0 + std::abs(r.value)))
        throw NonConvergenceError("solve_extension: Poisson initial state did not converge at y=" + std::to_string(y));
    return r.value * rgamma(1.0 + alpha);
}

// Thomas algorithm; a sub, b diag, c super. Overwrites d with the solution.
inline void tridiagonal(const std::vector<double>& a, std::vector<double> b, const std::vector<double>& c,
                        std::vector<double>& d)
{
    const std::size_t n = d.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double m = a[i] / b[i - 1];
        b[i] -= m * c[i - 1];
        d[i] -= m * d[i - 1];
    }
    d[n - 1] /= b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) d[i] = (d[i] - c[i] * d[i + 1]) / b[i];
}

} // namespace detail

// Solves y^(1-2a) U_t = (y^(1-2a) U_y)_y with U(t,0) = u(t) and no flux at y = Y.
// Finite volumes with the exact weighted flux between nodes, BDF2 in time.
// The unknown is the deviation W = U - u(t), which is exactly zero for constant u.
inline ExtensionGrid solve_extension(const HistoryFunction& u, double alpha, const ExtensionSpec& spec = {})
{
    detail::validate_order(alpha);
    detail::validate(spec);
    const TailView tv = u.tail_view();
    detail::check_power_tail(tv, alpha);
    if (u.is_sampled())
        require(spec.T1 <= u.samples().knots.back(), "solve_extension: samples end before T1");

    const long M = spec.M, N = spec.n_t;
    const double Y = spec.Y > 0.0 ? spec.Y : detail::auto_depth(u, spec);
    ExtensionGrid g;
    g.alpha = alpha;
    g.u = u;
    g.n_trace = spec.n_trace;
    g.y_grid.resize(M + 1);
    for (long j = 0; j <= M; ++j) g.y_grid[j] = Y * std::pow(static_cast<double>(j) / M, spec.grading);
    g.t_grid.resize(N + 1);
    for (long n = 0; n <= N; ++n) g.t_grid[n] = spec.T0 + (spec.T1 - spec.T0) * static_cast<double>(n) / N;
    g.t_grid[N] = spec.T1;
    const auto& y = g.y_grid;

    // I_j = int_{y_j}^{y_j+1} y^(2a-1) dy, V_j = int over the dual cell of y^(1-2a) dy.
    const double a2 = 2.0 * alpha, b2 = 2.0 - 2.0 * alpha;
    std::vector<double> I(M), V(M + 1, 0.0);
    for (long j = 0; j < M; ++j) I[j] = detail::pow_diff(y[j], y[j + 1], a2) / a2;
    for (long j = 1; j <= M; ++j) {
        const double lo = 0.5 * (y[j - 1] + y[j]);
        const double hi = j < M ? 0.5 * (y[j] + y[j + 1]) : y[M];
        V[j] = detail::pow_diff(lo, hi, b2) / b2;
    }

    const std::size_t stride = static_cast<std::size_t>(M + 1);
    g.U.assign(static_cast<std::size_t>(N + 1) * stride, 0.0);
    std::vector<double> ub(N + 1);
    for (long n = 0; n <= N; ++n) ub[n] = u(g.t_grid[n]);

    const auto kink = detail::kinks(u);
    std::vector<double> Wprev(M + 1, 0.0), Wcur(M + 1, 0.0);
    for (long j = 1; j <= M; ++j) Wcur[j] = detail::poisson_deviation(u, alpha, spec.T0, y[j], ub[0], kink);

    auto store = [&](long n, const std::vector<double>& W) {
        for (long j = 0; j <= M; ++j) g.U[n * stride + j] = W[j] + ub[n];
    };
    store(0, Wcur);

    const double dt = (spec.T1 - spec.T0) / static_cast<double>(N);
    std::vector<double> sub(M), diag(M), sup(M), rhs(M);
    for (long n = 1; n <= N; ++n) {
        // BE for the first step, BDF2 afterwards: c0 W^{n} - (history) = dt * L W^{n} - V * (boundary derivative).
        const bool bdf2 = n >= 2;
        const double c0 = bdf2 ? 1.5 : 1.0;
        const double du = bdf2 ? 1.5 * ub[n] - 2.0 * ub[n - 1] + 0.5 * ub[n - 2] : ub[n] - ub[n - 1];
        for (long j = 1; j <= M; ++j) {
            const std::size_t i = static_cast<std::size_t>(j - 1);
            const double left = 1.0 / I[j - 1];
            const double right = j < M ? 1.0 / I[j] : 0.0;
            sub[i] = j > 1 ? -dt * left : 0.0;
            sup[i] = j < M ? -dt * right : 0.0;
            diag[i] = c0 * V[j] + dt * (left + right);
            const double hist = bdf2 ? 2.0 * Wcur[j] - 0.5 * Wprev[j] : Wcur[j];
            rhs[i] = V[j] * (hist - du);
        }
        detail::tridiagonal(sub, diag, sup, rhs);
        Wprev = Wcur;
        Wcur[0] = 0.0;
        for (long j = 1; j <= M; ++j) {
            Wcur[j] = rhs[j - 1];
            if (!std::isfinite(Wcur[j])) throw NonConvergenceError("solve_extension: implicit solve produced non-finite values");
        }
        store(n, Wcur);
    }
    return g;
}

// max over interior nodes and BDF2 steps of |V_j (BDF2 U_j)/dt - flux difference|,
// relative to the largest flux term on the grid.
inline double extension_residual(const ExtensionGrid& g)
{
    const auto& y = g.y_grid;
    const std::size_t M = y.size() - 1, N = g.t_grid.size() - 1;
    const double a2 = 2.0 * g.alpha, b2 = 2.0 - 2.0 * g.alpha;
    const double dt = g.t_grid[1] - g.t_grid[0];
    double worst = 0.0, scale = 1e-300;
    for (std::size_t n = 2; n <= N; ++n)
        for (std::size_t j = 1; j <= M; ++j) {
            const double lo = 0.5 * (y[j - 1] + y[j]);
            const double hi = j < M ? 0.5 * (y[j] + y[j + 1]) : y[M];
            const double V = detail::pow_diff(lo, hi, b2) / b2;
            const double Fl = (g.at(n, j) - g.at(n, j - 1)) / (detail::pow_diff(y[j - 1], y[j], a2) / a2);
            const double Fr = j < M ? (g.at(n, j + 1) - g.at(n, j)) / (detail::pow_diff(y[j], y[j + 1], a2) / a2) : 0.0;
            const double lhs = V * (1.5 * g.at(n, j) - 2.0 * g.at(n - 1, j) + 0.5 * g.at(n - 2, j)) / dt;
            scale = std::max({scale, std::abs(Fl), std::abs(Fr)});
            worst = std::max(worst, std::abs(lhs - (Fr - Fl)));
        }
    return worst / scale;
}

// -lim y^(1-2a) U_y at time index n. The first three interval fluxes are fitted to
// A + c1 M1 + c2 M2, the expansion U = u + a y^(2a) + b y^2 + c y^(2+2a).
inline double trace_at(const ExtensionGrid& g, std::size_t n)
{
    const auto& y = g.y_grid;
    const double a = g.alpha, a2 = 2.0 * a;
    double F[3], M1[3], M2[3];
    for (int j = 0; j < 3; ++j) {
        const double I = detail::pow_diff(y[j], y[j + 1], a2) / a2;
        F[j] = (g.at(n, j + 1) - g.at(n, j)) / I;
        M1[j] = (y[j + 1] * y[j + 1] - y[j] * y[j]) / I;
        M2[j] = detail::pow_diff(y[j], y[j + 1], 2.0 + a2) / I;
    }
    const double fmax = std::max({std::abs(F[0]), std::abs(F[1]), std::abs(F[2])});
    const double spread = std::max({F[0], F[1], F[2]}) - std::min({F[0], F[1], F[2]});
    if (fmax > 1e-12 && spread > 0.1 * fmax)
        throw NumericError("weighted_trace: near-boundary flux estimates disagree by more than 10% at t=" +
                           std::to_string(g.t_grid[n]));
    double A;
    if (a < 0.05) {
        // M2 and M1 are nearly collinear; fit only the y^2 correction.
        A = F[0] - (F[1] - F[0]) / (M1[1] - M1[0]) * M1[0];
    } else {
        // Solve [1 M1 M2] [A c1 c2]^T = F by Cramer's rule.
        auto det3 = [](double a11, double a12, double a13, double a21, double a22, double a23, double a31, double a32,
                       double a33) {
            return a11 * (a22 * a33 - a23 * a32) - a12 * (a21 * a33 - a23 * a31) + a13 * (a21 * a32 - a22 * a31);
        };
        const double D = det3(1, M1[0], M2[0], 1, M1[1], M2[1], 1, M1[2], M2[2]);
        A = det3(F[0], M1[0], M2[0], F[1], M1[1], M2[1], F[2], M1[2], M2[2]) / D;
    }
    return -A;
}

inline TraceResult weighted_trace(const ExtensionGrid& g, const QuadratureSpec& q = {})
{
    require(g.y_grid.size() >= 4 && !g.t_grid.empty(), "weighted_trace: grid not solved");
    TraceResult r;
    const std::size_t N = g.t_grid.size() - 1;
    const int P = g.n_trace;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < P; ++i) {
        const std::size_t n = static_cast<std::size_t>(std::lround(static_cast<double>(N) * i / (P - 1)));
        const double t = g.t_grid[n];
        const double tr = trace_at(g, n);
        const double d = marchaud_derivative(g.u, g.alpha, t, q).value;
        r.t_points.push_back(t);
        r.trace.push_back(tr);
        r.oracle.push_back(d);
        num += tr * d;
        den += d * d;
    }
    // Least-squares slope through the origin; undefined when the oracle vanishes.
    r.d_alpha_est = den > 0.0 ? num / den : std::numeric_limits<double>::quiet_NaN();
    return r;
}

} // namespace fracalc
