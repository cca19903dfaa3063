#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "errors.hpp"

namespace fracalc::quad {

struct Result {
    double value = 0.0;
    double abs_error = 0.0;
    int subdivisions = 0;
    bool converged = true;
};

namespace detail {

inline constexpr std::array<double, 8> xgk{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> wgk{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> wg{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

// One 15-point Kronrod rule with the QUADPACK error heuristic.
template <class F>
Segment gk15(F& f, double a, double b)
{
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double fc = f(c);
    double rk = fc * wgk[7], rg = fc * wg[3];
    std::array<double, 7> f1{}, f2{};
    for (int j = 0; j < 7; ++j) {
        const double dx = h * xgk[j];
        f1[j] = f(c - dx);
        f2[j] = f(c + dx);
        rk += wgk[j] * (f1[j] + f2[j]);
        if (j % 2 == 1) rg += wg[j / 2] * (f1[j] + f2[j]);
    }
    const double mean = 0.5 * rk;
    double asc = wgk[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j) asc += wgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
    asc *= std::abs(h);
    double err = std::abs((rk - rg) * h);
    if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
    double rabs = 0.0;
    rabs = std::abs(fc) * wgk[7];
    for (int j = 0; j < 7; ++j) rabs += wgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    rabs *= std::abs(h);
    const double floor_err = 50.0 * std::numeric_limits<double>::epsilon() * rabs;
    err = std::max(err, floor_err);
    return {a, b, rk * h, err};
}

} // namespace detail

// Globally adaptive Gauss-Kronrod (G7/K15) on [a,b] with interior breakpoints.
// max_subdiv bounds the number of bisections.
template <class F>
Result integrate(F&& f, double a, double b, const std::vector<double>& breaks, double abs_tol,
                 double rel_tol, int max_subdiv)
{
    Result out;
    if (a == b) return out;
    std::vector<double> pts{a};
    for (double x : breaks)
        if (x > std::min(a, b) && x < std::max(a, b)) pts.push_back(x);
    pts.push_back(b);
    if (a < b)
        std::sort(pts.begin(), pts.end());
    else
        std::sort(pts.begin(), pts.end(), std::greater<>());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    std::priority_queue<detail::Segment> heap;
    double total = 0.0, total_err = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        auto s = detail::gk15(f, pts[i], pts[i + 1]);
        total += s.value;
        total_err += s.error;
        heap.push(s);
    }
    int n = 0;
    while (total_err > std::max(abs_tol, rel_tol * std::abs(total))) {
        if (n >= max_subdiv) {
            out.converged = false;
            break;
        }
        auto s = heap.top();
        heap.pop();
        const double m = 0.5 * (s.a + s.b);
        if (m == s.a || m == s.b) {
            out.converged = false;
            break;
        }
        auto l = detail::gk15(f, s.a, m);
        auto r = detail::gk15(f, m, s.b);
        total += l.value + r.value - s.value;
        total_err += l.error + r.error - s.error;
        heap.push(l);
        heap.push(r);
        ++n;
    }
    // Re-sum to shed accumulated cancellation from the running updates.
    double v = 0.0, e = 0.0;
    while (!heap.empty()) {
        v += heap.top().value;
        e += heap.top().error;
        heap.pop();
    }
    out.value = v;
    out.abs_error = e;
    out.subdivisions = n;
    return out;
}

template <class F>
Result integrate(F&& f, double a, double b, double abs_tol, double rel_tol, int max_subdiv)
{
    return integrate(std::forward<F>(f), a, b, {}, abs_tol, rel_tol, max_subdiv);
}

// Gauss-Legendre nodes and weights on [-1,1] by Newton iteration.
struct GaussRule {
    std::vector<double> x, w;
};

inline GaussRule gauss_legendre(int n)
{
    require(n >= 1, "gauss_legendre: n must be >= 1");
    GaussRule g;
    g.x.resize(n);
    g.w.resize(n);
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        g.x[i] = -z;
        g.x[n - 1 - i] = z;
        g.w[i] = g.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
    return g;
}

} // namespace fracalc::quad
