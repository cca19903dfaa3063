#pragma once

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "special_fn.hpp"

namespace fracalc {

struct TimeSeries {
    std::vector<double> times;
    std::vector<double> values;
};

enum class FitModel { fractional, exponential };

struct FitResult {
    double alpha = 1.0;
    double lambda = 0.0;
    double C = 0.0;
    double rmse = 0.0;
    FitModel model = FitModel::exponential;
    double t0 = 0.0;          // model time origin (first sample)
    bool degenerate = false;  // all values equal
};

// The optimizer gave up; best() is the best point seen.
class OptimizerError : public NumericError {
public:
    OptimizerError(const std::string& what, FitResult best) : NumericError(what), best_(best) {}
    const FitResult& best() const { return best_; }

private:
    FitResult best_;
};

inline void validate(const TimeSeries& d)
{
    require(d.times.size() == d.values.size(), "time series: times and values differ in length");
    require(d.times.size() >= 4, "time series: at least 4 points required");
    for (std::size_t i = 0; i < d.times.size(); ++i) {
        require(std::isfinite(d.times[i]), "time series: times must be finite");
        require(std::isfinite(d.values[i]) && d.values[i] > 0.0, "time series: values must be finite and > 0");
        if (i > 0) require(d.times[i] > d.times[i - 1], "time series: times must be strictly increasing");
    }
}

// CSV with header "t,value".
inline TimeSeries read_time_series_csv(std::istream& in)
{
    TimeSeries d;
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    require(line == "t,value", "csv: header must be 't,value'");
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        require(comma != std::string::npos, "csv: row " + std::to_string(row) + " has no comma");
        try {
            std::size_t used = 0;
            const double t = std::stod(line.substr(0, comma), &used);
            const std::string rest = line.substr(comma + 1);
            std::size_t used2 = 0;
            const double v = std::stod(rest, &used2);
            require(used2 == rest.size(), "csv: trailing characters");
            d.times.push_back(t);
            d.values.push_back(v);
        } catch (const std::logic_error&) {
            throw DomainError("csv: row " + std::to_string(row) + " is not numeric");
        }
    }
    validate(d);
    return d;
}

namespace detail {

// Model shape g(s) for elapsed time s >= 0; the full model is C g(s).
inline double growth_shape(double alpha, double lambda, double s)
{
    if (alpha == 1.0) return std::exp(lambda * s);
    return mittag_leffler({alpha, 1.0}, lambda * std::pow(s, alpha));
}

struct Profiled {
    double C = 0.0;
    double rmse = std::numeric_limits<double>::infinity();
};

// Best C for a fixed shape (linear least squares) and the resulting rmse.
inline Profiled profile_C(const std::vector<double>& g, const std::vector<double>& y)
{
    double gg = 0.0, gy = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!std::isfinite(g[i])) return {};
        gg += g[i] * g[i];
        gy += g[i] * y[i];
    }
    if (!(gg > 0.0) || !std::isfinite(gg)) return {};
    Profiled p;
    p.C = gy / gg;
    double ss = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = p.C * g[i] - y[i];
        ss += r * r;
    }
    p.rmse = std::sqrt(ss / static_cast<double>(g.size()));
    return p;
}

class Objective {
public:
    explicit Objective(const TimeSeries& d) : y_(d.values), s_(d.times.size())
    {
        for (std::size_t i = 0; i < s_.size(); ++i) s_[i] = d.times[i] - d.times.front();
    }

    Profiled operator()(double alpha, double lambda) const
    {
        if (!(alpha > 0.0 && alpha <= 1.0) || !std::isfinite(lambda)) return {};
        std::vector<double> g(s_.size());
        try {
            for (std::size_t i = 0; i < s_.size(); ++i) g[i] = growth_shape(alpha, lambda, s_[i]);
        } catch (const std::exception&) {
            return {};
        }
        return profile_C(g, y_);
    }

    double span() const { return s_.back(); }
    const std::vector<double>& elapsed() const { return s_; }
    const std::vector<double>& values() const { return y_; }

private:
    std::vector<double> y_;
    std::vector<double> s_;
};

// Golden-section minimum of f on [a, b].
inline double golden_min(const std::function<double(double)>& f, double a, double b, double tol, int max_iter = 200)
{
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < max_iter && std::abs(b - a) > tol * (1.0 + std::abs(c)); ++i) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    return fc <= fd ? c : d;
}

// Scan f over a sorted grid, then golden-section between the neighbours of the best node.
inline double scan_then_golden(const std::function<double(double)>& f, const std::vector<double>& grid, double tol)
{
    std::size_t best = 0;
    double fb = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double v = f(grid[i]);
        if (v < fb) {
            fb = v;
            best = i;
        }
    }
    const double lo = grid[best == 0 ? 0 : best - 1];
    const double hi = grid[std::min(best + 1, grid.size() - 1)];
    const double x = golden_min(f, lo, hi, tol);
    return f(x) <= fb ? x : grid[best];
}

inline bool all_equal(const std::vector<double>& v)
{
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

inline FitResult degenerate_fit(const TimeSeries& d, FitModel model)
{
    FitResult r;
    r.model = model;
    r.t0 = d.times.front();
    r.alpha = 1.0;
    r.lambda = 0.0;
    r.C = std::accumulate(d.values.begin(), d.values.end(), 0.0) / static_cast<double>(d.values.size());
    r.rmse = 0.0;
    r.degenerate = true;
    return r;
}

} // namespace detail

// Least squares C e^(lambda (t - t0)), t0 the first sample time.
inline FitResult fit_exponential(const TimeSeries& d)
{
    validate(d);
    if (detail::all_equal(d.values)) return detail::degenerate_fit(d, FitModel::exponential);
    const detail::Objective obj(d);
    const auto& s = obj.elapsed();
    const std::size_t n = s.size();

    // Log-linear regression gives the starting rate.
    double ms = 0.0, ml = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ms += s[i];
        ml += std::log(d.values[i]);
    }
    ms /= static_cast<double>(n);
    ml /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (s[i] - ms) * (std::log(d.values[i]) - ml);
        sxx += (s[i] - ms) * (s[i] - ms);
    }
    const double lam0 = sxy / sxx;
    const double T = obj.span();

    // Scan z = lambda T around the log-linear start, then refine.
    auto f = [&](double z) { return obj(1.0, z / T).rmse; };
    std::vector<double> grid;
    const double z0 = lam0 * T;
    const double w = 2.0 + std::abs(z0);
    for (int i = 0; i <= 200; ++i) grid.push_back(z0 - w + 2.0 * w * i / 200.0);
    const double z = detail::scan_then_golden(f, grid, 1e-14);

    FitResult r;
    r.model = FitModel::exponential;
    r.t0 = d.times.front();
    r.alpha = 1.0;
    r.lambda = z / T;
    const auto p = obj(1.0, r.lambda);
    r.C = p.C;
    r.rmse = p.rmse;
    return r;
}

struct FitOptions {
    double alpha_step = 0.05;  // coarse grid 0.05, 0.10, ..., 1.0
    int z_points = 40;         // per sign in the lambda scan
    int max_iter = 5000;       // simplex refinement
};

// Least squares C E_alpha(lambda (t - t0)^alpha) over alpha in (0,1].
inline FitResult fit_fractional(const TimeSeries& d, const FitOptions& opt = {})
{
    validate(d);
    if (detail::all_equal(d.values)) return detail::degenerate_fit(d, FitModel::fractional);
    const detail::Objective obj(d);
    const double T = obj.span();

    FitResult best = fit_exponential(d);
    best.model = FitModel::fractional;

    // Coarse grid in alpha; for each alpha scan z = lambda T^alpha on both signs.
    const int na = static_cast<int>(std::lround(1.0 / opt.alpha_step));
    struct Cand {
        double alpha, lambda, rmse;
    };
    std::vector<Cand> cands;
    for (int ia = 1; ia < na; ++ia) {
        const double a = ia * opt.alpha_step;
        const double Ta = std::pow(T, a);
        // Keep E_alpha(z) finite: z^(1/alpha) well below the exp overflow.
        const double zmax = std::min(1e4, std::pow(600.0, a));
        std::vector<double> grid;
        for (int i = opt.z_points; i >= 1; --i) grid.push_back(-1e-3 * std::pow(1e7, (i - 1.0) / (opt.z_points - 1.0)));
        grid.push_back(0.0);
        for (int i = 1; i <= opt.z_points; ++i) grid.push_back(1e-3 * std::pow(zmax / 1e-3, (i - 1.0) / (opt.z_points - 1.0)));
        auto f = [&](double z) { return obj(a, z / Ta).rmse; };
        const double z = detail::scan_then_golden(f, grid, 1e-12);
        cands.push_back({a, z / Ta, f(z)});
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) { return x.rmse < y.rmse; });

    // Refine the three best seeds with a simplex over (alpha, lambda); C stays profiled.
    struct Ctx {
        const detail::Objective* obj;
    } ctx{&obj};
    gsl_multimin_function fn;
    fn.n = 2;
    fn.params = &ctx;
    fn.f = [](const gsl_vector* x, void* p) {
        const auto* c = static_cast<Ctx*>(p);
        const double r = (*c->obj)(gsl_vector_get(x, 0), gsl_vector_get(x, 1)).rmse;
        return std::isfinite(r) ? r : 1e300;
    };

    bool refined_ok = false;
    FitResult seen = best;
    for (std::size_t k = 0; k < std::min<std::size_t>(3, cands.size()); ++k) {
        const Cand& c = cands[k];
        if (!std::isfinite(c.rmse)) continue;
        gsl_vector* x = gsl_vector_alloc(2);
        gsl_vector* step = gsl_vector_alloc(2);
        gsl_vector_set(x, 0, c.alpha);
        gsl_vector_set(x, 1, c.lambda);
        gsl_vector_set(step, 0, std::min(0.02, 0.5 * (1.0 - c.alpha) + 1e-3));
        gsl_vector_set(step, 1, 0.05 * std::abs(c.lambda) + 1e-3 / std::pow(T, c.alpha));
        gsl_multimin_fminimizer* m = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2);
        gsl_multimin_fminimizer_set(m, &fn, x, step);
        int status = GSL_CONTINUE;
        for (int it = 0; it < opt.max_iter && status == GSL_CONTINUE; ++it) {
            if (gsl_multimin_fminimizer_iterate(m)) break;
            status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(m), 1e-10);
        }
        const double a = gsl_vector_get(m->x, 0), l = gsl_vector_get(m->x, 1);
        const auto p = obj(a, l);
        gsl_multimin_fminimizer_free(m);
        gsl_vector_free(step);
        gsl_vector_free(x);
        if (status == GSL_SUCCESS) refined_ok = true;
        // Candidates: the refined point and the raw grid seed.
        for (const auto& [ca, cl, cp] : {std::tuple{a, l, p}, std::tuple{c.alpha, c.lambda, obj(c.alpha, c.lambda)}}) {
            if (!std::isfinite(cp.rmse)) continue;
            if (cp.rmse < seen.rmse || (cp.rmse == seen.rmse && ca < seen.alpha)) {
                seen.alpha = ca;
                seen.lambda = cl;
                seen.C = cp.C;
                seen.rmse = cp.rmse;
            }
        }
    }
    if (!refined_ok && !cands.empty() && std::isfinite(cands.front().rmse))
        throw OptimizerError("fit_fractional: simplex refinement did not converge", seen);
    return seen;
}

inline const char* model_name(FitModel m) { return m == FitModel::fractional ? "fractional" : "exponential"; }

} // namespace fracalc
