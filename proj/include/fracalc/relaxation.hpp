#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "errors.hpp"
#include "frac_ops.hpp"
#include "history.hpp"
#include "special_fn.hpp"

namespace fracalc {

struct Trajectory {
    std::vector<double> times;
    std::vector<double> values;
};

struct RelaxationProblem {
    double alpha = 0.5;
    double lambda = 0.0;
    HistoryFunction history = HistoryFunction::constant(0.0);
    double t_end = 1.0;
    double dt = 1e-3;
    // Overrides u(0) taken from the history (a discontinuous splice).
    std::optional<double> initial_value;
};

namespace detail {

// Number of steps; dt is rounded so that the grid ends exactly at t_end.
inline long steps_for(double t_end, double dt)
{
    require(t_end > 0.0 && std::isfinite(t_end), "relaxation: t_end must be > 0");
    require(dt > 0.0 && dt < t_end, "relaxation: dt must satisfy 0 < dt < t_end");
    return std::max(1L, std::lround(t_end / dt));
}

inline std::vector<double> time_grid(double t_end, long M)
{
    std::vector<double> t(M + 1);
    for (long m = 0; m <= M; ++m) t[m] = t_end * static_cast<double>(m) / static_cast<double>(M);
    t[M] = t_end;
    return t;
}

// Solve a small dense system in place (partial pivoting).
inline std::vector<double> dense_solve(std::vector<std::vector<double>> A, std::vector<double> b)
{
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(A[r][c]) > std::abs(A[p][c])) p = r;
        if (A[p][c] == 0.0) throw StabilityError("relaxation: singular starting system");
        std::swap(A[p], A[c]);
        std::swap(b[p], b[c]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = A[r][c] / A[c][c];
            for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t c = n; c-- > 0;) {
        double s = b[c];
        for (std::size_t k = c + 1; k < n; ++k) s -= A[c][k] * x[k];
        x[c] = s / A[c][c];
    }
    return x;
}

} // namespace detail

// Discrete Marchaud operator on a uniform grid t_m = m h: product integration of
// the piecewise-linear interpolant over [0, t_m] plus the history term, with
// starting weights that make it exact on t^sigma for the first few sigma = k alpha.
class MarchingOperator {
public:
    MarchingOperator(double alpha, double h, long M) : alpha_(alpha), h_(h), M_(M)
    {
        c_ = detail::marchaud_constant(alpha);
        const double ha = std::pow(h, -alpha);
        kappa_ = ha / (alpha * (1.0 - alpha));
        P_.assign(M + 2, 0.0);
        Q_.assign(M + 2, 0.0);
        Q_[1] = -ha / (1.0 - alpha);
        for (long k = 2; k <= M + 1; ++k) {
            const double lo = static_cast<double>(k - 1), hi = static_cast<double>(k);
            const double A = -detail::pow_diff(lo, hi, -alpha) / alpha;
            const double B = detail::pow_diff(lo, hi, 1.0 - alpha) / (1.0 - alpha) - lo * A;
            P_[k] = ha * (B - A);
            Q_[k] = -ha * B;
        }
        // Every non-integer k alpha below 1 (at most 4), and never fewer than 2.
        for (int k = 1; sigma_.size() < 4 && k < 20; ++k) {
            const double s = k * alpha;
            if (std::abs(s - std::round(s)) <= 1e-6) continue;
            if (s < 1.0 || sigma_.size() < 2) sigma_.push_back(s);
            else break;
        }
        build_corrections();
    }

    std::size_t starting_size() const { return sigma_.size(); }
    const std::vector<double>& exponents() const { return sigma_; }
    double diagonal() const { return c_ * kappa_; }

    // Weight of U_j (1 <= j < m) in the convolution part at step m.
    double weight(long m, long j) const { return c_ * (P_[m - j + 1] + Q_[m - j]); }
    double weight0(long m) const { return c_ * Q_[m]; }
    double correction(long m, std::size_t j) const { return W_[m][j]; }

    // (D U)(t_m) given all U_0..U_m and the history term H_m.
    double apply(const std::vector<double>& U, long m, double H) const
    {
        double s = c_ * (kappa_ * U[m] + Q_[m] * U[0] - H);
        for (long j = 1; j < m; ++j) s += weight(m, j) * U[j];
        for (std::size_t j = 0; j < W_[m].size(); ++j) s += W_[m][j] * (U[j + 1] - U[0]);
        return s;
    }

private:
    void build_corrections()
    {
        if (M_ < static_cast<long>(sigma_.size())) sigma_.resize(M_);
        const std::size_t J = sigma_.size();
        W_.assign(M_ + 1, std::vector<double>(J, 0.0));
        if (J == 0) return;
        // Residuals of the plain operator on t^sigma (zero history).
        std::vector<std::vector<double>> res(J, std::vector<double>(M_ + 1, 0.0));
        for (std::size_t k = 0; k < J; ++k) {
            const double s = sigma_[k];
            std::vector<double> phi(M_ + 1);
            for (long j = 0; j <= M_; ++j) phi[j] = std::pow(j * h_, s);
            const double g = gamma(1.0 + s) / gamma(1.0 + s - alpha_);
            for (long m = 1; m <= M_; ++m) {
                double d = c_ * kappa_ * phi[m];
                for (long j = 1; j < m; ++j) d += weight(m, j) * phi[j];
                res[k][m] = g * std::pow(m * h_, s - alpha_) - d;
            }
        }
        std::vector<std::vector<double>> V(J, std::vector<double>(J));
        for (std::size_t k = 0; k < J; ++k)
            for (std::size_t j = 0; j < J; ++j) V[k][j] = std::pow((j + 1) * h_, sigma_[k]);
        for (long m = 1; m <= M_; ++m) {
            std::vector<double> r(J);
            for (std::size_t k = 0; k < J; ++k) r[k] = res[k][m];
            W_[m] = detail::dense_solve(V, r);
        }
    }

    double alpha_, h_;
    long M_;
    double c_ = 0.0, kappa_ = 0.0;
    std::vector<double> P_, Q_;
    std::vector<double> sigma_;
    std::vector<std::vector<double>> W_;
};

// u(t) = C E_alpha(lambda t^alpha); alpha = 1 gives C e^(lambda t).
inline Trajectory solve_constant_history(double alpha, double lambda, double C, double t_end, double dt)
{
    require(alpha > 0.0 && alpha <= 1.0, "solve_constant_history: alpha must lie in (0,1]");
    require(std::isfinite(lambda) && std::isfinite(C), "solve_constant_history: lambda and C must be finite");
    const long M = detail::steps_for(t_end, dt);
    Trajectory tr;
    tr.times = detail::time_grid(t_end, M);
    tr.values.resize(tr.times.size());
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        const double t = tr.times[i];
        tr.values[i] = alpha == 1.0 ? C * std::exp(lambda * t)
                                    : C * mittag_leffler({alpha, 1.0}, lambda * std::pow(t, alpha));
    }
    return tr;
}

// History term H_m = int_{-inf}^0 C(tau) (t_m - tau)^(-1-alpha) dtau for m = 1..M.
inline std::vector<double> history_terms(const RelaxationProblem& p, const std::vector<double>& times)
{
    std::vector<double> H(times.size(), 0.0);
    for (std::size_t m = 1; m < times.size(); ++m) H[m] = past_weighted_integral(p.history, p.alpha, times[m], 0.0);
    return H;
}

inline Trajectory solve_marching(const RelaxationProblem& p)
{
    require(p.alpha > 0.0 && p.alpha < 1.0, "solve_marching: alpha must lie in (0,1)");
    require(std::isfinite(p.lambda), "solve_marching: lambda must be finite");
    const long M = detail::steps_for(p.t_end, p.dt);
    const double h = p.t_end / static_cast<double>(M);
    Trajectory tr;
    tr.times = detail::time_grid(p.t_end, M);
    std::vector<double> U(M + 1, 0.0);
    U[0] = p.initial_value ? *p.initial_value : p.history(0.0);
    require(std::isfinite(U[0]), "solve_marching: initial value must be finite");

    const MarchingOperator op(p.alpha, h, M);
    const double diag = op.diagonal() - p.lambda;
    // The implicit step divides by diag; keep well away from its zero.
    if (p.lambda > 0.0 && p.lambda * std::pow(h, p.alpha) > 0.5 / gamma(2.0 - p.alpha))
        throw StabilityError("solve_marching: lambda*dt^alpha=" + std::to_string(p.lambda * std::pow(h, p.alpha)) +
                             " exceeds the stability bound 0.5/Gamma(2-alpha); reduce dt");
    const auto H = history_terms(p, tr.times);

    const long J = std::min<long>(static_cast<long>(op.starting_size()), M);
    const double cH = detail::marchaud_constant(p.alpha);
    // The starting weights couple U_1..U_J, so the first J steps are one solve.
    if (J > 0) {
        std::vector<std::vector<double>> A(J, std::vector<double>(J, 0.0));
        std::vector<double> b(J, 0.0);
        for (long m = 1; m <= J; ++m) {
            double rhs = cH * H[m] - op.weight0(m) * U[0];
            for (long j = 1; j <= J; ++j) {
                double a = op.correction(m, j - 1);
                if (j == m) a += diag;
                if (j < m) a += op.weight(m, j);
                A[m - 1][j - 1] = a;
                rhs += op.correction(m, j - 1) * U[0];
            }
            b[m - 1] = rhs;
        }
        const auto x = detail::dense_solve(A, b);
        for (long j = 1; j <= J; ++j) U[j] = x[j - 1];
    }
    for (long m = J + 1; m <= M; ++m) {
        double rest = op.weight0(m) * U[0] - cH * H[m];
        for (long j = 1; j < m; ++j) rest += op.weight(m, j) * U[j];
        for (long j = 0; j < J; ++j) rest += op.correction(m, j) * (U[j + 1] - U[0]);
        U[m] = -rest / diag;
        if (!std::isfinite(U[m])) throw StabilityError("solve_marching: solution overflowed at t=" + std::to_string(tr.times[m]));
    }
    tr.values = std::move(U);
    return tr;
}

// max_m |(D U)(t_m) - lambda U_m| for a trajectory produced on the same grid.
inline double marching_residual(const RelaxationProblem& p, const Trajectory& tr)
{
    const long M = static_cast<long>(tr.times.size()) - 1;
    const double h = p.t_end / static_cast<double>(M);
    const MarchingOperator op(p.alpha, h, M);
    const auto H = history_terms(p, tr.times);
    double worst = 0.0;
    for (long m = 1; m <= M; ++m)
        worst = std::max(worst, std::abs(op.apply(tr.values, m, H[m]) - p.lambda * tr.values[m]));
    return worst;
}

} // namespace fracalc
