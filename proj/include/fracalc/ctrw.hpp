#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "diffusion.hpp"
#include "errors.hpp"
#include "special_fn.hpp"

namespace fracalc {

// SplitMix64. Each walker gets its own stream derived from (seed, walker index),
// so results do not depend on how walkers are split across threads.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t state) : s_(state) {}
    static std::uint64_t mix(std::uint64_t z)
    {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    static SplitMix64 stream(std::uint64_t seed, std::uint64_t index)
    {
        return SplitMix64(mix(seed + 0x9e3779b97f4a7c15ULL) ^ mix(index * 0xd1b54a32d192ed03ULL + 0x632be59bd9b4e019ULL));
    }
    std::uint64_t operator()()
    {
        s_ += 0x9e3779b97f4a7c15ULL;
        return mix(s_);
    }
    // Uniform in (0, 1].
    double uniform_open0() { return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53; }

private:
    std::uint64_t s_;
};

// psi(n) = d_alpha n^-(1+alpha), n >= 1. alpha = 1 is the memoryless walk (waiting time 1).
class WaitingDist {
public:
    static constexpr std::size_t kTable = std::size_t{1} << 20;
    static constexpr std::uint64_t kSaturate = std::uint64_t{1} << 62;

    explicit WaitingDist(double alpha) : alpha_(alpha)
    {
        require(alpha > 0.0 && alpha <= 1.0, "WaitingDist: alpha must lie in (0,1]");
        if (alpha == 1.0) return;
        // Unnormalized tail sums first; their total is the normalizer 1/d_alpha.
        surv_.resize(kTable + 1);
        long double s = tail_sum(static_cast<double>(kTable), alpha);
        surv_[kTable] = static_cast<double>(s);
        std::vector<long double> acc(kTable + 1);
        acc[kTable] = s;
        for (std::size_t n = kTable; n >= 1; --n) {
            s += std::pow(static_cast<long double>(n), -1.0L - alpha);
            acc[n - 1] = s;
        }
        const long double total = s;
        d_ = static_cast<double>(1.0L / total);
        for (std::size_t n = 0; n <= kTable; ++n) surv_[n] = static_cast<double>(acc[n] / total);
        s = acc[0] / total;
        mass_error_ = std::abs(static_cast<double>(s) - 1.0);
    }

    double alpha() const { return alpha_; }
    bool memoryless() const { return alpha_ == 1.0; }
    double d_alpha() const { return d_; }
    // |sum of all probabilities - 1| for the tabulated distribution.
    double mass_error() const { return mass_error_; }
    double pmf(std::uint64_t n) const
    {
        if (memoryless()) return n == 1 ? 1.0 : 0.0;
        return n == 0 ? 0.0 : d_ * std::pow(static_cast<double>(n), -1.0 - alpha_);
    }
    double survival(std::uint64_t n) const
    {
        if (memoryless()) return n == 0 ? 1.0 : 0.0;
        if (n <= kTable) return surv_[n];
        return d_ * tail_sum(static_cast<double>(n), alpha_);
    }

    // Smallest n with P(W > n) < v, for v in (0, 1]. Saturates at kSaturate.
    std::uint64_t invert(double v) const
    {
        if (memoryless()) return 1;
        // P(W > n) ~ (d/alpha)(n + 1/2)^-alpha gives the guess.
        const double x = std::pow(alpha_ * v / d_, -1.0 / alpha_) - 0.5;
        if (!(x < static_cast<double>(kSaturate))) return kSaturate;
        std::uint64_t n = static_cast<std::uint64_t>(std::max(0.0, std::floor(x))) + 1;
        if (n > kTable) return std::max<std::uint64_t>(n, kTable + 1);
        while (n > 1 && surv_[n - 1] < v) --n;
        while (surv_[n] >= v) ++n;
        return n;
    }

    template <class Rng>
    std::uint64_t sample(Rng& rng) const
    {
        if (memoryless()) return 1;
        return invert(rng.uniform_open0());
    }

    // sum_{n>=1} n^-(1+alpha): direct sum to 1e6 plus an Euler-Maclaurin tail.
    static double zeta_sum(double alpha)
    {
        const std::size_t N = 1000000;
        long double s = tail_sum(static_cast<double>(N), alpha);
        for (std::size_t n = N; n >= 1; --n) s += std::pow(static_cast<long double>(n), -1.0L - alpha);
        return static_cast<double>(s);
    }

private:
    // sum_{m>n} m^-(1+alpha) by Euler-Maclaurin.
    static double tail_sum(double n, double a)
    {
        return std::pow(n, -a) / a - 0.5 * std::pow(n, -1.0 - a) + (1.0 + a) / 12.0 * std::pow(n, -2.0 - a);
    }

    double alpha_;
    double d_ = 1.0;
    double mass_error_ = 0.0;
    std::vector<double> surv_;
};

template <class Rng>
std::uint64_t sample_waiting(const WaitingDist& w, Rng& rng)
{
    return w.sample(rng);
}

struct WalkConfig {
    double dx = 0.1;
    double dtau = 0.01;
    double alpha = 1.0;
    long n_walkers = 1000;
    double t_end = 1.0;
    std::uint64_t seed = 0;
    int n_times = 31;                          // log-spaced over the last three decades
    bool record_paths = false;                 // keep every walker's position at every time
    std::size_t memory_cap = std::size_t{1} << 31;  // bytes for per-walker storage
    int threads = 0;                           // 0: FRACALC_THREADS or hardware concurrency
};

struct Histogram {
    std::vector<double> edges;  // physical units, half-integer sites
    std::vector<long> counts;
};

struct EnsembleStats {
    double alpha = 1.0;
    double dx = 0.0;
    double dtau = 0.0;
    double t_end = 0.0;
    long n_walkers = 0;
    std::vector<double> times;
    std::vector<double> msd;
    std::vector<double> mean;
    Histogram histogram;
    std::vector<std::int32_t> final_sites;
    std::vector<std::int32_t> paths;  // n_walkers x times, row-major, when recorded
};

// k for the continuum limit: dx^2 / dtau (alpha = 1), dx^2 / (|Gamma(-alpha)| d_alpha dtau^alpha) otherwise.
inline double walk_diffusivity(double alpha, double dx, double dtau, double d_alpha)
{
    if (alpha == 1.0) return dx * dx / dtau;
    return dx * dx / (std::abs(gamma(-alpha)) * d_alpha * std::pow(dtau, alpha));
}

inline double walk_step_for(double alpha, double k, double dtau, double d_alpha)
{
    if (alpha == 1.0) return std::sqrt(k * dtau);
    return std::sqrt(k * std::abs(gamma(-alpha)) * d_alpha * std::pow(dtau, alpha));
}

inline int thread_count(int requested)
{
    int n = requested;
    if (n <= 0) {
        n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
        if (const char* env = std::getenv("FRACALC_THREADS")) {
            const int cap = std::atoi(env);
            if (cap >= 1) n = std::min(n, cap);
        }
    }
    return std::max(1, n);
}

namespace detail {

inline void validate(const WalkConfig& c)
{
    require(c.dx > 0.0 && std::isfinite(c.dx), "ctrw: dx must be > 0");
    require(c.dtau > 0.0 && std::isfinite(c.dtau), "ctrw: dtau must be > 0");
    require(c.alpha > 0.0 && c.alpha <= 1.0, "ctrw: alpha must lie in (0,1]");
    require(c.n_walkers >= 1, "ctrw: n_walkers must be >= 1");
    require(c.t_end > 0.0 && std::isfinite(c.t_end), "ctrw: t_end must be > 0");
    require(c.n_times >= 1, "ctrw: n_times must be >= 1");
    require(c.t_end / c.dtau < 9.0e18, "ctrw: t_end/dtau too large");
}

inline std::vector<double> log_times(const WalkConfig& c)
{
    if (c.n_times == 1) return {c.t_end};
    const double lo = std::min(c.t_end, std::max(c.dtau, 1e-3 * c.t_end));
    std::vector<double> t;
    for (int i = 0; i < c.n_times; ++i) {
        const double v = lo * std::pow(c.t_end / lo, static_cast<double>(i) / (c.n_times - 1));
        if (t.empty() || v > t.back()) t.push_back(v);
    }
    t.back() = c.t_end;
    return t;
}

// Odd-width bins centred on the origin so every edge falls between sites.
inline Histogram site_histogram(const std::vector<std::int32_t>& sites, double dx)
{
    long lo = 0, hi = 0;
    double m2 = 0.0;
    for (auto s : sites) {
        lo = std::min<long>(lo, s);
        hi = std::max<long>(hi, s);
        m2 += static_cast<double>(s) * s;
    }
    const double sd = std::sqrt(m2 / static_cast<double>(std::max<std::size_t>(1, sites.size())));
    const long w = 2 * std::max(0L, std::lround(sd / 16.0)) + 1;
    // Bin j covers sites [j w - (w-1)/2, j w + (w-1)/2].
    const long h = (w - 1) / 2;
    auto bin_of = [&](long s) { return s >= 0 ? (s + h) / w : -((-s + h) / w); };
    const long jlo = bin_of(lo), jhi = bin_of(hi);
    Histogram out;
    out.counts.assign(jhi - jlo + 1, 0);
    for (long j = jlo; j <= jhi + 1; ++j) out.edges.push_back((static_cast<double>(j * w) - 0.5 * w) * dx);
    for (auto s : sites) ++out.counts[bin_of(s) - jlo];
    return out;
}

} // namespace detail

inline EnsembleStats run_ensemble(const WalkConfig& c)
{
    detail::validate(c);
    const auto times = detail::log_times(c);
    const std::size_t K = times.size();
    const std::size_t per_walker = (c.record_paths ? K : 0) + 1;
    const double bytes = static_cast<double>(c.n_walkers) * static_cast<double>(per_walker) * sizeof(std::int32_t);
    if (bytes > static_cast<double>(c.memory_cap))
        throw DomainError("ctrw: n_walkers x time grid needs " + std::to_string(bytes) +
                          " bytes, above the memory cap of " + std::to_string(c.memory_cap));

    // Recorded times in units of dtau; a jump at step n is visible at every recorded step >= n.
    std::vector<std::uint64_t> T(K);
    for (std::size_t k = 0; k < K; ++k) T[k] = static_cast<std::uint64_t>(std::floor(times[k] / c.dtau + 1e-9));

    const WaitingDist w(c.alpha);
    EnsembleStats st;
    st.alpha = c.alpha;
    st.dx = c.dx;
    st.dtau = c.dtau;
    st.t_end = c.t_end;
    st.n_walkers = c.n_walkers;
    st.times = times;
    st.final_sites.assign(c.n_walkers, 0);
    if (c.record_paths) st.paths.assign(static_cast<std::size_t>(c.n_walkers) * K, 0);

    const int nt = static_cast<int>(std::min<long>(thread_count(c.threads), c.n_walkers));
    std::vector<std::vector<long long>> sum1(nt, std::vector<long long>(K, 0));
    std::vector<std::vector<unsigned __int128>> sum2(nt, std::vector<unsigned __int128>(K, 0));
    std::vector<std::exception_ptr> errors(nt);

    auto work = [&](int tid, long begin, long end) {
        try {
            std::vector<long long> pos_at(K);
            for (long i = begin; i < end; ++i) {
                auto rng = SplitMix64::stream(c.seed, static_cast<std::uint64_t>(i));
                long long pos = 0;
                if (w.memoryless()) {
                    // Unit waits: steps are fair bits, 64 per draw.
                    std::uint64_t done = 0;
                    for (std::size_t k = 0; k < K; ++k) {
                        std::uint64_t need = T[k] - done;
                        long long heads = 0;
                        const std::uint64_t n = need;
                        while (need >= 64) {
                            heads += std::popcount(rng());
                            need -= 64;
                        }
                        if (need > 0) heads += std::popcount(rng() & ((std::uint64_t{1} << need) - 1));
                        pos += 2 * heads - static_cast<long long>(n);
                        done = T[k];
                        pos_at[k] = pos;
                    }
                } else {
                    std::uint64_t now = 0;
                    std::size_t k = 0;
                    while (k < K) {
                        const std::uint64_t bits = rng();
                        const std::uint64_t wait = w.invert(static_cast<double>((bits >> 11) + 1) * 0x1.0p-53);
                        const std::uint64_t next = wait >= WaitingDist::kSaturate - now ? WaitingDist::kSaturate : now + wait;
                        while (k < K && T[k] < next) pos_at[k++] = pos;
                        if (k == K) break;
                        // Direction from a second draw keeps it independent of the waiting time.
                        pos += (rng() >> 63) ? 1 : -1;
                        now = next;
                    }
                }
                if (std::llabs(pos_at[K - 1]) > std::numeric_limits<std::int32_t>::max())
                    throw NumericError("ctrw: walker position overflowed 32-bit site index");
                for (std::size_t k = 0; k < K; ++k) {
                    sum1[tid][k] += pos_at[k];
                    sum2[tid][k] += static_cast<unsigned __int128>(pos_at[k] * pos_at[k]);
                    if (c.record_paths) st.paths[static_cast<std::size_t>(i) * K + k] = static_cast<std::int32_t>(pos_at[k]);
                }
                st.final_sites[i] = static_cast<std::int32_t>(pos_at[K - 1]);
            }
        } catch (...) {
            errors[tid] = std::current_exception();
        }
    };

    std::vector<std::thread> pool;
    const long chunk = (c.n_walkers + nt - 1) / nt;
    for (int t = 1; t < nt; ++t)
        pool.emplace_back(work, t, std::min<long>(c.n_walkers, t * chunk), std::min<long>(c.n_walkers, (t + 1) * chunk));
    work(0, 0, std::min<long>(c.n_walkers, chunk));
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    st.msd.resize(K);
    st.mean.resize(K);
    const double n = static_cast<double>(c.n_walkers);
    for (std::size_t k = 0; k < K; ++k) {
        long long s1 = 0;
        unsigned __int128 s2 = 0;
        for (int t = 0; t < nt; ++t) {
            s1 += sum1[t][k];
            s2 += sum2[t][k];
        }
        st.mean[k] = c.dx * static_cast<double>(s1) / n;
        st.msd[k] = c.dx * c.dx * static_cast<double>(s2) / n;
    }
    st.histogram = detail::site_histogram(st.final_sites, c.dx);
    return st;
}

// Least-squares slope of log msd against log t over the last decade of the grid.
inline double msd_slope(const EnsembleStats& st, double span = 10.0)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t k = 0; k < st.times.size(); ++k) {
        if (st.times[k] < st.t_end / span * (1.0 - 1e-12) || !(st.msd[k] > 0.0)) continue;
        const double x = std::log(st.times[k]), y = std::log(st.msd[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) throw NumericError("msd_slope: fewer than two usable times in the last decade");
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Sup over histogram edges of |empirical CDF - CDF of u(., t_end)|.
inline double compare_to_fundamental(const EnsembleStats& st, const DiffusionParams& p, const SpectralGrid& g = {})
{
    const auto& h = st.histogram;
    if (h.edges.size() != h.counts.size() + 1 || h.counts.empty())
        throw DomainError("compare_to_fundamental: histogram edges and counts do not match");
    for (std::size_t i = 1; i < h.edges.size(); ++i)
        if (!(h.edges[i] > h.edges[i - 1])) throw DomainError("compare_to_fundamental: histogram edges not increasing");
    long total = 0;
    for (long c : h.counts) total += c;
    if (total != st.n_walkers) throw DomainError("compare_to_fundamental: histogram counts do not sum to n_walkers");
    if (p.alpha != st.alpha || std::abs(p.t - st.t_end) > 1e-12 * st.t_end)
        throw DomainError("compare_to_fundamental: alpha or time differs from the ensemble");

    const double s = similarity_scale(p);
    double rmax = 0.0;
    for (double e : h.edges) rmax = std::max(rmax, std::abs(e) / s);
    // CDF(x) = 1/2 + sign(x) int_0^{|x|/s} H.
    std::unique_ptr<SimilarityProfile> H;
    if (p.alpha < 1.0) H = std::make_unique<SimilarityProfile>(p.alpha, rmax, g);
    auto cdf = [&](double x) {
        const double r = std::abs(x) / s;
        const double half = p.alpha == 1.0 ? 0.5 * std::erf(0.5 * r) : H->moment(r, 0);
        return x >= 0.0 ? 0.5 + half : 0.5 - half;
    };
    double worst = 0.0;
    long acc = 0;
    for (std::size_t i = 0; i < h.edges.size(); ++i) {
        if (i > 0) acc += h.counts[i - 1];
        const double emp = static_cast<double>(acc) / static_cast<double>(total);
        worst = std::max(worst, std::abs(emp - cdf(h.edges[i])));
    }
    return worst;
}

} // namespace fracalc
