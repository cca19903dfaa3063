#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ctrw.hpp"
#include "diffusion.hpp"
#include "errors.hpp"
#include "extension.hpp"
#include "fitting.hpp"
#include "frac_ops.hpp"
#include "relaxation.hpp"
#include "special_fn.hpp"
#include "visco.hpp"

namespace fracalc::cli {

using json = nlohmann::json;

struct Globals {
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out_dir = ".";
    std::string format = "json";
    std::string config;
};

// A column-major table; every column has the same length.
struct Table {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
};

inline std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline void write_csv(std::ostream& os, const Table& t)
{
    for (std::size_t c = 0; c < t.names.size(); ++c) os << (c ? "," : "") << t.names[c];
    os << '\n';
    const std::size_t rows = t.columns.empty() ? 0 : t.columns[0].size();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << fmt17(t.columns[c][r]);
        os << '\n';
    }
}

inline json table_json(const Table& t)
{
    json j = json::object();
    for (std::size_t c = 0; c < t.names.size(); ++c) {
        json col = json::array();
        for (double v : t.columns[c]) col.push_back(number(v));
        j[t.names[c]] = std::move(col);
    }
    return j;
}

// Writes <out_dir>/<stem>.csv or .json; returns the path.
inline std::string write_table(const Globals& g, const std::string& stem, const Table& t)
{
    std::filesystem::create_directories(g.out_dir);
    const auto path = (std::filesystem::path(g.out_dir) / (stem + (g.format == "csv" ? ".csv" : ".json"))).string();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DomainError("cannot open output file " + path);
    if (g.format == "csv") write_csv(os, t);
    else os << table_json(t).dump() << '\n';
    if (!os) throw DomainError("failed writing " + path);
    return path;
}

// Summary on stdout. JSON keys come out sorted; CSV is a header row plus one value row.
inline void emit(const Globals& g, const json& j)
{
    if (g.format == "json") {
        std::cout << j.dump() << '\n';
        return;
    }
    std::string head, row;
    for (auto it = j.begin(); it != j.end(); ++it) {
        head += (head.empty() ? "" : ",") + it.key();
        std::string cell;
        if (it->is_number()) cell = fmt17(it->get<double>());
        else if (it->is_string()) cell = it->get<std::string>();
        else if (it->is_null()) cell = "nan";
        else cell = it->dump();
        row += (it == j.begin() ? "" : ",") + cell;
    }
    std::cout << head << '\n' << row << '\n';
}

inline const char* error_kind(const std::exception& e)
{
    if (dynamic_cast<const PoleError*>(&e)) return "PoleError";
    if (dynamic_cast<const DivergentTailError*>(&e)) return "DivergentTailError";
    if (dynamic_cast<const RangeError*>(&e)) return "RangeError";
    if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
    if (dynamic_cast<const NonConvergenceError*>(&e)) return "NonConvergenceError";
    if (dynamic_cast<const StabilityError*>(&e)) return "StabilityError";
    if (dynamic_cast<const OptimizerError*>(&e)) return "OptimizerError";
    if (dynamic_cast<const NumericError*>(&e)) return "NumericError";
    return "Error";
}

inline int fail(int code, const std::string& kind, const std::string& message)
{
    std::cerr << json{{"error", kind}, {"exit_code", code}, {"message", message}}.dump() << '\n';
    return code;
}

namespace detail {

inline HistoryFunction operand(const std::string& kind, double c, double beta, double lambda)
{
    if (kind == "constant") return HistoryFunction::constant(c);
    if (kind == "power") return HistoryFunction::power_plus(beta);
    if (kind == "modified") return HistoryFunction::modified_power(beta);
    if (kind == "exp") return HistoryFunction::exponential(lambda);
    throw DomainError("unknown operand kind '" + kind + "'");
}

inline StrainProgram read_program(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open strain program " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DomainError("strain program is not valid JSON: " + std::string(e.what()));
    }
    StrainProgram s;
    if (!j.contains("breakpoints") || !j["breakpoints"].is_array()) throw DomainError("strain program needs a 'breakpoints' array");
    for (const auto& b : j["breakpoints"]) {
        if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number())
            throw DomainError("each breakpoint must be [time, strain]");
        s.breakpoints.emplace_back(b[0].get<double>(), b[1].get<double>());
    }
    const std::string past = j.value("past", "constant");
    if (past == "constant") s.past = PastRule::ConstantPast;
    else if (past == "zero") s.past = PastRule::ZeroPast;
    else throw DomainError("past must be 'constant' or 'zero'");
    return s;
}

inline json fit_json(const FitResult& r)
{
    return {{"model", model_name(r.model)}, {"alpha", number(r.alpha)}, {"lambda", number(r.lambda)},
            {"C", number(r.C)},           {"rmse", number(r.rmse)},   {"t0", number(r.t0)},
            {"degenerate", r.degenerate}};
}

// Config values replace whatever the flags set. Keys are long option names without dashes.
inline void apply_config(CLI::App& app, CLI::App* sub, const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open config " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DomainError("config is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw DomainError("config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() == "config") throw DomainError("config may not name another config");
        CLI::Option* opt = sub ? sub->get_option_no_throw("--" + it.key()) : nullptr;
        if (!opt) opt = app.get_option_no_throw("--" + it.key());
        if (!opt) throw DomainError("unknown config key '" + it.key() + "'");
        const std::string v = it->is_string() ? it->get<std::string>() : it->dump();
        opt->clear();
        opt->add_result(v);
        opt->run_callback();
    }
}

} // namespace detail

// Runs the fracalc command line. Returns 0 on success, 2 on invalid input, 1 on numeric failure.
inline int dispatch(int argc, const char* const* argv)
{
    CLI::App app{"fracalc: fractional calculus toolkit. Time, space and rates are dimensionless unless noted."};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_help_all_flag("--help-all", "Help for every subcommand");
    Globals g;
    app.add_option("--seed", g.seed, "Random seed (ctrw)")->capture_default_str();
    app.add_option("--threads", g.threads, "Worker threads, 0 = FRACALC_THREADS or all cores")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app.add_option("--out-dir", g.out_dir, "Directory for table outputs")->capture_default_str();
    app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    app.add_option("--config", g.config, "JSON file of option values, keyed by long name; overrides flags");

    // ml
    double ml_alpha = 1.0, ml_beta = 1.0, ml_t = 0.0;
    auto* ml = app.add_subcommand("ml", "Mittag-Leffler function E_{alpha,beta}(t); prints {value}");
    ml->add_option("--alpha", ml_alpha, "Order alpha > 0")->capture_default_str();
    ml->add_option("--beta", ml_beta, "Second parameter beta")->capture_default_str();
    ml->add_option("--t", ml_t, "Argument (any real)")->capture_default_str();

    // fracop
    std::string fo_kind = "power", fo_op = "derivative";
    double fo_alpha = 0.5, fo_t = 1.0, fo_beta = 1.0, fo_lambda = 1.0, fo_c = 1.0, fo_tol = 1e-8;
    int fo_n = 0;
    auto* fo = app.add_subcommand("fracop", "Marchaud derivative or Weyl integral of a closed-form operand at t; prints {value, est_error}");
    fo->add_option("--kind", fo_kind, "Operand: constant (c), power (t_+^beta), modified (t^beta for t>0, 1 before), exp (e^(lambda t))")
        ->check(CLI::IsMember({"constant", "power", "modified", "exp"}))
        ->capture_default_str();
    fo->add_option("--op", fo_op, "derivative or integral")->check(CLI::IsMember({"derivative", "integral"}))->capture_default_str();
    fo->add_option("--alpha", fo_alpha, "Fractional order in (0,1)")->capture_default_str();
    fo->add_option("--n", fo_n, "Integer part of the order (derivative only); total order n + alpha")->check(CLI::NonNegativeNumber)->capture_default_str();
    fo->add_option("--t", fo_t, "Evaluation time")->capture_default_str();
    fo->add_option("--beta", fo_beta, "Power exponent beta > 0")->capture_default_str();
    fo->add_option("--lambda", fo_lambda, "Exponential rate lambda > 0, per unit time")->capture_default_str();
    fo->add_option("--c", fo_c, "Constant value")->capture_default_str();
    fo->add_option("--rel-tol", fo_tol, "Relative quadrature tolerance")->capture_default_str();

    // relax
    double rx_alpha = 0.5, rx_lambda = -1.0, rx_c = 1.0, rx_t_end = 1.0, rx_dt = 1e-3;
    auto* rx = app.add_subcommand("relax", "Solves D^alpha u = lambda u for t > 0 with u = c on the past; writes table relax (t, u, closed_form)");
    rx->add_option("--alpha", rx_alpha, "Order in (0,1)")->capture_default_str();
    rx->add_option("--lambda", rx_lambda, "Rate lambda, per unit time^alpha")->capture_default_str();
    rx->add_option("--c", rx_c, "Constant past value")->capture_default_str();
    rx->add_option("--t-end", rx_t_end, "Final time")->capture_default_str();
    rx->add_option("--dt", rx_dt, "Time step, rounded so the grid ends at t-end")->capture_default_str();

    // fit
    std::string fit_input, fit_model = "both";
    auto* fit = app.add_subcommand("fit", "Fits C e^(lambda t) and/or C E_alpha(lambda t^alpha) to a series; time is measured from the first sample");
    fit->add_option("--input", fit_input, "CSV with header t,value; values > 0, times increasing")->required();
    fit->add_option("--model", fit_model, "exp, frac or both")->check(CLI::IsMember({"exp", "frac", "both"}))->capture_default_str();

    // visco
    std::string vs_program;
    double vs_k = 1.0, vs_alpha = 0.5, vs_t = 1.0;
    long vs_n = 0;
    auto* vs = app.add_subcommand("visco", "Stress of a power-law material G(t) = k t^-alpha under a piecewise-linear strain program");
    vs->add_option("--program", vs_program, "JSON {\"breakpoints\": [[t, strain], ...], \"past\": \"constant\"|\"zero\"}")->required();
    vs->add_option("--k", vs_k, "Modulus amplitude k > 0, stress units times time^alpha")->capture_default_str();
    vs->add_option("--alpha", vs_alpha, "Exponent in (0,1)")->capture_default_str();
    vs->add_option("--t", vs_t, "Evaluation time, after the first breakpoint")->capture_default_str();
    vs->add_option("--n", vs_n, "Terms in the discrete superposition sum, 0 = skip")->check(CLI::NonNegativeNumber)->capture_default_str();

    // ctrw
    double cw_alpha = 1.0, cw_t_end = 1.0, cw_dtau = 0.01, cw_dx = 0.0, cw_k = 1.0;
    long cw_walkers = 1000;
    int cw_times = 31;
    auto* cw = app.add_subcommand("ctrw", "Lattice random walk ensemble; writes tables msd (t, msd, mean) and hist (left, right, count)");
    cw->add_option("--alpha", cw_alpha, "Waiting-time exponent in (0,1]; 1 = one step per tick")->capture_default_str();
    cw->add_option("--walkers", cw_walkers, "Number of walkers")->capture_default_str();
    cw->add_option("--t-end", cw_t_end, "Final time")->capture_default_str();
    cw->add_option("--dtau", cw_dtau, "Clock tick")->capture_default_str();
    cw->add_option("--k", cw_k, "Target diffusivity used to derive dx when --dx is 0, length^2 / time^alpha")->capture_default_str();
    cw->add_option("--dx", cw_dx, "Lattice spacing, 0 = derived from --k")->capture_default_str();
    cw->add_option("--n-times", cw_times, "Log-spaced recording times")->capture_default_str();

    // diffusion
    double df_alpha = 0.5, df_k = 1.0, df_t = 1.0, df_x_max = 0.0;
    int df_n_x = 201, df_n_omega = 1024;
    auto* df = app.add_subcommand("diffusion", "Fundamental solution of D_t^alpha u = (k/2) u_xx; writes table u (x, u), prints {msd, msd_exact, normalization}");
    df->add_option("--alpha", df_alpha, "Order in (0,1]")->capture_default_str();
    df->add_option("--k", df_k, "Diffusivity k > 0, length^2 / time^alpha")->capture_default_str();
    df->add_option("--t", df_t, "Time > 0")->capture_default_str();
    df->add_option("--x-max", df_x_max, "Half-width of the x grid, 0 = 8 similarity lengths")->capture_default_str();
    df->add_option("--n-x", df_n_x, "Grid points, odd so x = 0 is included")->capture_default_str();
    df->add_option("--n-omega", df_n_omega, "Minimum Gauss panels in frequency (power of two >= 256)")->capture_default_str();

    // extension
    std::string ex_kind = "exp";
    double ex_alpha = 0.5, ex_c = 1.0, ex_beta = 1.0, ex_lambda = 1.0;
    ExtensionSpec es;
    auto* ex = app.add_subcommand("extension", "Degenerate parabolic extension whose boundary flux is D^alpha u; writes table trace (t, trace, oracle, ratio)");
    ex->add_option("--alpha", ex_alpha, "Order in (0,1)")->capture_default_str();
    ex->add_option("--kind", ex_kind, "Operand: constant, power or exp")->check(CLI::IsMember({"constant", "power", "exp"}))->capture_default_str();
    ex->add_option("--c", ex_c, "Constant value")->capture_default_str();
    ex->add_option("--beta", ex_beta, "Power exponent beta > alpha")->capture_default_str();
    ex->add_option("--lambda", ex_lambda, "Exponential rate > 0")->capture_default_str();
    ex->add_option("--t0", es.T0, "Start of the time strip")->capture_default_str();
    ex->add_option("--t1", es.T1, "End of the time strip")->capture_default_str();
    ex->add_option("--n-t", es.n_t, "Time steps")->capture_default_str();
    ex->add_option("--m", es.M, "Intervals in y")->capture_default_str();
    ex->add_option("--grading", es.grading, "y mesh grading exponent >= 2")->capture_default_str();
    ex->add_option("--y", es.Y, "Depth of the strip, 0 = automatic")->capture_default_str();
    ex->add_option("--n-trace", es.n_trace, "Trace points on [t0, t1]")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(2, "UsageError", e.what());
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        if (!g.config.empty()) {
            try {
                detail::apply_config(app, sub, g.config);
            } catch (const CLI::ParseError& e) {
                throw DomainError(std::string("config: ") + e.what());
            }
        }
        const std::string name = sub->get_name();
        if (name == "ml") {
            emit(g, {{"value", number(mittag_leffler({ml_alpha, ml_beta}, ml_t))}});
        } else if (name == "fracop") {
            QuadratureSpec q;
            q.rel_tol = fo_tol;
            const auto u = detail::operand(fo_kind, fo_c, fo_beta, fo_lambda);
            Estimate e;
            if (fo_op == "integral") {
                require(fo_n == 0, "fracop: --n applies to derivatives only");
                e = weyl_integral(u, fo_alpha, fo_t, q);
            } else {
                e = fo_n == 0 ? marchaud_derivative(u, fo_alpha, fo_t, q) : composite_derivative(u, {fo_n, fo_alpha}, fo_t, q);
            }
            emit(g, {{"value", number(e.value)}, {"est_error", number(e.est_error)}});
        } else if (name == "relax") {
            RelaxationProblem p;
            p.alpha = rx_alpha;
            p.lambda = rx_lambda;
            p.history = HistoryFunction::constant(rx_c);
            p.t_end = rx_t_end;
            p.dt = rx_dt;
            const auto tr = solve_marching(p);
            const auto cf = solve_constant_history(rx_alpha, rx_lambda, rx_c, rx_t_end, rx_dt);
            double err = 0.0;
            for (std::size_t i = 0; i < tr.values.size(); ++i) err = std::max(err, std::abs(tr.values[i] - cf.values[i]));
            const auto path = write_table(g, "relax", {{"t", "u", "closed_form"}, {tr.times, tr.values, cf.values}});
            emit(g, {{"max_abs_error", number(err)}, {"steps", tr.times.size() - 1}, {"table", path}});
        } else if (name == "fit") {
            std::ifstream in(fit_input, std::ios::binary);
            if (!in) throw DomainError("cannot open input " + fit_input);
            const auto d = read_time_series_csv(in);
            json out = json::object();
            if (fit_model != "frac") out["exponential"] = detail::fit_json(fit_exponential(d));
            if (fit_model != "exp") out["fractional"] = detail::fit_json(fit_fractional(d));
            if (g.format == "json") {
                std::cout << out.dump() << '\n';
            } else {
                std::cout << "model,alpha,lambda,C,rmse,t0,degenerate\n";
                for (const auto& [k, r] : out.items())
                    std::cout << r["model"].get<std::string>() << ',' << fmt17(r["alpha"].get<double>()) << ','
                              << fmt17(r["lambda"].get<double>()) << ',' << fmt17(r["C"].get<double>()) << ','
                              << fmt17(r["rmse"].get<double>()) << ',' << fmt17(r["t0"].get<double>()) << ','
                              << (r["degenerate"].get<bool>() ? "true" : "false") << '\n';
            }
        } else if (name == "visco") {
            const Material m{vs_k, vs_alpha};
            const auto s = detail::read_program(vs_program);
            const auto f = fractional_form(m, s, vs_t);
            json out{{"integral", number(superposition_integral(m, s, vs_t))},
                     {"fractional_form", number(f.value)},
                     {"fractional_form_error", number(f.est_error)}};
            if (vs_n > 0) out["sum"] = number(superposition_sum(m, s, vs_t, vs_n));
            emit(g, out);
        } else if (name == "ctrw") {
            WalkConfig c;
            c.alpha = cw_alpha;
            c.n_walkers = cw_walkers;
            c.t_end = cw_t_end;
            c.dtau = cw_dtau;
            c.n_times = cw_times;
            c.seed = g.seed;
            c.threads = g.threads;
            require(cw_k > 0.0 && cw_dx >= 0.0, "ctrw: need k > 0 and dx >= 0");
            require(cw_alpha > 0.0 && cw_alpha <= 1.0, "ctrw: alpha must lie in (0,1]");
            const double d = cw_alpha == 1.0 ? 1.0 : WaitingDist(cw_alpha).d_alpha();
            c.dx = cw_dx > 0.0 ? cw_dx : walk_step_for(cw_alpha, cw_k, cw_dtau, d);
            const auto st = run_ensemble(c);
            const auto mpath = write_table(g, "msd", {{"t", "msd", "mean"}, {st.times, st.msd, st.mean}});
            const auto& h = st.histogram;
            std::vector<double> left(h.counts.size()), right(h.counts.size()), count(h.counts.size());
            for (std::size_t i = 0; i < h.counts.size(); ++i) {
                left[i] = h.edges[i];
                right[i] = h.edges[i + 1];
                count[i] = static_cast<double>(h.counts[i]);
            }
            const auto hpath = write_table(g, "hist", {{"left", "right", "count"}, {left, right, count}});
            double slope = std::numeric_limits<double>::quiet_NaN();
            try {
                slope = msd_slope(st);
            } catch (const NumericError&) {
            }
            emit(g, {{"alpha", number(c.alpha)},
                     {"dx", number(c.dx)},
                     {"dtau", number(c.dtau)},
                     {"k", number(walk_diffusivity(c.alpha, c.dx, c.dtau, d))},
                     {"msd_final", number(st.msd.back())},
                     {"msd_slope", number(slope)},
                     {"seed", c.seed},
                     {"tables", {mpath, hpath}},
                     {"walkers", c.n_walkers}});
        } else if (name == "diffusion") {
            const DiffusionParams p{df_alpha, df_k, df_t};
            SpectralGrid sg;
            sg.n_omega = df_n_omega;
            require(df_n_x >= 3 && df_n_x % 2 == 1, "diffusion: --n-x must be odd and >= 3");
            require(df_x_max >= 0.0, "diffusion: --x-max must be >= 0");
            const double xm = df_x_max > 0.0 ? df_x_max : 8.0 * similarity_scale(p);
            std::vector<double> x(df_n_x);
            const int h = df_n_x / 2;
            for (int i = 0; i <= h; ++i) {
                x[h + i] = xm * i / h;
                x[h - i] = -x[h + i];
            }
            const auto u = fundamental_solution(p, x, sg);
            const auto path = write_table(g, "u", {{"x", "u"}, {x, u}});
            const auto mo = moments(p, sg);
            emit(g, {{"msd", number(mo.msd)}, {"msd_exact", number(msd_exact(p))}, {"normalization", number(mo.normalization)}, {"table", path}});
        } else if (name == "extension") {
            const auto u = detail::operand(ex_kind, ex_c, ex_beta, ex_lambda);
            const auto r = weighted_trace(solve_extension(u, ex_alpha, es));
            std::vector<double> ratio(r.trace.size());
            for (std::size_t i = 0; i < ratio.size(); ++i)
                ratio[i] = r.oracle[i] != 0.0 ? r.trace[i] / r.oracle[i] : std::numeric_limits<double>::quiet_NaN();
            const auto path = write_table(g, "trace", {{"t", "trace", "oracle", "ratio"}, {r.t_points, r.trace, r.oracle, ratio}});
            emit(g, {{"d_alpha_est", number(r.d_alpha_est)}, {"table", path}});
        }
        std::cout.flush();
        return 0;
    } catch (const DomainError& e) {
        return fail(2, error_kind(e), e.what());
    } catch (const std::invalid_argument& e) {
        return fail(2, "DomainError", e.what());
    } catch (const NumericError& e) {
        return fail(1, error_kind(e), e.what());
    } catch (const std::exception& e) {
        return fail(1, error_kind(e), e.what());
    }
}

} // namespace fracalc::cli
