#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <random>
#include <thread>

#include "semiwave/birthfuncs.hpp"
#include "semiwave/charspec.hpp"
#include "semiwave/config.hpp"
#include "semiwave/halanay.hpp"
#include "semiwave/linsolve.hpp"
#include "semiwave/output.hpp"
#include "semiwave/rdwave.hpp"

// Configuration-driven orchestration: one run = one subcommand executed from
// a RunConfig, emitting CSV/JSON/SVG artifacts plus an atomic run manifest.
// Exit codes: 0 pass, 1 assertion failure, 2 configuration error,
// 3 numerical failure.

namespace semiwave::cli {

struct RunContext {
    std::filesystem::path out_dir = "out";
    unsigned long seed = 0;
    int workers = 0;  ///< 0 = hardware concurrency
};

namespace schema {

using Schema = std::map<std::string, std::set<std::string>>;

inline const std::set<std::string> run_keys = {"subcommand", "seed"};
inline const std::set<std::string> model_keys = {"family", "p",  "delta", "a",
                                                 "b",      "n",  "d",     "h"};
inline const std::set<std::string> zgrid_keys = {"z_min", "z_max", "dx0"};

inline Schema for_subcommand(const std::string& sub) {
    if (sub == "roots")
        return {{"run", run_keys},
                {"roots", {"m", "p", "q", "d", "h", "L", "c", "lambda_choice", "L_I",
                           "C_u0"}}};
    if (sub == "halanay")
        return {{"run", run_keys},
                {"halanay", {"sigma_re", "sigma_im", "k_re", "k_im", "h", "t_end",
                             "n_per_delay", "history", "amplitude", "tolerance"}}};
    if (sub == "model") return {{"run", run_keys}, {"model", model_keys}};
    if (sub == "linear")
        return {{"run", run_keys},
                {"linear", {"m", "p", "q", "d", "h", "experiment", "backend", "T",
                            "sample_spacing", "cfl", "rate_tol_frac", "rate_tol_abs",
                            "power_tol", "asym_tol", "t_list", "svg"}},
                {"grid", {"x_min", "x_max", "n", "periodic"}},
                {"datum", {"kind", "center", "width", "mass"}}};
    if (sub == "profile")
        return {{"run", run_keys},
                {"model", model_keys},
                {"profile", {"c", "c_offset", "h", "max_time", "rate_tol"}},
                {"grid", zgrid_keys}};
    if (sub == "stability")
        return {{"run", run_keys},
                {"model", model_keys},
                {"stability",
                 {"experiment", "c", "c_offset", "h", "T", "q_amp", "bump_center",
                  "bump_width", "lambda_choice", "out_every", "max_time", "rate_tol",
                  "svg"}},
                {"grid", zgrid_keys}};
    throw ConfigError("unknown subcommand: " + sub);
}

}  // namespace schema

namespace detail_run {

inline json config_echo(const RunConfig& cfg) {
    json j;
    for (const auto& [sec, entries] : cfg.sections()) {
        json s;
        for (const auto& [k, e] : entries) s[k] = e.value;
        j[sec] = s;
    }
    return j;
}

/// Model block -> rescaled birth function (unit decay and diffusion) plus the
/// applied scale factors, recorded in the manifest.
struct ModelSpec {
    BirthFunction bf = BirthFunction::nicholson(2.0);
    double h = 1.0;
    double time_scale = 1.0;   ///< t_rescaled = time_scale * t_raw
    double space_scale = 1.0;  ///< x_rescaled = space_scale * x_raw
};

inline ModelSpec parse_model(const RunConfig& cfg) {
    ModelSpec m;
    const std::string fam = cfg.get_string("model", "family");
    const double h_raw = cfg.get_double("model", "h", 1.0);
    if (fam == "nicholson") {
        const double delta = cfg.get_double("model", "delta", 1.0);
        const double p = cfg.get_double("model", "p");
        if (delta <= 0.0) throw ConfigError("model: delta > 0 required");
        m.bf = BirthFunction::nicholson(p / delta);
        m.time_scale = delta;
        m.space_scale = std::sqrt(delta);
        m.h = delta * h_raw;
    } else if (fam == "mackey_glass") {
        const double d = cfg.get_double("model", "d", 1.0);
        if (d <= 0.0) throw ConfigError("model: d > 0 required");
        m.bf = BirthFunction::mackey_glass(cfg.get_double("model", "a") / d,
                                           cfg.get_double("model", "b"),
                                           cfg.get_double("model", "n"));
        m.time_scale = d;
        m.space_scale = std::sqrt(d);
        m.h = d * h_raw;
    } else {
        throw ConfigError("model: unknown family '" + fam + "'");
    }
    return m;
}

inline std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::string cur;
    for (char ch : text + ",") {
        if (ch == ',' || ch == ' ') {
            if (!cur.empty()) out.push_back(std::stod(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    return out;
}

inline FieldHistoryFn make_datum(const RunConfig& cfg, const GridSpec& grid) {
    const std::string kind = cfg.get_string("datum", "kind", "gaussian");
    const double center = cfg.get_double("datum", "center", 0.0);
    const double width = cfg.get_double("datum", "width", 1.0);
    const double mass = cfg.get_double("datum", "mass", 1.0);
    std::function<double(double)> shape;
    if (kind == "gaussian") {
        shape = [=](double x) {
            const double r = (x - center) / width;
            return std::exp(-0.5 * r * r);
        };
    } else if (kind == "box") {
        shape = [=](double x) { return std::abs(x - center) <= width ? 1.0 : 0.0; };
    } else if (kind == "bump") {
        shape = [=](double x) {
            const double r = (x - center) / width;
            return std::abs(r) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r * r)) : 0.0;
        };
    } else {
        throw ConfigError("datum: unknown kind '" + kind + "'");
    }
    double disc = 0.0;
    for (std::size_t j = 0; j < grid.n; ++j) disc += shape(grid.x(j));
    disc *= grid.dx();
    if (disc <= 0.0) throw ConfigError("datum: zero mass on the grid");
    const double scale = mass / disc;
    return [shape, scale](double, double x) { return scale * shape(x); };
}

inline GridSpec parse_xgrid(const RunConfig& cfg) {
    GridSpec g;
    g.x_min = cfg.get_double("grid", "x_min");
    g.x_max = cfg.get_double("grid", "x_max");
    g.n = static_cast<std::size_t>(cfg.get_int("grid", "n", 1024));
    g.periodic = cfg.get_bool("grid", "periodic", true);
    g.validate();
    return g;
}

// ---------------------------------------------------------------- roots ----

inline void run_roots(const RunConfig& cfg, Manifest& man,
                      const std::filesystem::path& dir) {
    LinearCoefficients co;
    co.m = cfg.get_double("roots", "m", 0.0);
    co.p = cfg.get_double("roots", "p");
    co.q = cfg.get_double("roots", "q");
    co.d = cfg.get_double("roots", "d", 0.0);
    co.h = cfg.get_double("roots", "h");
    const double L = cfg.get_double("roots", "L", 2.0);
    const double L_I = cfg.get_double("roots", "L_I", 0.0);
    const double C_u0 = cfg.get_double("roots", "C_u0", 1.0);

    const SpectralEnvelope env = gamma_root(co);
    const double sigma = sigma_root(co);
    const double cthr = speed_threshold(L, co.h);
    const double c = cfg.get_double("roots", "c", cthr + 1.0);
    SpeedData sd = lambda_interval(c, L, co.h);
    const std::string lc = cfg.get_string("roots", "lambda_choice", "lambda1");
    double gamma0;
    if (lc == "best") {
        gamma0 = gamma0_best(c, L, L_I, co.h, &sd.lambda_c);
    } else {
        if (lc == "lambda2")
            sd.lambda_c = sd.lambda2;
        else if (lc == "mid")
            sd.lambda_c = 0.5 * (sd.lambda1 + sd.lambda2);
        else if (lc != "lambda1")
            throw ConfigError("roots: unknown lambda_choice '" + lc + "'");
        gamma0 = gamma0_solve(sd, L, L_I);
    }
    const DecayAmplitude amp = decay_amplitude(co, C_u0);

    json out;
    out["gamma"] = env.gamma;
    out["eps_h"] = env.eps_h;
    out["sigma"] = sigma;
    out["c_threshold"] = cthr;
    out["lambda1"] = sd.lambda1;
    out["lambda2"] = sd.lambda2;
    out["gamma0"] = gamma0;
    out["A0_proof"] = amp.proof;
    out["A0_stated"] = amp.stated;
    write_text_atomic(dir / "roots.json", out.dump(2) + "\n");
    man.artifact("roots.json");
    for (auto& [k, v] : out.items()) man.constant(k, v);

    const double rg = std::abs(env.gamma - co.p - co.q * std::exp(-co.h * env.gamma));
    man.assert_that("gamma_residual", rg <= 1e-12 * (1.0 + std::abs(env.gamma)), rg);
    const double r1 = std::abs(sd.E(sd.lambda1));
    const double r2 = std::abs(sd.E(sd.lambda2));
    man.assert_that("lambda1_residual", r1 <= 1e-10, r1);
    man.assert_that("lambda2_residual", r2 <= 1e-10, r2);
    man.assert_that("gamma_nonpositive", env.gamma <= 0.0, -env.gamma);
}

// -------------------------------------------------------------- halanay ----

inline void run_halanay(const RunConfig& cfg, Manifest& man,
                        const std::filesystem::path& dir, unsigned long seed) {
    ScalarDDE p;
    p.sigma = {cfg.get_double("halanay", "sigma_re"),
               cfg.get_double("halanay", "sigma_im", 0.0)};
    p.k = {cfg.get_double("halanay", "k_re"), cfg.get_double("halanay", "k_im", 0.0)};
    p.h = cfg.get_double("halanay", "h");
    p.t_end = cfg.get_double("halanay", "t_end", 5.0);
    p.n_per_delay = static_cast<int>(cfg.get_int("halanay", "n_per_delay", 64));
    const double amp = cfg.get_double("halanay", "amplitude", 1.0);
    const double tol = cfg.get_double("halanay", "tolerance", 1e-6);
    const std::string hist = cfg.get_string("halanay", "history", "constant");
    if (hist == "constant") {
        p.history = [amp](double) { return cplx(amp, 0.0); };
    } else if (hist == "exp") {
        p.history = [amp](double s) { return cplx(amp * std::exp(s), 0.0); };
    } else if (hist == "trig") {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> U(-1.0, 1.0);
        const double a0 = U(rng), a1 = U(rng), a2 = U(rng), w1 = 2.0 + U(rng),
                     w2 = 4.0 + U(rng), ph = U(rng);
        p.history = [=](double s) {
            return cplx(amp * (a0 + a1 * std::cos(w1 * s + ph)),
                        amp * a2 * std::sin(w2 * s));
        };
    } else {
        throw ConfigError("halanay: unknown history preset '" + hist + "'");
    }

    const Trajectory tr = integrate_dde(p);
    const HalanayReport rep = check_halanay(p, tr, tol);

    CsvTable csv;
    csv.columns = {"t", "re", "im", "abs", "bound"};
    const double pref =
        tr.sup_history * std::exp(std::max(0.0, rep.lambda) * p.h);
    for (std::size_t j = 0; j < tr.values.size(); ++j)
        csv.rows.push_back({tr.times[j], tr.values[j].real(), tr.values[j].imag(),
                            std::abs(tr.values[j]),
                            pref * std::exp(rep.lambda * tr.times[j])});
    csv.write(dir / "trajectory.csv");
    man.artifact("trajectory.csv");

    json out;
    out["lambda"] = rep.lambda;
    out["sup_history"] = rep.sup_history;
    out["worst_ratio"] = rep.worst_ratio;
    out["worst_t"] = rep.worst_t;
    out["ok"] = rep.ok;
    write_text_atomic(dir / "halanay.json", out.dump(2) + "\n");
    man.artifact("halanay.json");
    man.constant("lambda", rep.lambda);
    man.assert_that("halanay_bound", rep.ok, 1.0 + rep.tolerance - rep.worst_ratio,
                    "worst ratio " + fmt6(rep.worst_ratio) + " at t=" +
                        fmt6(rep.worst_t));
}

// ---------------------------------------------------------------- model ----

inline void run_model(const RunConfig& cfg, Manifest& man,
                      const std::filesystem::path& dir) {
    const ModelSpec m = parse_model(cfg);
    const MonostabilityReport mono = check_M(m.bf);
    json out;
    out["family"] = m.bf.name();
    out["time_scale"] = m.time_scale;
    out["space_scale"] = m.space_scale;
    out["h"] = m.h;
    out["kappa"] = mono.kappa;
    out["L_g"] = lipschitz_global(m.bf);
    out["g_prime_0"] = mono.g_prime_0;
    out["g_prime_kappa"] = mono.g_prime_kappa;
    out["passes_M"] = mono.passes_M;
    out["holder_theta"] = mono.holder_theta;
    out["holder_C"] = mono.holder_C;
    if (mono.passes_M) {
        const IntervalData d = interval_data(m.bf);
        out["M_g"] = d.M_g;
        out["m_g"] = d.m_g;
        out["L_I"] = d.L_I;
        out["zeta1"] = d.zeta1;
        out["zeta2"] = d.zeta2;
        out["g_star_plus"] = d.g_star_plus;
        out["K"] = d.K;
        out["m_K"] = d.m_K;
        out["B_valid"] = d.b_valid;
        out["zeta_construction"] = d.zeta_construction;
        out["c_L_g"] = speed_threshold(out["L_g"].get<double>(), m.h);
        out["c_g_star_plus"] = speed_threshold(d.g_star_plus, m.h);
        man.assert_that("B1_B4_valid", d.b_valid, d.b_valid ? 1.0 : 0.0, d.b_failure);
    }
    write_text_atomic(dir / "model.json", out.dump(2) + "\n");
    man.artifact("model.json");
    for (auto& [k, v] : out.items()) man.constant(k, v);

    const double kap_res = mono.passes_M ? std::abs(m.bf(mono.kappa) - mono.kappa) : 0.0;
    man.assert_that("kappa_fixed_point", kap_res <= 1e-12 * (1.0 + mono.kappa), kap_res);
    man.assert_that("passes_M", mono.passes_M, mono.passes_M ? 1.0 : 0.0, mono.failure);
}

// --------------------------------------------------------------- linear ----

inline void run_linear(const RunConfig& cfg, Manifest& man,
                       const std::filesystem::path& dir) {
    LinearCoefficients co;
    co.m = cfg.get_double("linear", "m", 0.0);
    co.p = cfg.get_double("linear", "p");
    co.q = cfg.get_double("linear", "q");
    co.d = cfg.get_double("linear", "d", 0.0);
    co.h = cfg.get_double("linear", "h");
    const GridSpec grid = parse_xgrid(cfg);
    const double T = cfg.get_double("linear", "T", 40.0);
    const std::string experiment = cfg.get_string("linear", "experiment", "decay");
    const std::string backend = cfg.get_string("linear", "backend", "fd");
    FdOptions fo;
    fo.cfl = cfg.get_double("linear", "cfl", 0.4);
    const FieldHistoryFn datum = make_datum(cfg, grid);

    if (experiment == "decay") {
        const double spacing = cfg.get_double("linear", "sample_spacing", 0.25);
        const DecayReport rep = verify_decay(co, grid, datum, T, fo, spacing);
        CsvTable csv;
        csv.columns = {"t", "sup", "envelope"};
        for (std::size_t i = 0; i < rep.times.size(); ++i)
            csv.rows.push_back({rep.times[i], rep.sups[i],
                                rep.A0_proof * std::exp(rep.gamma * rep.times[i]) /
                                    std::sqrt(rep.times[i])});
        csv.write(dir / "decay.csv");
        man.artifact("decay.csv");
        json fit;
        fit["rate"] = rep.fit.rate;
        fit["power"] = rep.fit.power;
        fit["amplitude"] = rep.fit.amplitude;
        fit["residual_rms"] = rep.fit.residual_rms;
        fit["gamma"] = rep.gamma;
        fit["A0_proof"] = rep.A0_proof;
        fit["A0_stated"] = rep.A0_stated;
        fit["C_u0"] = rep.C_u0;
        write_text_atomic(dir / "fit.json", fit.dump(2) + "\n");
        man.artifact("fit.json");
        man.constant("gamma", rep.gamma);
        man.constant("fit_rate", rep.fit.rate);
        man.constant("fit_power", rep.fit.power);
        man.constant("predicted_rate", rep.gamma);

        man.assert_that("pointwise_bound", rep.bound_ok, 1.0 - rep.worst_ratio,
                        "worst sup/(A0 e^{gt}/sqrt t) = " + fmt6(rep.worst_ratio));
        const double frac = cfg.get_double("linear", "rate_tol_frac", 0.05);
        const double abs_tol = cfg.get_double("linear", "rate_tol_abs", 0.02);
        const double rate_err = std::abs(rep.fit.rate - rep.gamma);
        const double rate_tol =
            rep.gamma < -1e-9 ? frac * std::abs(rep.gamma) : abs_tol;
        man.assert_that("fit_rate_matches_gamma", rate_err <= rate_tol,
                        rate_tol - rate_err);
        const double ptol = cfg.get_double("linear", "power_tol", 0.1);
        man.assert_that("fit_power_is_minus_half",
                        std::abs(rep.fit.power + 0.5) <= ptol,
                        ptol - std::abs(rep.fit.power + 0.5));
        if (cfg.get_bool("linear", "svg", false)) {
            SvgPlot plot("sup-norm decay", "t", "sup |u|", true);
            std::vector<double> env;
            for (std::size_t i = 0; i < rep.times.size(); ++i)
                env.push_back(rep.A0_proof * std::exp(rep.gamma * rep.times[i]) /
                              std::sqrt(rep.times[i]));
            plot.add_series("measured", rep.times, rep.sups);
            plot.add_series("A0 e^{gamma t}/sqrt(t)", rep.times, env);
            plot.write(dir / "decay.svg");
            man.artifact("decay.svg");
        }
    } else if (experiment == "asymptotic") {
        std::vector<double> t_list =
            parse_list(cfg.get_string("linear", "t_list", "20,40,60"));
        const std::function<double(double)> u0 = [datum](double x) {
            return datum(0.0, x);
        };
        const AsymptoticReport rep = verify_asymptotic_profile(
            co, grid, u0, t_list, {-2.0, -1.0, 0.0, 1.0, 2.0}, fo);
        CsvTable csv;
        csv.columns = {"t", "x", "measured", "limit", "rel_err"};
        for (const auto& r : rep.rows)
            csv.rows.push_back({r.t, r.x, r.measured, r.limit, r.rel_err});
        csv.write(dir / "asymptotic.csv");
        man.artifact("asymptotic.csv");
        man.constant("sigma", rep.sigma);
        man.constant("prefactor", rep.prefactor);
        const double tol = cfg.get_double("linear", "asym_tol", 0.05);
        const double final_err = rep.max_rel_err.back();
        man.assert_that("profile_matches_limit", final_err <= tol, tol - final_err);
        man.assert_that("error_decreasing", rep.decreasing, rep.decreasing ? 1.0 : 0.0);
    } else if (experiment == "solve") {
        std::vector<double> times;
        for (double t = 0.0; t <= T + 1e-9; t += std::max(T / 100.0, 1e-3))
            times.push_back(t);
        const LinearSolveResult sol =
            backend == "spectral" ? solve_spectral(co, grid, datum, T, times)
                                  : solve_fd(co, grid, datum, T, times, fo);
        CsvTable csv;
        csv.columns = {"t", "sup", "mass"};
        for (std::size_t i = 0; i < sol.out_times.size(); ++i)
            csv.rows.push_back({sol.out_times[i], sol.sup_series[i],
                                sol.mass_series[i]});
        csv.write(dir / "series.csv");
        man.artifact("series.csv");
        man.assert_that("finite", std::isfinite(sol.sup_series.back()),
                        sol.sup_series.back());
    } else {
        throw ConfigError("linear: unknown experiment '" + experiment + "'");
    }
}

// -------------------------------------------------------------- profile ----

inline GridSpec parse_zgrid(const RunConfig& cfg, double c, double h) {
    return make_shift_aligned_grid(cfg.get_double("grid", "z_min"),
                                   cfg.get_double("grid", "z_max"),
                                   cfg.get_double("grid", "dx0", 0.05), c, h);
}

inline double resolve_speed(const RunConfig& cfg, const std::string& sec,
                            const BirthFunction& bf, double h) {
    if (cfg.has(sec, "c")) return cfg.get_double(sec, "c");
    const double off = cfg.get_double(sec, "c_offset", 0.5);
    return speed_threshold(lipschitz_global(bf), h) + off;
}

inline void run_profile(const RunConfig& cfg, Manifest& man,
                        const std::filesystem::path& dir) {
    const ModelSpec m = parse_model(cfg);
    const double h = cfg.get_double("profile", "h", m.h);
    const double c = resolve_speed(cfg, "profile", m.bf, h);
    const GridSpec grid = parse_zgrid(cfg, c, h);
    ProfileOptions po;
    po.max_time = cfg.get_double("profile", "max_time", 240.0);
    po.rate_tol = cfg.get_double("profile", "rate_tol", 1e-8);
    const WaveProfile prof = compute_profile(m.bf, c, h, grid, po);

    CsvTable csv;
    csv.columns = {"z", "psi"};
    for (std::size_t j = 0; j < grid.n; ++j)
        csv.rows.push_back({grid.x(j), prof.samples[j]});
    csv.write(dir / "profile.csv");
    man.artifact("profile.csv");
    man.constant("c", c);
    man.constant("lambda_c", prof.lambda_c);
    man.constant("kappa", prof.kappa);
    man.constant("anchor", prof.anchor);
    man.constant("residual_sup", prof.residual_sup);
    man.constant("relax_time", prof.relax_time);
    if (prof.speed_warning)
        man.note("warning", "c <= c(g*_+): semi-wavefront existence not guaranteed");

    man.assert_that("converged", prof.converged, po.rate_tol - prof.change_rate);
    man.assert_that("profile_residual", prof.residual_sup < 1e-6,
                    1e-6 - prof.residual_sup);
    man.assert_that("left_tail_decayed", prof.left_tail_ok,
                    1e-8 * prof.kappa - prof.left_tail_max);
    man.assert_that("range_in_zeta_interval", prof.range_ok,
                    std::min(prof.range_min - prof.zeta1, prof.zeta2 - prof.range_max),
                    "range [" + fmt6(prof.range_min) + ", " + fmt6(prof.range_max) +
                        "] vs [" + fmt6(prof.zeta1) + ", " + fmt6(prof.zeta2) + "]");
}

// ------------------------------------------------------------ stability ----

inline void run_stability(const RunConfig& cfg, Manifest& man,
                          const std::filesystem::path& dir) {
    const ModelSpec m = parse_model(cfg);
    const double h = cfg.get_double("stability", "h", m.h);
    const double c = resolve_speed(cfg, "stability", m.bf, h);
    const GridSpec grid = parse_zgrid(cfg, c, h);
    const double T = cfg.get_double("stability", "T", 20.0);
    const std::string experiment = cfg.get_string("stability", "experiment");
    ProfileOptions po;
    po.max_time = cfg.get_double("stability", "max_time", 240.0);
    po.rate_tol = cfg.get_double("stability", "rate_tol", 1e-8);
    const double out_every = cfg.get_double("stability", "out_every", 0.25);

    man.constant("c", c);
    if (experiment == "leading_edge" || experiment == "global") {
        const WaveProfile prof = compute_profile(m.bf, c, h, grid, po);
        man.constant("anchor", prof.anchor);
        man.assert_that("profile_converged", prof.converged,
                        po.rate_tol - prof.change_rate);
        PerturbationSpec pert;
        pert.q_amp = cfg.get_double("stability", "q_amp", 0.1);
        pert.width = cfg.get_double("stability", "bump_width", 2.0);
        pert.center =
            prof.anchor + cfg.get_double("stability", "bump_center", 2.0);
        pert.b = pert.center - pert.width;
        pert.lambda_c = prof.lambda_c;

        if (experiment == "leading_edge") {
            double lam = 0.0;  // 0 = profile default (lambda1)
            const std::string lc =
                cfg.get_string("stability", "lambda_choice", "lambda1");
            if (lc == "mid") {
                const SpeedData sd = lambda_interval(c, lipschitz_global(m.bf), h);
                lam = 0.5 * (sd.lambda1 + sd.lambda2);
            } else if (lc != "lambda1") {
                throw ConfigError("stability: unknown lambda_choice '" + lc + "'");
            }
            const LeadingEdgeReport rep =
                experiment_leading_edge(prof, m.bf, pert, T, out_every, lam);
            CsvTable csv;
            csv.columns = {"t", "weighted_sup", "linear_sup", "plain_sup"};
            for (const auto& r : rep.rows)
                csv.rows.push_back({r.t, r.weighted_sup, r.linear_sup, r.plain_sup});
            csv.write(dir / "leading_edge.csv");
            man.artifact("leading_edge.csv");
            man.constant("lambda_c", rep.lambda_c);
            man.constant("gamma", rep.gamma);
            if (rep.fit_valid) man.constant("fitted_rate", rep.weighted_fit.rate);
            man.assert_that("weighted_majorization", rep.majorization_ok,
                            1.0 - rep.worst_ratio,
                            "worst at t=" + fmt6(rep.worst_t) + " z=" +
                                fmt6(rep.worst_z));
            man.assert_that("weighted_rate_below_gamma",
                            rep.fit_valid &&
                                rep.weighted_fit.rate <= rep.gamma + 0.05,
                            rep.gamma + 0.05 - rep.weighted_fit.rate);
            if (cfg.get_bool("stability", "svg", false)) {
                SvgPlot plot("leading edge", "t", "weighted sup", true);
                std::vector<double> ts, ws, us;
                for (const auto& r : rep.rows) {
                    ts.push_back(r.t);
                    ws.push_back(r.weighted_sup);
                    us.push_back(r.linear_sup);
                }
                plot.add_series("xi |v-psi|", ts, ws);
                plot.add_series("linear majorant", ts, us);
                plot.write(dir / "leading_edge.svg");
                man.artifact("leading_edge.svg");
            }
        } else {
            const GlobalStabilityReport rep =
                experiment_global_stability(prof, m.bf, pert, T, out_every);
            CsvTable csv;
            csv.columns = {"t", "D", "envelope"};
            for (const auto& r : rep.rows)
                csv.rows.push_back({r.t, r.D, r.envelope});
            csv.write(dir / "global_stability.csv");
            man.artifact("global_stability.csv");
            man.constant("gamma0", rep.gamma0);
            man.constant("lambda_c", rep.lambda_c);
            man.constant("L_I", rep.L_I);
            man.constant("fitted_rate", rep.fitted_tail_rate);
            man.constant("predicted_rate", -rep.gamma0);
            man.assert_that("exponential_envelope", rep.envelope_ok,
                            1.0 + 1e-6 - rep.worst_ratio,
                            "worst ratio at t=" + fmt6(rep.worst_t));
            man.assert_that("tail_rate_at_least_090_gamma0", rep.rate_ok,
                            -0.9 * rep.gamma0 - rep.fitted_tail_rate);
            man.assert_that("profile_range_in_IK", rep.profile_in_IK,
                            std::min(prof.range_min - rep.m_K + 1e-3,
                                     rep.K + 1e-3 - prof.range_max));
        }
    } else if (experiment == "uniqueness") {
        const double kap = kappa(m.bf);
        const double lam1 = lambda_interval(c, lipschitz_global(m.bf), h).lambda1;
        const UniquenessReport rep = experiment_uniqueness(
            m.bf, c, h, grid, logistic_front_datum(kap, lam1),
            reshaped_front_datum(kap, lam1, 3.0), po);
        man.constant("sup_distance", rep.sup_distance);
        man.assert_that("both_converged", rep.conclusive, rep.conclusive ? 1 : 0);
        man.assert_that("hypothesis_weighted_gap", rep.hypothesis_ok,
                        rep.hypothesis_ok ? 1 : 0);
        man.assert_that("anchored_profiles_match", rep.sup_distance < 1e-5,
                        1e-5 - rep.sup_distance);
    } else if (experiment == "comparison") {
        const BirthFunction upper = envelope_upper(m.bf);
        const double kap = kappa(m.bf);
        const FieldHistoryFn step = [kap](double, double z) {
            return 0.5 * kap * (1.0 + std::tanh(0.5 * z));
        };
        const ComparisonReport rep =
            check_comparison(m.bf, upper, c, h, grid, step, step, T);
        man.constant("worst_violation", rep.worst_violation);
        man.assert_that("hypotheses_hold", rep.pre_ok, rep.pre_ok ? 1 : 0,
                        rep.pre_failure);
        man.assert_that("order_preserved", rep.order_ok,
                        rep.tol - rep.worst_violation);
    } else {
        throw ConfigError("stability: unknown experiment '" + experiment + "'");
    }
}

}  // namespace detail_run

/// One configured run: dispatch, artifacts, manifest. Returns the exit code.
inline int run_config(const RunConfig& cfg, const RunContext& ctx) {
    const auto start = std::chrono::steady_clock::now();
    std::filesystem::create_directories(ctx.out_dir);
    Manifest man(detail_run::config_echo(cfg));
    int code = 0;
    try {
        const std::string sub = cfg.get_string("run", "subcommand");
        cfg.validate(schema::for_subcommand(sub));
        const auto seed = static_cast<unsigned long>(
            cfg.get_int("run", "seed", static_cast<long>(ctx.seed)));
        if (sub == "roots")
            detail_run::run_roots(cfg, man, ctx.out_dir);
        else if (sub == "halanay")
            detail_run::run_halanay(cfg, man, ctx.out_dir, seed);
        else if (sub == "model")
            detail_run::run_model(cfg, man, ctx.out_dir);
        else if (sub == "linear")
            detail_run::run_linear(cfg, man, ctx.out_dir);
        else if (sub == "profile")
            detail_run::run_profile(cfg, man, ctx.out_dir);
        else if (sub == "stability")
            detail_run::run_stability(cfg, man, ctx.out_dir);
        else
            throw ConfigError("unknown subcommand: " + sub);
        if (man.any_failed()) code = 1;
    } catch (const ConfigError& e) {
        man.note("error", std::string("config: ") + e.what());
        code = 2;
    } catch (const std::invalid_argument& e) {
        man.note("error", std::string("config: ") + e.what());
        code = 2;
    } catch (const std::exception& e) {
        man.note("error", std::string("numerical: ") + e.what());
        code = 3;
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    man.write(ctx.out_dir / "run.json", wall, code);
    return code;
}

/// Sweep: one declared numeric axis, every point run in a worker pool,
/// aggregate written in axis order regardless of scheduling.
inline int run_sweep(const RunConfig& cfg, const RunContext& ctx) {
    const auto start = std::chrono::steady_clock::now();
    std::filesystem::create_directories(ctx.out_dir);
    Manifest man(detail_run::config_echo(cfg));
    int code = 0;
    try {
        const std::string target = cfg.get_string("sweep", "target");
        auto full_schema = schema::for_subcommand(target);
        full_schema["sweep"] = {"target", "axis", "from", "to", "steps"};
        cfg.validate(full_schema);
        const std::string axis = cfg.get_string("sweep", "axis");
        const auto dot = axis.find('.');
        if (dot == std::string::npos)
            throw ConfigError("sweep: axis must be section.key");
        const std::string sec = axis.substr(0, dot), key = axis.substr(dot + 1);
        const double from = cfg.get_double("sweep", "from");
        const double to = cfg.get_double("sweep", "to");
        const auto steps = static_cast<std::size_t>(cfg.get_int("sweep", "steps", 5));
        if (steps < 1) throw ConfigError("sweep: steps >= 1 required");

        RunConfig base = cfg;  // the wrapped run keeps every non-sweep section
        base.erase_section("sweep");
        base.set("run", "subcommand", target);

        struct Point {
            double value = 0.0;
            int exit_code = -1;
            json manifest;
        };
        std::vector<Point> points(steps);
        std::atomic<std::size_t> next{0};
        const int nworkers = ctx.workers > 0
                                 ? ctx.workers
                                 : static_cast<int>(std::thread::hardware_concurrency());
        auto worker = [&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= steps) return;
                const double v =
                    steps == 1 ? from
                               : from + (to - from) * static_cast<double>(i) /
                                     static_cast<double>(steps - 1);
                RunConfig point_cfg = base;
                point_cfg.set(sec, key, fmt(v));
                RunContext pc = ctx;
                pc.out_dir = ctx.out_dir / ("point_" + std::to_string(i));
                pc.seed = ctx.seed + i;
                points[i].value = v;
                points[i].exit_code = run_config(point_cfg, pc);
                std::ifstream f(pc.out_dir / "run.json");
                if (f) points[i].manifest = json::parse(f, nullptr, false);
            }
        };
        std::vector<std::thread> pool;
        for (int w = 0; w < std::max(1, nworkers); ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();

        CsvTable csv;
        csv.columns = {"index", "value", "exit_code", "fitted_rate", "predicted_rate"};
        for (std::size_t i = 0; i < steps; ++i) {
            double fitted = NAN, predicted = NAN;
            const auto& mj = points[i].manifest;
            if (mj.is_object() && mj.contains("constants")) {
                const auto& cts = mj["constants"];
                if (cts.contains("fit_rate")) fitted = cts["fit_rate"].get<double>();
                if (cts.contains("fitted_rate")) fitted = cts["fitted_rate"].get<double>();
                if (cts.contains("predicted_rate"))
                    predicted = cts["predicted_rate"].get<double>();
            }
            csv.rows.push_back({static_cast<double>(i), points[i].value,
                                static_cast<double>(points[i].exit_code), fitted,
                                predicted});
            man.assert_that("point_" + std::to_string(i) + "_ok",
                            points[i].exit_code == 0,
                            static_cast<double>(-points[i].exit_code));
        }
        csv.write(ctx.out_dir / "sweep.csv");
        man.artifact("sweep.csv");
        if (man.any_failed()) code = 1;
    } catch (const ConfigError& e) {
        man.note("error", std::string("config: ") + e.what());
        code = 2;
    } catch (const std::exception& e) {
        man.note("error", std::string("numerical: ") + e.what());
        code = 3;
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    man.write(ctx.out_dir / "run.json", wall, code);
    return code;
}

}  // namespace semiwave::cli
