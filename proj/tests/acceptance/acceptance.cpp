// Acceptance suite: one check per criterion, each printing a single
// [PASS]/[FAIL] line with the measured quantities and its wall time.
// Run all criteria with no arguments, or a single one with --only N.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "semiwave/birthfuncs.hpp"
#include "semiwave/charspec.hpp"
#include "semiwave/halanay.hpp"
#include "semiwave/linsolve.hpp"
#include "semiwave/rdwave.hpp"

using namespace semiwave;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point t0 = clock::now();
    return std::chrono::duration<double>(clock::now() - t0).count();
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(4);
    ss << v;
    return ss.str();
}

FieldHistoryFn gaussian_unit_mass(const GridSpec& grid, double width) {
    double disc = 0.0;
    for (std::size_t j = 0; j < grid.n; ++j) {
        const double r = grid.x(j) / width;
        disc += std::exp(-0.5 * r * r);
    }
    disc *= grid.dx();
    const double scale = 1.0 / disc;
    return [width, scale](double, double x) {
        const double r = x / width;
        return scale * std::exp(-0.5 * r * r);
    };
}

// ---------------------------------------------------------------------------
// C1: characteristic-root suite. 1000 random (a, b >= 0, h > 0): residual
// below 1e-12 (1+|lambda|), exact sign laws, under one second.
Outcome criterion1() {
    const double t0 = now_seconds();
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> Ua(-10, 10), Ub(0, 10), Uh(0.05, 5);
    double worst_res = 0.0;
    for (int i = 0; i < 1000; ++i) {
        double a, b;
        const double h = Uh(rng);
        if (i % 50 == 0) {  // exact critical line -a = b
            b = Ub(rng);
            a = -b;
        } else {
            a = Ua(rng);
            b = Ub(rng);
        }
        const double lam = solve_scalar_char(a, b, h);
        const double res = std::abs(lam - a - b * std::exp(-h * lam));
        worst_res = std::max(worst_res, res / (1.0 + std::abs(lam)));
        if (res > 1e-12 * (1.0 + std::abs(lam)))
            return {false, "residual " + fmt(res) + " too large"};
        if ((lam <= 0.0) != (-a >= b)) return {false, "sign law (i) violated"};
        if ((lam == 0.0) != (-a == b)) return {false, "sign law (ii) violated"};
    }
    const double dt = now_seconds() - t0;
    if (dt >= 1.0) return {false, "runtime " + fmt(dt) + "s exceeds 1s"};
    return {true, "1000 roots, worst residual " + fmt(worst_res) + ", " +
                      fmt(dt) + "s"};
}

// ---------------------------------------------------------------------------
// C2: sandwich bounds for three coefficient sets, 200 zeta samples each, and
// the -2/h log-asymptotics at zeta = 1e4 for the q = 1 sets.
Outcome criterion2() {
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> Uz(0.0, 20.0);
    const LinearCoefficients sets[] = {{0, -2, 1, 0, 1}, {0, -1, 1, 0, 0.5},
                                       {0, -3, 0.5, 0, 2}};
    double worst_margin = 1e300;
    for (const auto& co : sets) {
        std::vector<double> zetas = {0.0};
        for (int i = 0; i < 200; ++i) zetas.push_back(Uz(rng));
        const auto rep = check_gauss_bounds(co, zetas);
        if (!rep.all_pass)
            return {false, "sandwich violation at zeta " + fmt(rep.worst_zeta)};
        worst_margin = std::min({worst_margin, rep.worst_lower_margin,
                                 rep.worst_upper_margin});
    }
    for (const auto& co : {sets[0], sets[1]}) {  // q = 1 cases
        const double ratio = log_asymptotics_ratio(co, 1e4);
        const double target = -2.0 / co.h;
        if (std::abs(ratio - target) > 0.03 * std::abs(target))
            return {false, "ratio " + fmt(ratio) + " vs " + fmt(target)};
    }
    return {true, "3 sets x 201 zetas, zero violations (worst margin " +
                      fmt(worst_margin) + "), log-asymptotics within 3%"};
}

// ---------------------------------------------------------------------------
// C3: Halanay certification over 1000 random complex scalar DDEs.
Outcome criterion3() {
    const double t0 = now_seconds();
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        ScalarDDE p;
        p.sigma = {-5.0 + 6.0 * U(rng), -5.0 + 10.0 * U(rng)};
        p.k = std::polar(5.0 * U(rng), 6.283185307179586 * U(rng));
        p.h = 0.25 + 1.75 * U(rng);
        p.t_end = 3.0 * p.h;
        p.n_per_delay = 512;
        const double a0r = U(rng) - 0.5, a0i = U(rng) - 0.5, a1 = U(rng) - 0.5,
                     a2 = U(rng) - 0.5, w1 = 2.0 + 3.0 * U(rng),
                     w2 = 1.0 + 4.0 * U(rng), ph = 6.28 * U(rng);
        p.history = [=](double s) {
            return cplx(a0r + a1 * std::cos(w1 * s + ph), a0i + a2 * std::sin(w2 * s));
        };
        const HalanayReport rep = check_halanay(p, 1e-6);
        worst = std::max(worst, rep.worst_ratio);
        if (!rep.ok)
            return {false, "bound violated: ratio " + fmt(rep.worst_ratio) +
                               " at t " + fmt(rep.worst_t)};
    }
    const double dt = now_seconds() - t0;
    if (dt >= 30.0) return {false, "runtime " + fmt(dt) + "s exceeds 30s"};
    return {true, "1000 DDEs certified, worst ratio " + fmt(worst) + ", " +
                      fmt(dt) + "s"};
}

// ---------------------------------------------------------------------------
// C4: decay law for (m=0, p=-2, q=1, d=0, h=1), unit-mass Gaussian, T=40,
// periodic width 160: fitted rate within 5% of gamma, power within 0.1 of
// -1/2, pointwise bound for all sampled t > h/2, under two minutes.
Outcome criterion4() {
    const double t0 = now_seconds();
    const LinearCoefficients co{0, -2, 1, 0, 1};
    const GridSpec grid{-80.0, 80.0, 2048, true};
    const double gamma_oracle = oracle::char_root(-2, 1, 1);
    const DecayReport rep = verify_decay(co, grid, gaussian_unit_mass(grid, 0.5), 40.0);
    if (std::abs(rep.gamma - gamma_oracle) > 1e-9)
        return {false, "gamma disagrees with the desk oracle"};
    if (!rep.bound_ok)
        return {false, "pointwise bound violated: ratio " + fmt(rep.worst_ratio) +
                           " at t " + fmt(rep.worst_t)};
    const double rate_err = std::abs(rep.fit.rate - rep.gamma);
    if (rate_err > 0.05 * std::abs(rep.gamma))
        return {false, "rate " + fmt(rep.fit.rate) + " vs gamma " + fmt(rep.gamma)};
    if (std::abs(rep.fit.power + 0.5) > 0.1)
        return {false, "power " + fmt(rep.fit.power) + " not -1/2 within 0.1"};
    const double dt = now_seconds() - t0;
    if (dt >= 120.0) return {false, "runtime " + fmt(dt) + "s exceeds 120s"};
    return {true, "rate " + fmt(rep.fit.rate) + " (gamma " + fmt(rep.gamma) +
                      "), power " + fmt(rep.fit.power) + ", bound ratio " +
                      fmt(rep.worst_ratio) + ", " + fmt(dt) + "s"};
}

// ---------------------------------------------------------------------------
// C5: critical case -p = q = 1: no exponential decay, only t^{-1/2}.
Outcome criterion5() {
    const LinearCoefficients co{0, -1, 1, 0, 1};
    const GridSpec grid{-80.0, 80.0, 2048, true};
    const DecayReport rep = verify_decay(co, grid, gaussian_unit_mass(grid, 0.5), 40.0);
    if (rep.gamma != 0.0) return {false, "gamma must be exactly 0"};
    if (std::abs(rep.fit.rate) > 0.02)
        return {false, "rate " + fmt(rep.fit.rate) + " not within 0.02 of 0"};
    if (std::abs(rep.fit.power + 0.5) > 0.15)
        return {false, "power " + fmt(rep.fit.power) + " not -1/2 within 0.15"};
    return {true, "rate " + fmt(rep.fit.rate) + ", power " + fmt(rep.fit.power) +
                      " (gamma = 0 critical case)"};
}

// ---------------------------------------------------------------------------
// C6: long-time profile constant, plus the pure-heat sanity case.
Outcome criterion6() {
    const GridSpec grid{-80.0, 80.0, 2048, true};
    const auto u0 = [](double x) {
        const double r = x / 1.5;
        return std::abs(r) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r * r)) : 0.0;
    };
    const AsymptoticReport rep = verify_asymptotic_profile(
        {0, -2, 1, 0, 1}, grid, u0, {20.0, 40.0, 60.0}, {-2, -1, 0, 1, 2});
    if (rep.max_rel_err.back() > 0.05)
        return {false, "profile error " + fmt(rep.max_rel_err.back()) + " at t=60"};
    if (!rep.decreasing) return {false, "profile error not decreasing in t"};

    // heat sanity: sup norm tracks M / sqrt(4 pi t) within 2% at t=50
    const GridSpec hgrid{-80.0, 80.0, 1024, true};
    const auto sol = solve_fd({0, 0, 0, 0, 1}, hgrid,
                              gaussian_unit_mass(hgrid, 1.0), 50.0, {50.0});
    const double pred = 1.0 / std::sqrt(4.0 * 3.141592653589793 * 50.0);
    const double heat_err = std::abs(sol.sup_series.back() / pred - 1.0);
    if (heat_err > 0.02) return {false, "heat sanity off by " + fmt(heat_err)};
    return {true, "profile err t=60 " + fmt(rep.max_rel_err.back()) +
                      " (decreasing over {20,40,60}), heat sanity err " +
                      fmt(heat_err)};
}

// ---------------------------------------------------------------------------
// C7: FD vs spectral backend equivalence on 20 random coefficient sets.
Outcome criterion7() {
    std::mt19937_64 rng(707);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const GridSpec grid{-25.6, 25.6, 1024, true};
    const double dx = grid.dx();
    const double tol = std::max(1e-5, 5.0 * dx * dx);
    FieldHistoryFn datum = [](double, double x) {
        return std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.141592653589793);
    };
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        LinearCoefficients co;
        co.m = 2.0 * U(rng) - 1.0;
        co.p = -3.0 * U(rng);
        co.q = -co.p * U(rng);
        co.h = 0.5 + 1.5 * U(rng);
        co.d = (trial % 2 == 0) ? 0.0 : dx * std::floor(40.0 * U(rng) - 20.0);
        const auto fd = solve_fd(co, grid, datum, 2.0, {1.0, 2.0});
        const auto sp = solve_spectral(co, grid, datum, 2.0, fd.out_times);
        for (std::size_t i = 0; i < fd.outputs.size(); ++i) {
            double diff = 0.0;
            for (std::size_t j = 0; j < grid.n; ++j)
                diff = std::max(diff,
                                std::abs(fd.outputs[i].u[j] - sp.outputs[i].u[j]));
            worst = std::max(worst, diff);
            if (diff > tol)
                return {false, "trial " + std::to_string(trial) + ": diff " +
                                   fmt(diff) + " > " + fmt(tol)};
        }
    }
    return {true, "20 sets, worst sup difference " + fmt(worst) + " (tol " +
                      fmt(tol) + ")"};
}

// ---------------------------------------------------------------------------
// C8: leading-edge weighted majorization for Nicholson p=2, h=1,
// c = c(L_g) + 0.5, lambda_c = lambda1, over t in (0, 20].
Outcome criterion8() {
    const double t0 = now_seconds();
    const auto bf = BirthFunction::nicholson(2.0);
    const double h = 1.0;
    const double c = speed_threshold(2.0, h) + 0.5;
    const GridSpec grid = make_shift_aligned_grid(-80.0, 60.0, 0.05, c, h);
    ProfileOptions popts;
    popts.max_time = 150.0;
    const WaveProfile prof = compute_profile(bf, c, h, grid, popts);
    if (!prof.converged) return {false, "profile relaxation did not converge"};

    PerturbationSpec bump;
    bump.q_amp = 0.1;
    bump.width = 2.0;
    bump.center = prof.anchor + 2.0;
    bump.b = bump.center - bump.width;
    bump.lambda_c = prof.lambda_c;
    const LeadingEdgeReport rep = experiment_leading_edge(prof, bf, bump, 20.0, 0.25);
    if (!rep.majorization_ok)
        return {false, "majorization violated: ratio " + fmt(rep.worst_ratio) +
                           " at (t,z)=(" + fmt(rep.worst_t) + "," + fmt(rep.worst_z) +
                           ")"};
    if (!rep.fit_valid) return {false, "weighted decay fit unavailable"};
    if (rep.weighted_fit.rate > rep.gamma + 0.05)
        return {false, "weighted rate " + fmt(rep.weighted_fit.rate) +
                           " above gamma + 0.05 = " + fmt(rep.gamma + 0.05)};
    const double dt = now_seconds() - t0;
    if (dt >= 300.0) return {false, "runtime " + fmt(dt) + "s exceeds 300s"};
    return {true, "worst ratio " + fmt(rep.worst_ratio) + ", weighted rate " +
                      fmt(rep.weighted_fit.rate) + " <= gamma+0.05 (gamma " +
                      fmt(rep.gamma) + "), " + fmt(dt) + "s"};
}

// ---------------------------------------------------------------------------
// C9: global stability envelopes for Nicholson p = 2 and p = e^{1.5}.
Outcome criterion9() {
    struct Case {
        double p;
        double z_min;
        double LI_expect;
    };
    const Case cases[] = {{2.0, -90.0, 1.0 - std::log(2.0)},
                          {std::exp(1.5), -50.0, 0.559074019608}};
    std::string detail;
    for (const Case& cs : cases) {
        const auto bf = BirthFunction::nicholson(cs.p);
        const double h = 0.5;
        const double c = speed_threshold(lipschitz_global(bf), h) + 1.0;
        const GridSpec grid = make_shift_aligned_grid(cs.z_min, 45.0, 0.05, c, h);
        ProfileOptions popts;
        popts.max_time = 150.0;
        const WaveProfile prof = compute_profile(bf, c, h, grid, popts);
        if (!prof.converged) return {false, "profile did not converge"};
        PerturbationSpec bump;
        bump.q_amp = 0.1;
        bump.width = 2.0;
        bump.center = prof.anchor + 2.0;
        bump.b = bump.center - bump.width;
        bump.lambda_c = prof.lambda_c;
        const GlobalStabilityReport rep =
            experiment_global_stability(prof, bf, bump, 15.0, 0.1);
        if (std::abs(rep.L_I - cs.LI_expect) > 2e-3)
            return {false, "L_I " + fmt(rep.L_I) + " vs expected " +
                               fmt(cs.LI_expect)};
        if (!rep.envelope_ok)
            return {false, "envelope violated (ratio " + fmt(rep.worst_ratio) +
                               " at t " + fmt(rep.worst_t) + ")"};
        if (!rep.rate_ok)
            return {false, "tail rate " + fmt(rep.fitted_tail_rate) +
                               " above -0.9 gamma0 = " + fmt(-0.9 * rep.gamma0)};
        if (!rep.profile_in_IK)
            return {false, "profile range outside I_K +- 1e-3"};
        detail += "p=" + fmt(cs.p) + ": gamma0 " + fmt(rep.gamma0) + ", tail rate " +
                  fmt(rep.fitted_tail_rate) + "; ";
    }
    return {true, detail + "envelopes hold, ranges in I_K"};
}

// ---------------------------------------------------------------------------
// C10: uniqueness: two distinct step-like data relax to the same anchored
// profile within 1e-5.
Outcome criterion10() {
    const auto bf = BirthFunction::nicholson(2.0);
    const double kap = kappa(bf);
    const double h = 1.0;
    const double c = speed_threshold(2.0, h) + 0.5;
    const GridSpec grid = make_shift_aligned_grid(-80.0, 45.0, 0.05, c, h);
    ProfileOptions opts;
    opts.max_time = 150.0;
    // two distinct step-like data in the same weighted class: identical
    // leading tails e^{lambda1 z}, different transition shapes
    const double lam1 = lambda_interval(c, 2.0, h).lambda1;
    const UniquenessReport rep = experiment_uniqueness(
        bf, c, h, grid, logistic_front_datum(kap, lam1),
        reshaped_front_datum(kap, lam1, 3.0), opts);
    if (!rep.conclusive) return {false, "a relaxation did not converge"};
    if (!rep.hypothesis_ok) return {false, "weighted initial-gap hypothesis flagged"};
    if (rep.sup_distance >= 1e-5)
        return {false, "anchored distance " + fmt(rep.sup_distance) + " >= 1e-5"};
    return {true, "anchored profile distance " + fmt(rep.sup_distance) + " < 1e-5"};
}

// ---------------------------------------------------------------------------
// C11: comparison: 50 randomized ordered-data trials with (g, gbar) and
// ordered-family pairs; no order violation beyond 1e-9.
Outcome criterion11() {
    std::mt19937_64 rng(1111);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const double h = 0.5 + 0.5 * U(rng);
        const double c = 0.8 + 1.2 * U(rng);
        const GridSpec grid = make_shift_aligned_grid(-20.0, 20.0, 0.1, c, h);
        const double slope = 0.5 + U(rng);
        const double z0 = 4.0 * U(rng) - 2.0;
        ComparisonReport rep;
        if (trial % 2 == 0) {
            // g against its running-max envelope, same data
            const double p = std::exp(1.1 + 1.0 * U(rng));
            const auto g = BirthFunction::nicholson(p);
            const auto gbar = envelope_upper(g);
            const double kap = kappa(g);
            const FieldHistoryFn init = [=](double, double z) {
                return kap / (1.0 + std::exp(-slope * (z - z0)));
            };
            rep = check_comparison(g, gbar, c, h, grid, init, init, 3.0);
        } else {
            // ordered Nicholson pair, data below 1 where both are monotone
            const double p1 = 1.2 + 0.8 * U(rng);
            const double p2 = p1 + (std::exp(1.0) - p1) * U(rng);
            const auto g1 = BirthFunction::nicholson(p1);
            const auto g2 = BirthFunction::nicholson(p2);
            const FieldHistoryFn lo = [=](double, double z) {
                return 0.4 / (1.0 + std::exp(-slope * (z - z0)));
            };
            const double amp = 0.3 * U(rng);
            const FieldHistoryFn hi = [=](double s, double z) {
                return lo(s, z) + amp * std::exp(-0.25 * (z - z0) * (z - z0));
            };
            rep = check_comparison(g1, g2, c, h, grid, lo, hi, 3.0);
        }
        if (!rep.pre_ok) return {false, "trial " + std::to_string(trial) +
                                            " hypothesis setup failed: " +
                                            rep.pre_failure};
        worst = std::max(worst, rep.worst_violation);
        if (!rep.order_ok)
            return {false, "trial " + std::to_string(trial) + ": violation " +
                               fmt(rep.worst_violation)};
    }
    return {true, "50 trials, worst order violation " + fmt(worst) + " (tol 1e-9)"};
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i + 1 < argc; ++i)
        if (std::strcmp(argv[i], "--only") == 0) only = std::atoi(argv[i + 1]);

    using Fn = Outcome (*)();
    const Fn criteria[] = {criterion1, criterion2, criterion3, criterion4,
                           criterion5, criterion6, criterion7, criterion8,
                           criterion9, criterion10, criterion11};
    const char* names[] = {
        "characteristic-root suite",
        "sandwich bounds + log asymptotics",
        "halanay certification",
        "decay law (p=-2, q=1, h=1)",
        "critical case (-p=q=1)",
        "asymptotic profile + heat sanity",
        "backend equivalence",
        "leading-edge majorization",
        "global stability envelope",
        "uniqueness of anchored profiles",
        "comparison principle",
    };

    bool all_ok = true;
    for (int i = 0; i < 11; ++i) {
        if (only != 0 && only != i + 1) continue;
        const double t0 = now_seconds();
        Outcome out;
        try {
            out = criteria[i]();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double dt = now_seconds() - t0;
        std::printf("[%s] criterion %2d (%s): %s [%.1fs]\n",
                    out.pass ? "PASS" : "FAIL", i + 1, names[i],
                    out.detail.c_str(), dt);
        std::fflush(stdout);
        all_ok = all_ok && out.pass;
    }
    return all_ok ? 0 : 1;
}
