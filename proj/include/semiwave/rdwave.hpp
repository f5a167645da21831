#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "semiwave/birthfuncs.hpp"
#include "semiwave/charspec.hpp"
#include "semiwave/errors.hpp"
#include "semiwave/grid.hpp"
#include "semiwave/linsolve.hpp"

// Nonlinear delayed equation in the co-moving frame,
//   v_t = v_zz - c v_z - v + g(v(t-h, z-ch)),
// profile extraction by relaxation, and the leading-edge / global-stability /
// uniqueness / comparison experiments built on it.

namespace semiwave {

struct ComovingOptions {
    double cfl = 0.4;
    std::size_t min_n_delay = 16;
    Boundary left = Boundary::Dirichlet0;
    Boundary right = Boundary::Neumann0;
    double left_tail_rate = 0.0;  ///< for Boundary::TailExtrapolate
    double guard_max = 1e6;
};

/// Method-of-lines stepper for the co-moving equation. Same delayed-slice
/// policy as the linear stepper: stage slices are ring entries, the half-step
/// slice is their average (interpolate first, then apply g, so ordered data
/// stay ordered). step() returns sup |v_new - v_old|.
class ComovingStepper {
public:
    ComovingStepper(const BirthFunction& bf, double c, double h, const GridSpec& grid,
                    const FieldHistoryFn& init, const ComovingOptions& opts = {})
        : bf_(bf), c_(c), grid_(grid), opts_(opts) {
        grid.validate();
        if (h <= 0.0) throw ConfigError("ComovingStepper: h > 0 required");
        if (grid.periodic) throw ConfigError("ComovingStepper: non-periodic grid required");
        const double dx = grid.dx();
        const double dt_max = opts.cfl * dx * dx;
        auto n_delay = static_cast<std::size_t>(std::ceil(h / dt_max - 1e-12));
        n_delay = std::max(n_delay, opts.min_n_delay);
        ring_ = HistoryField::sample(grid, h, n_delay, init);
        shift_ = detail::ShiftPlan::make(-c * h, dx);
        ext_ = {false, opts.left, opts.right,
                std::exp(-opts.left_tail_rate * dx), 1.0};
        inv_dx2_ = 1.0 / (dx * dx);
        inv_2dx_ = 0.5 / dx;
        const std::size_t n = grid.n;
        for (auto* v : {&g_old_, &g_mid_, &g_new_, &stage_, &k_acc_, &k_sum_, &tmp_})
            v->assign(n, 0.0);
    }

    double dt() const { return ring_.dt(); }
    std::size_t n_delay() const { return ring_.n_delay(); }
    double t() const { return ring_.t(); }
    std::span<const double> field() const { return ring_.newest(); }
    HistoryField& ring() { return ring_; }
    const GridSpec& grid() const { return grid_; }
    const BirthFunction& birth() const { return bf_; }
    double speed() const { return c_; }

    double step() {
        const std::size_t n = grid_.n;
        const double dt = ring_.dt();
        const auto oldest = ring_.slice(0);
        const auto next_old = ring_.slice(1);
        for (std::size_t j = 0; j < n; ++j)
            tmp_[j] = 0.5 * (oldest[j] + next_old[j]);
        // shifted delayed slices, then g applied elementwise
        detail::apply_shift(shift_, oldest, stage_, ext_);
        bf_.eval_array(stage_, g_old_);
        detail::apply_shift(shift_, tmp_, stage_, ext_);
        bf_.eval_array(stage_, g_mid_);
        detail::apply_shift(shift_, next_old, stage_, ext_);
        bf_.eval_array(stage_, g_new_);

        const auto u = ring_.newest();
        compute_rhs(u, g_old_, k_acc_);
        for (std::size_t j = 0; j < n; ++j) k_sum_[j] = k_acc_[j];
        for (std::size_t j = 0; j < n; ++j) stage_[j] = u[j] + 0.5 * dt * k_acc_[j];
        compute_rhs(stage_, g_mid_, k_acc_);
        for (std::size_t j = 0; j < n; ++j) k_sum_[j] += 2.0 * k_acc_[j];
        for (std::size_t j = 0; j < n; ++j) stage_[j] = u[j] + 0.5 * dt * k_acc_[j];
        compute_rhs(stage_, g_mid_, k_acc_);
        for (std::size_t j = 0; j < n; ++j) k_sum_[j] += 2.0 * k_acc_[j];
        for (std::size_t j = 0; j < n; ++j) stage_[j] = u[j] + dt * k_acc_[j];
        compute_rhs(stage_, g_new_, k_acc_);
        for (std::size_t j = 0; j < n; ++j) k_sum_[j] += k_acc_[j];

        const double w = dt / 6.0;
        double sup = 0.0, change = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double v = u[j] + w * k_sum_[j];
            change = std::max(change, std::abs(v - u[j]));
            sup = std::max(sup, std::abs(v));
            tmp_[j] = v;
        }
        if (!(sup < opts_.guard_max))
            throw NumericalError("ComovingStepper: blow-up guard tripped", ring_.t());
        ring_.push(tmp_);
        return change;
    }

    /// Integer-cell recentring; left fill 0, right fill the edge value.
    void shift_cells(long k) {
        ring_.shift_cells(k, 0.0, ring_.newest().back());
    }

private:
    void compute_rhs(std::span<const double> u, const std::vector<double>& gdel,
                     std::vector<double>& k_out) {
        const std::size_t n = grid_.n;
        const double c = c_;
        const double gl =
            detail::stencil_ghost_left(u, opts_.left, ext_.left_step_factor);
        const double gr =
            detail::stencil_ghost_right(u, opts_.right, ext_.right_step_factor);
        auto body = [&](std::size_t j, double um, double uc, double up) {
            return (um - 2.0 * uc + up) * inv_dx2_ - c * (up - um) * inv_2dx_ - uc +
                   gdel[j];
        };
        k_out[0] = body(0, gl, u[0], u[1]);
        for (std::size_t j = 1; j + 1 < n; ++j)
            k_out[j] = body(j, u[j - 1], u[j], u[j + 1]);
        k_out[n - 1] = body(n - 1, u[n - 2], u[n - 1], gr);
    }

    BirthFunction bf_;
    double c_ = 0.0;
    GridSpec grid_;
    ComovingOptions opts_;
    HistoryField ring_;
    detail::ShiftPlan shift_;
    detail::Extension ext_;
    double inv_dx2_ = 0.0, inv_2dx_ = 0.0;
    std::vector<double> g_old_, g_mid_, g_new_, stage_, k_acc_, k_sum_, tmp_;
};

struct ComovingResult {
    std::vector<Slice> outputs;
    std::vector<double> out_times;
    std::vector<double> sup_series;
    double dt = 0.0;
    std::size_t n_delay = 0;
};

inline ComovingResult solve_comoving(const BirthFunction& bf, double c, double h,
                                     const GridSpec& grid, const FieldHistoryFn& init,
                                     double T, const std::vector<double>& out_times,
                                     const ComovingOptions& opts = {}) {
    ComovingStepper st(bf, c, h, grid, init, opts);
    ComovingResult res;
    res.dt = st.dt();
    res.n_delay = st.n_delay();
    const auto n_steps = static_cast<std::size_t>(std::ceil(T / st.dt() - 1e-9));
    const auto want = detail::snap_output_steps(out_times, st.dt(), n_steps);
    auto record = [&](std::size_t k) {
        for (std::size_t i = 0; i < want.size(); ++i) {
            if (want[i] != k) continue;
            const auto u = st.field();
            double sup = 0.0;
            for (double v : u) sup = std::max(sup, std::abs(v));
            res.outputs.push_back({st.t(), std::vector<double>(u.begin(), u.end())});
            res.out_times.push_back(st.t());
            res.sup_series.push_back(sup);
        }
    };
    record(0);
    for (std::size_t k = 1; k <= n_steps; ++k) {
        st.step();
        record(k);
    }
    return res;
}

/// A relaxed (semi-)wavefront profile with its normalization anchor.
struct WaveProfile {
    double c = 0.0, h = 0.0;
    double lambda_c = 0.0;  ///< NaN when c < c(L_g)
    double kappa = 0.0;
    GridSpec grid;
    std::vector<double> samples;
    double anchor = 0.0;  ///< z* with psi(z*) = kappa/2 (first upcrossing)
    bool converged = false;
    bool weighted_converged = false;
    double change_rate = 0.0;           ///< sup |dpsi| / dt at the end
    double weighted_change_rate = 0.0;  ///< same with e^{-lambda_c (z - anchor)}
    double residual_sup = 0.0;          ///< stationary-equation residual, interior
    double relax_time = 0.0;
    bool left_tail_ok = false;
    double left_tail_max = 0.0;
    bool range_ok = false;
    double range_min = 0.0, range_max = 0.0;  ///< over the converged right half
    double zeta1 = 0.0, zeta2 = 0.0;
    bool speed_warning = false;  ///< c <= c(g*_+): existence not guaranteed

    /// 6-point Lagrange read of the raw samples at arbitrary z.
    double value_at(double z) const {
        const double dx = grid.dx();
        const double pos = (z - grid.x_min) / dx;
        long j = static_cast<long>(std::floor(pos));
        j = std::clamp(j - 2, 0L, static_cast<long>(grid.n) - 6);
        const double s = pos - static_cast<double>(j);
        double out = 0.0;
        for (int a = 0; a < 6; ++a) {
            double w = 1.0;
            for (int b2 = 0; b2 < 6; ++b2)
                if (b2 != a) w *= (s - b2) / static_cast<double>(a - b2);
            out += w * samples[static_cast<std::size_t>(j) + static_cast<std::size_t>(a)];
        }
        return out;
    }
    double anchored_value(double offset) const { return value_at(anchor + offset); }
};

namespace detail {

inline double find_anchor(std::span<const double> u, const GridSpec& grid,
                          double level) {
    for (std::size_t j = 0; j + 1 < u.size(); ++j) {
        if (u[j] < level && u[j + 1] >= level) {
            const double f = (level - u[j]) / (u[j + 1] - u[j]);
            return grid.x(j) + f * grid.dx();
        }
    }
    return grid.x(u.size() / 2);
}

}  // namespace detail

struct ProfileOptions {
    double max_time = 240.0;
    double rate_tol = 1e-8;       ///< sup|dpsi|/dt convergence threshold
    int check_every = 20;         ///< steps between convergence checks
    double range_tol = 1e-3;
    double recenter_threshold = 3.0;
    ComovingOptions solver;
};

/// Discrete leading-tail decay rate of the co-moving stencil linearized at
/// the zero state: the growth factor f = e^{lambda dx} solves the grid
/// dispersion relation, so a left boundary extrapolating with 1/f keeps the
/// discrete tail mode exactly steady. Using the continuum lambda1 instead
/// leaves an O(dx^2) mismatch that acts as a permanent front-speed source.
inline double discrete_tail_rate(double c, double h, double gp0, const GridSpec& grid,
                                 double fallback) {
    if (!(gp0 > 1.0)) return fallback;
    const double dx = grid.dx();
    const auto sp = detail::ShiftPlan::make(-c * h, dx);
    const double w2 = sp.interpolated ? sp.frac : 0.0;
    const double w1 = 1.0 - w2;
    auto D = [&](double f) {
        return (f - 2.0 + 1.0 / f) / (dx * dx) - c * (f - 1.0 / f) / (2.0 * dx) -
               1.0 +
               gp0 * (w1 * std::pow(f, static_cast<double>(sp.cells)) +
                      w2 * std::pow(f, static_cast<double>(sp.cells) + 1.0));
    };
    const double lam_star = detail::speed_E_max(c, gp0, h).second;
    double lo = 1.0 + 1e-12, hi = std::exp(lam_star * dx);
    if (!(D(lo) > 0.0) || !(D(hi) < 0.0)) return fallback;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (D(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return std::log(0.5 * (lo + hi)) / dx;
}

/// Monotone step datum 0 -> kappa whose leading tail decays exactly like
/// e^{lambda z}. For subtangential birth functions steep data select the
/// minimal front speed, so relaxing toward a speed-c profile requires the
/// matching tail exponent lambda = lambda1(c); the logistic shape provides it
/// with the kappa/2 crossing at z = 0.
inline FieldHistoryFn logistic_front_datum(double kappa, double lambda) {
    return [kappa, lambda](double, double z) {
        return kappa / (1.0 + std::exp(-lambda * z));
    };
}

/// Same tails as the logistic datum, but linearly reshaped on [-w, w]; used
/// as a second, distinct member of the same (ic)-class for uniqueness runs.
inline FieldHistoryFn reshaped_front_datum(double kappa, double lambda, double w) {
    const auto base = logistic_front_datum(kappa, lambda);
    return [base, w](double s, double z) {
        if (z <= -w || z >= w) return base(s, z);
        const double lo = base(s, -w), hi = base(s, w);
        return lo + (hi - lo) * (z + w) / (2.0 * w);
    };
}

/// Relaxes a monotone step datum (0 left, kappa right) to the steady profile
/// of the co-moving equation. The anchor is tracked every check; when it
/// drifts past the threshold the whole history ring is recentred by an
/// integer number of cells, which keeps the evolution exactly translation
/// covariant. The convergence residual is re-verified afterwards by direct
/// substitution into the stationary equation.
inline WaveProfile compute_profile(const BirthFunction& bf, double c, double h,
                                   const GridSpec& grid, const ProfileOptions& opts = {},
                                   const FieldHistoryFn& init_override = nullptr) {
    const double kap = kappa(bf);
    const double L_g = lipschitz_global(bf);

    WaveProfile prof;
    prof.c = c;
    prof.h = h;
    prof.kappa = kap;
    prof.grid = grid;
    prof.lambda_c = std::numeric_limits<double>::quiet_NaN();
    try {
        prof.lambda_c = lambda_interval(c, L_g, h).lambda1;
    } catch (const NoRealRootError&) {
    }
    double gstar = L_g;
    try {
        const IntervalData d = interval_data(bf);
        prof.zeta1 = d.zeta1;
        prof.zeta2 = d.zeta2;
        gstar = d.g_star_plus;
    } catch (const std::domain_error&) {
        prof.zeta1 = 0.0;
        prof.zeta2 = kap * 2.0;
    }
    try {
        prof.speed_warning = c <= speed_threshold(gstar, h);
    } catch (const std::domain_error&) {
        prof.speed_warning = false;
    }

    FieldHistoryFn init = init_override;
    if (!init) {
        init = std::isfinite(prof.lambda_c)
                   ? logistic_front_datum(kap, prof.lambda_c)
                   : [kap](double, double z) {
                         return 0.5 * kap * (1.0 + std::tanh(0.5 * z));
                     };
    }

    ComovingOptions sopts = opts.solver;
    if (sopts.guard_max == 1e6)
        sopts.guard_max = std::max(prof.zeta2, kap) + std::max(1.0, 0.1 * kap);
    // a zero-Dirichlet cut of the exponential tail feeds a deficit that
    // travels to the front and erodes it; extrapolating the tail through the
    // boundary keeps the whole-line profile a genuine steady state
    if (std::isfinite(prof.lambda_c) && sopts.left == Boundary::Dirichlet0) {
        sopts.left = Boundary::TailExtrapolate;
        sopts.left_tail_rate =
            discrete_tail_rate(c, h, bf.deriv(0.0), grid, prof.lambda_c);
    }
    ComovingStepper st(bf, c, h, grid, init, sopts);

    const double dt = st.dt();
    const double anchor0 = detail::find_anchor(st.field(), grid, 0.5 * kap);
    double change = 0.0;
    std::vector<double> prev(st.field().begin(), st.field().end());
    bool plain_ok = false, weighted_ok = false;
    const auto max_steps =
        static_cast<std::size_t>(std::ceil(opts.max_time / dt));
    for (std::size_t k = 1; k <= max_steps; ++k) {
        change = st.step();
        if (k % static_cast<std::size_t>(opts.check_every) != 0 && k != max_steps)
            continue;
        const auto u = st.field();
        const double anchor = detail::find_anchor(u, grid, 0.5 * kap);
        prof.change_rate = change / dt;
        if (std::isfinite(prof.lambda_c)) {
            prev.assign(u.begin(), u.end());
            st.step();
            const auto u2 = st.field();
            double wrate = 0.0;
            for (std::size_t j = 0; j < grid.n; ++j) {
                const double z = grid.x(j);
                if (z > anchor) continue;
                const double w = std::exp(-prof.lambda_c * (z - anchor));
                wrate = std::max(wrate, w * std::abs(u2[j] - prev[j]));
            }
            prof.weighted_change_rate = wrate / dt;
            weighted_ok = prof.weighted_change_rate < opts.rate_tol;
        }
        plain_ok = prof.change_rate < opts.rate_tol;
        if (plain_ok) break;
        if (std::abs(anchor - anchor0) > opts.recenter_threshold) {
            const long cells = -static_cast<long>(
                std::llround((anchor - anchor0) / grid.dx()));
            st.shift_cells(cells);
        }
    }
    prof.converged = plain_ok;
    prof.weighted_converged = weighted_ok;
    prof.relax_time = st.t();
    prof.samples.assign(st.field().begin(), st.field().end());
    prof.anchor = detail::find_anchor(prof.samples, grid, 0.5 * kap);

    // independent substitution check of the stationary equation
    {
        const double dx = grid.dx();
        const auto shift = detail::ShiftPlan::make(-c * h, dx);
        std::vector<double> shifted(grid.n), gsh(grid.n);
        const detail::Extension ext{false, sopts.left, sopts.right,
                                    std::exp(-sopts.left_tail_rate * dx), 1.0};
        detail::apply_shift(shift, prof.samples, shifted, ext);
        bf.eval_array(shifted, gsh);
        const auto skip_left =
            static_cast<std::size_t>(std::ceil(c * h / dx)) + 2;
        double worst = 0.0;
        for (std::size_t j = std::max<std::size_t>(skip_left, 1); j + 2 < grid.n; ++j) {
            const double lap =
                (prof.samples[j - 1] - 2.0 * prof.samples[j] + prof.samples[j + 1]) /
                (dx * dx);
            const double adv =
                c * (prof.samples[j + 1] - prof.samples[j - 1]) * 0.5 / dx;
            const double r = lap - adv - prof.samples[j] + gsh[j];
            worst = std::max(worst, std::abs(r));
        }
        prof.residual_sup = worst;
    }

    const auto tail_cells = grid.n / 10;
    prof.left_tail_max = 0.0;
    for (std::size_t j = 0; j < tail_cells; ++j)
        prof.left_tail_max = std::max(prof.left_tail_max, std::abs(prof.samples[j]));
    prof.left_tail_ok = prof.left_tail_max < 1e-8 * kap;

    const double z_lo = prof.anchor + 0.25 * (grid.x_max - prof.anchor);
    const double z_hi = grid.x_max - 2.0;
    prof.range_min = std::numeric_limits<double>::infinity();
    prof.range_max = -prof.range_min;
    for (std::size_t j = 0; j < grid.n; ++j) {
        const double z = grid.x(j);
        if (z < z_lo || z > z_hi) continue;
        prof.range_min = std::min(prof.range_min, prof.samples[j]);
        prof.range_max = std::max(prof.range_max, prof.samples[j]);
    }
    prof.range_ok = prof.range_min >= prof.zeta1 - opts.range_tol &&
                    prof.range_max <= prof.zeta2 + opts.range_tol;
    return prof;
}

/// Perturbation of a profile, bounded by q_amp * eta_b(z) with
/// eta_b(z) = min(1, e^{lambda_c (z - b)}).
struct PerturbationSpec {
    enum class Shape { EtaWeighted, CompactBump, TailSeeded };
    Shape shape = Shape::CompactBump;
    double q_amp = 0.1;
    double b = 0.0;       ///< eta offset (absolute z)
    double center = 2.0;  ///< bump centre
    double width = 2.0;   ///< bump half-width
    double lambda_c = 0.0;
    double sign = 1.0;

    double eval(double z) const {
        switch (shape) {
            case Shape::EtaWeighted:
                return sign * q_amp *
                       std::min(1.0, std::exp(lambda_c * (z - b)));
            case Shape::TailSeeded:
            case Shape::CompactBump: {
                const double r = (z - center) / width;
                if (std::abs(r) >= 1.0) return 0.0;
                return sign * q_amp * std::exp(1.0 - 1.0 / (1.0 - r * r));
            }
        }
        return 0.0;
    }
};

struct LeadingEdgeRow {
    double t = 0.0;
    double weighted_sup = 0.0;  ///< sup_z xi |v - psi|
    double linear_sup = 0.0;    ///< sup_z u
    double plain_sup = 0.0;     ///< sup_z |v - psi|
    double worst_ratio = 0.0;   ///< max_z xi|v-psi| / u (where meaningful)
};

struct LeadingEdgeReport {
    double lambda_c = 0.0;
    LinearCoefficients linear;  ///< the majorant equation actually run
    double gamma = 0.0;         ///< decay root of that equation
    bool majorization_ok = true;
    double worst_ratio = 0.0;
    double worst_t = 0.0, worst_z = 0.0;
    double rel_tol = 1e-3;
    std::vector<LeadingEdgeRow> rows;
    DecayFit weighted_fit;  ///< pure-exponential fit of the weighted sup
    bool fit_valid = false;
};

/// Theorem-style weighted majorization: evolve psi (unperturbed) and
/// v = psi + perturbation under the nonlinear equation, and in lockstep the
/// linear majorant u_t = u_zz + m u_z + p u + q u(t-h, z-ch) with
/// m = 2 lambda_c - c, p = lambda_c^2 - c lambda_c - 1, q = L_g e^{-lambda_c c h},
/// started from xi_c |v0 - psi0|. Then xi_c |v - psi| <= u must hold at every
/// output sample. The weight is normalized at the profile anchor, which
/// rescales both sides identically.
inline LeadingEdgeReport experiment_leading_edge(const WaveProfile& prof,
                                                 const BirthFunction& bf,
                                                 const PerturbationSpec& pert,
                                                 double T, double out_every = 0.25,
                                                 double lambda_override = 0.0,
                                                 const ComovingOptions& sopts = {}) {
    LeadingEdgeReport rep;
    const double c = prof.c, h = prof.h;
    const double L_g = lipschitz_global(bf);
    rep.lambda_c = lambda_override > 0.0 ? lambda_override : prof.lambda_c;
    if (!std::isfinite(rep.lambda_c))
        throw ConfigError("experiment_leading_edge: no admissible lambda_c (c < c(L_g))");
    const double lam = rep.lambda_c;
    rep.linear.m = 2.0 * lam - c;
    rep.linear.p = lam * lam - c * lam - 1.0;
    rep.linear.q = L_g * std::exp(-lam * c * h);
    rep.linear.d = -c * h;
    rep.linear.h = h;
    rep.gamma = gamma_root({0.0, rep.linear.p, rep.linear.q, 0.0, h}).gamma;

    const double z0 = prof.anchor;
    auto xi = [lam, z0](double z) { return std::exp(-lam * (z - z0)); };

    const GridSpec& grid = prof.grid;
    const WaveProfile* pp = &prof;
    FieldHistoryFn psi_init = [pp](double, double z) { return pp->value_at(z); };
    FieldHistoryFn v_init = [pp, &pert](double, double z) {
        return pp->value_at(z) + pert.eval(z);
    };
    FieldHistoryFn u_init = [&pert, &xi](double, double z) {
        return xi(z) * std::abs(pert.eval(z));
    };

    ComovingOptions copts = sopts;
    if (copts.guard_max == 1e6) copts.guard_max = std::max(prof.zeta2, prof.kappa) + 1.0;
    if (std::isfinite(prof.lambda_c) && copts.left == Boundary::Dirichlet0) {
        copts.left = Boundary::TailExtrapolate;
        copts.left_tail_rate =
            discrete_tail_rate(c, h, bf.deriv(0.0), grid, prof.lambda_c);
    }
    ComovingStepper sv(bf, c, h, grid, v_init, copts);
    ComovingStepper sp(bf, c, h, grid, psi_init, copts);
    FdOptions lopts;
    lopts.left = Boundary::Dirichlet0;
    lopts.right = Boundary::Dirichlet0;
    FdStepper su(rep.linear, grid, u_init, lopts);
    if (std::abs(sv.dt() - su.dt()) > 1e-15)
        throw ConfigError("experiment_leading_edge: stepper dt mismatch");

    const double dt = sv.dt();
    const auto n_steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
    const auto out_stride = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(out_every / dt)));

    std::vector<double> fit_t, fit_w;
    auto sample = [&](std::size_t /*k*/) {
        const auto v = sv.field();
        const auto psi = sp.field();
        const auto u = su.field();
        LeadingEdgeRow row;
        row.t = sv.t();
        double sup_u = 0.0;
        for (double uv : u) sup_u = std::max(sup_u, uv);
        const double floor = 1e-12 * (pert.q_amp + sup_u);
        for (std::size_t j = 0; j < grid.n; ++j) {
            const double lhs = xi(grid.x(j)) * std::abs(v[j] - psi[j]);
            const double rhs = u[j];
            row.weighted_sup = std::max(row.weighted_sup, lhs);
            row.plain_sup = std::max(row.plain_sup, std::abs(v[j] - psi[j]));
            const double ratio = lhs / (rhs * (1.0 + rep.rel_tol) + floor);
            if (ratio > row.worst_ratio) row.worst_ratio = ratio;
            if (ratio > rep.worst_ratio) {
                rep.worst_ratio = ratio;
                rep.worst_t = row.t;
                rep.worst_z = grid.x(j);
            }
        }
        row.linear_sup = sup_u;
        if (row.worst_ratio > 1.0) rep.majorization_ok = false;
        if (row.t > 0.25 * T && row.weighted_sup > 0.0) {
            fit_t.push_back(row.t);
            fit_w.push_back(row.weighted_sup);
        }
        rep.rows.push_back(row);
    };

    for (std::size_t k = 1; k <= n_steps; ++k) {
        sv.step();
        sp.step();
        su.step();
        if (k % out_stride == 0 || k == n_steps) sample(k);
    }
    if (fit_t.size() >= 8) {
        // pure exponential fit: log W = rate t + const
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < fit_t.size(); ++i) {
            sx += fit_t[i];
            sy += std::log(fit_w[i]);
            sxx += fit_t[i] * fit_t[i];
            sxy += fit_t[i] * std::log(fit_w[i]);
        }
        const double n = static_cast<double>(fit_t.size());
        rep.weighted_fit.rate = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        rep.weighted_fit.amplitude = (sy - rep.weighted_fit.rate * sx) / n;
        rep.weighted_fit.n_samples = fit_t.size();
        rep.fit_valid = true;
    }
    return rep;
}

struct GlobalStabilityRow {
    double t = 0.0;
    double D = 0.0;         ///< sup_z |v - psi|
    double envelope = 0.0;  ///< C q e^{-gamma0 t}
};

struct GlobalStabilityReport {
    double gamma0 = 0.0;
    double lambda_c = 0.0;  ///< argmax lambda for gamma0
    double L_I = 0.0;
    double C = 0.0;  ///< fixed from the t = 0 ratio
    bool envelope_ok = true;
    double worst_ratio = 0.0;
    double worst_t = 0.0;
    double fitted_tail_rate = 0.0;
    bool rate_ok = true;  ///< fitted <= -0.9 gamma0 (vacuous when gamma0 = 0)
    bool profile_in_IK = true;
    double m_K = 0.0, K = 0.0;
    std::vector<GlobalStabilityRow> rows;
};

/// Global-stability experiment: gamma0 from the rate conditions (maximized
/// over the admissible weight exponent), then checks
/// D(t) = sup|v - psi| <= C q e^{-gamma0 t} with C frozen at its t = 0 value,
/// fits the tail rate, and checks the profile range against I_K = [m_K, K].
inline GlobalStabilityReport experiment_global_stability(
    const WaveProfile& prof, const BirthFunction& bf, const PerturbationSpec& pert,
    double T, double out_every = 0.1, const ComovingOptions& sopts = {}) {
    GlobalStabilityReport rep;
    const double c = prof.c, h = prof.h;
    const double L_g = lipschitz_global(bf);
    const IntervalData idata = interval_data(bf);
    rep.L_I = idata.L_I;
    rep.m_K = idata.m_K;
    rep.K = idata.K;
    rep.gamma0 = gamma0_best(c, L_g, rep.L_I, h, &rep.lambda_c);

    const GridSpec& grid = prof.grid;
    const WaveProfile* pp = &prof;
    FieldHistoryFn psi_init = [pp](double, double z) { return pp->value_at(z); };
    FieldHistoryFn v_init = [pp, &pert](double, double z) {
        return pp->value_at(z) + pert.eval(z);
    };
    ComovingOptions copts = sopts;
    if (copts.guard_max == 1e6) copts.guard_max = std::max(prof.zeta2, prof.kappa) + 1.0;
    if (std::isfinite(prof.lambda_c) && copts.left == Boundary::Dirichlet0) {
        copts.left = Boundary::TailExtrapolate;
        copts.left_tail_rate =
            discrete_tail_rate(c, h, bf.deriv(0.0), grid, prof.lambda_c);
    }
    ComovingStepper sv(bf, c, h, grid, v_init, copts);
    ComovingStepper sp(bf, c, h, grid, psi_init, copts);

    const double dt = sv.dt();
    const auto n_steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
    const auto out_stride = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(out_every / dt)));

    auto D_now = [&]() {
        const auto v = sv.field();
        const auto psi = sp.field();
        double d = 0.0;
        for (std::size_t j = 0; j < grid.n; ++j)
            d = std::max(d, std::abs(v[j] - psi[j]));
        return d;
    };
    const double D0 = D_now();
    rep.C = D0 / pert.q_amp;
    rep.rows.push_back({0.0, D0, rep.C * pert.q_amp});

    std::vector<double> fit_t, fit_d;
    for (std::size_t k = 1; k <= n_steps; ++k) {
        sv.step();
        sp.step();
        if (k % out_stride != 0 && k != n_steps) continue;
        GlobalStabilityRow row;
        row.t = sv.t();
        row.D = D_now();
        row.envelope = rep.C * pert.q_amp * std::exp(-rep.gamma0 * row.t);
        const double ratio = row.D / row.envelope;
        if (ratio > rep.worst_ratio) {
            rep.worst_ratio = ratio;
            rep.worst_t = row.t;
        }
        if (row.t > 0.35 * T && row.D > 0.0) {
            fit_t.push_back(row.t);
            fit_d.push_back(std::log(row.D));
        }
        rep.rows.push_back(row);
    }
    rep.envelope_ok = rep.worst_ratio <= 1.0 + 1e-6;

    if (fit_t.size() >= 8) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < fit_t.size(); ++i) {
            sx += fit_t[i];
            sy += fit_d[i];
            sxx += fit_t[i] * fit_t[i];
            sxy += fit_t[i] * fit_d[i];
        }
        const double n = static_cast<double>(fit_t.size());
        rep.fitted_tail_rate = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
    rep.rate_ok = rep.gamma0 <= 0.0 || rep.fitted_tail_rate <= -0.9 * rep.gamma0;
    rep.profile_in_IK = prof.range_min >= rep.m_K - 1e-3 &&
                        prof.range_max <= rep.K + 1e-3;
    return rep;
}

struct UniquenessReport {
    bool conclusive = false;
    bool hypothesis_ok = true;  ///< weighted initial gap integrable at -inf
    double sup_distance = 0.0;  ///< anchored-profile sup distance
    double anchor_a = 0.0, anchor_b = 0.0;
    bool converged_a = false, converged_b = false;
};

/// Relaxes two step-like data to profiles and compares them after anchoring
/// at the kappa/2 crossing. Fronts satisfying the weighted initial condition
/// must coincide; data with different leading-edge exponents are flagged.
inline UniquenessReport experiment_uniqueness(const BirthFunction& bf, double c,
                                              double h, const GridSpec& grid,
                                              const FieldHistoryFn& init_a,
                                              const FieldHistoryFn& init_b,
                                              const ProfileOptions& opts = {}) {
    UniquenessReport rep;
    const WaveProfile pa = compute_profile(bf, c, h, grid, opts, init_a);
    const WaveProfile pb = compute_profile(bf, c, h, grid, opts, init_b);
    rep.converged_a = pa.converged;
    rep.converged_b = pb.converged;
    rep.anchor_a = pa.anchor;
    rep.anchor_b = pb.anchor;

    if (std::isfinite(pa.lambda_c)) {
        // leading-edge hypothesis: xi_c |a0 - b0| must not grow toward -inf
        double left = 0.0, mid = 0.0;
        for (std::size_t j = 0; j < grid.n; ++j) {
            const double z = grid.x(j);
            const double w = std::exp(-pa.lambda_c * (z - pa.anchor)) *
                             std::abs(init_a(0.0, z) - init_b(0.0, z));
            if (j < grid.n / 10)
                left = std::max(left, w);
            else if (j < grid.n / 2)
                mid = std::max(mid, w);
        }
        rep.hypothesis_ok = left <= std::max(mid, 1e-12) * 1.001;
    }
    if (!pa.converged || !pb.converged) return rep;

    const double lo = std::max(grid.x_min - pa.anchor, grid.x_min - pb.anchor) + 4.0;
    const double hi = std::min(grid.x_max - pa.anchor, grid.x_max - pb.anchor) - 4.0;
    double worst = 0.0;
    for (double off = lo; off <= hi; off += grid.dx())
        worst = std::max(worst,
                         std::abs(pa.anchored_value(off) - pb.anchored_value(off)));
    rep.sup_distance = worst;
    rep.conclusive = true;
    return rep;
}

struct ComparisonReport {
    bool pre_ok = false;      ///< g1 <= g2 and one of them nondecreasing on range
    std::string pre_failure;
    bool order_ok = true;     ///< v1 <= v2 + tol at every grid point and step
    double worst_violation = 0.0;
    double worst_t = 0.0;
    double final_sup_v2 = 0.0;
    double tol = 1e-9;
};

/// Order preservation: v1(0) <= v2(0) pointwise and g1 <= g2 with one of them
/// nondecreasing implies v1 <= v2 for all time. Checked at every step.
inline ComparisonReport check_comparison(const BirthFunction& g1,
                                         const BirthFunction& g2, double c, double h,
                                         const GridSpec& grid,
                                         const FieldHistoryFn& init1,
                                         const FieldHistoryFn& init2, double T,
                                         double range_hint = 0.0,
                                         const ComovingOptions& sopts = {}) {
    ComparisonReport rep;
    double umax = 0.0;
    for (std::size_t j = 0; j < grid.n; ++j)
        umax = std::max({umax, init1(0.0, grid.x(j)), init2(0.0, grid.x(j))});
    umax = std::max(std::max(umax * 1.02, range_hint), 1e-6);
    bool le = true, mono1 = true, mono2 = true;
    double prev1 = g1(0.0), prev2 = g2(0.0);
    constexpr int N = 2000;
    for (int i = 0; i <= N; ++i) {
        const double u = umax * i / N;
        const double a = g1(u), b = g2(u);
        if (a > b + 1e-12) le = false;
        if (a < prev1 - 1e-12) mono1 = false;
        if (b < prev2 - 1e-12) mono2 = false;
        prev1 = a;
        prev2 = b;
    }
    if (!le)
        rep.pre_failure = "g1 <= g2 fails on the sampled range";
    else if (!mono1 && !mono2)
        rep.pre_failure = "neither g1 nor g2 is nondecreasing on the sampled range";
    rep.pre_ok = rep.pre_failure.empty();
    if (!rep.pre_ok) return rep;

    ComovingOptions copts = sopts;
    if (copts.guard_max == 1e6) copts.guard_max = umax * 4.0 + 10.0;
    ComovingStepper s1(g1, c, h, grid, init1, copts);
    ComovingStepper s2(g2, c, h, grid, init2, copts);
    const auto n_steps =
        static_cast<std::size_t>(std::ceil(T / s1.dt() - 1e-9));
    for (std::size_t k = 1; k <= n_steps; ++k) {
        s1.step();
        s2.step();
        const auto v1 = s1.field();
        const auto v2 = s2.field();
        for (std::size_t j = 0; j < grid.n; ++j) {
            const double excess = v1[j] - v2[j];
            if (excess > rep.worst_violation) {
                rep.worst_violation = excess;
                rep.worst_t = s1.t();
            }
        }
    }
    rep.order_ok = rep.worst_violation <= rep.tol;
    for (double v : s2.field()) rep.final_sup_v2 = std::max(rep.final_sup_v2, v);
    return rep;
}

}  // namespace semiwave
