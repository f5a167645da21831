#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "semiwave/charspec.hpp"
#include "semiwave/detail/fft.hpp"
#include "semiwave/errors.hpp"
#include "semiwave/grid.hpp"
#include "semiwave/halanay.hpp"

// Linear delayed evolution u_t = u_xx + m u_x + p u + q u(t-h, x+d), solved
// by two independent backends: method of lines with central differences, and
// a Fourier backend that integrates every mode as a scalar delay ODE.

namespace semiwave {

/// TailExtrapolate continues the field past the boundary as a decaying
/// exponential u0 e^{-rate * distance}; it makes an exponential front tail an
/// exact equilibrium of the boundary stencil, emulating the whole line.
enum class Boundary { Dirichlet0, Neumann0, TailExtrapolate };

/// Space-time initial datum u(s, x) for s in [-h, 0].
using FieldHistoryFn = std::function<double(double s, double x)>;

struct FdOptions {
    double cfl = 0.4;              ///< dt <= cfl * dx^2
    std::size_t min_n_delay = 16;
    double dt_override = 0.0;      ///< if > 0, must divide h and satisfy the CFL
    Boundary left = Boundary::Dirichlet0;
    Boundary right = Boundary::Dirichlet0;
    double left_tail_rate = 0.0;   ///< decay rate for TailExtrapolate sides
    double right_tail_rate = 0.0;
    double guard_max = 1e12;
};

struct Slice {
    double t = 0.0;
    std::vector<double> u;
};

struct LinearSolveResult {
    std::vector<Slice> outputs;        ///< at the snapped output times
    std::vector<double> out_times;     ///< actual (step-aligned) times
    std::vector<double> sup_series;    ///< sup_x |u| at out_times
    std::vector<double> mass_series;   ///< sum u dx at out_times
    double dt = 0.0;
    std::size_t n_delay = 0;
    double C_u0 = 0.0;                 ///< sup_s of the sampled history L1 norm
    bool interpolated_shift = false;
    bool support_warning = false;
    std::string warning;
};

namespace detail {

/// Delayed-term spatial shift by d: exact cell roll when d/dx is integral,
/// linear interpolation between neighbours otherwise. Out-of-range reads use
/// the boundary extension (wrap, zero, or mirror edge).
struct ShiftPlan {
    long cells = 0;
    double frac = 0.0;
    bool interpolated = false;

    static ShiftPlan make(double d, double dx) {
        ShiftPlan s;
        const double raw = d / dx;
        const double r = std::round(raw);
        if (std::abs(raw - r) <= 1e-9) {
            s.cells = static_cast<long>(r);
        } else {
            s.cells = static_cast<long>(std::floor(raw));
            s.frac = raw - std::floor(raw);
            s.interpolated = true;
        }
        return s;
    }
};

/// Boundary extension policy for ghost and shifted reads. step_factor is
/// e^{-rate * dx} for the tail extrapolation.
struct Extension {
    bool periodic = false;
    Boundary left = Boundary::Dirichlet0;
    Boundary right = Boundary::Dirichlet0;
    double left_step_factor = 0.0;
    double right_step_factor = 0.0;
};

inline double read_extended(std::span<const double> u, long j, const Extension& ext) {
    const long n = static_cast<long>(u.size());
    if (ext.periodic) {
        j %= n;
        if (j < 0) j += n;
        return u[static_cast<std::size_t>(j)];
    }
    if (j < 0) {
        switch (ext.left) {
            case Boundary::Neumann0: return u[0];
            case Boundary::TailExtrapolate:
                return u[0] * std::pow(ext.left_step_factor, static_cast<double>(-j));
            default: return 0.0;
        }
    }
    if (j >= n) {
        switch (ext.right) {
            case Boundary::Neumann0: return u[static_cast<std::size_t>(n - 1)];
            case Boundary::TailExtrapolate:
                return u[static_cast<std::size_t>(n - 1)] *
                       std::pow(ext.right_step_factor, static_cast<double>(j - n + 1));
            default: return 0.0;
        }
    }
    return u[static_cast<std::size_t>(j)];
}

/// Ghost values for the second-order stencil (mirror for Neumann).
inline double stencil_ghost_left(std::span<const double> u, Boundary b, double f) {
    switch (b) {
        case Boundary::Neumann0: return u[1];
        case Boundary::TailExtrapolate: return u[0] * f;
        default: return 0.0;
    }
}
inline double stencil_ghost_right(std::span<const double> u, Boundary b, double f) {
    switch (b) {
        case Boundary::Neumann0: return u[u.size() - 2];
        case Boundary::TailExtrapolate: return u[u.size() - 1] * f;
        default: return 0.0;
    }
}

inline void apply_shift(const ShiftPlan& s, std::span<const double> in,
                        std::span<double> out, const Extension& ext) {
    const long n = static_cast<long>(in.size());
    if (!s.interpolated) {
        for (long j = 0; j < n; ++j)
            out[static_cast<std::size_t>(j)] = read_extended(in, j + s.cells, ext);
        return;
    }
    const double w1 = 1.0 - s.frac, w2 = s.frac;
    for (long j = 0; j < n; ++j) {
        const double a = read_extended(in, j + s.cells, ext);
        const double b = read_extended(in, j + s.cells + 1, ext);
        out[static_cast<std::size_t>(j)] = w1 * a + w2 * b;
    }
}

}  // namespace detail

/// Method-of-lines stepper for the linear equation. One RK4 step advances the
/// ring buffer by dt = h/n_delay; the two delayed stage slices are stored
/// ring entries and the half-step slice is their average, so delayed reads
/// never interpolate across more than one buffer interval.
class FdStepper {
public:
    FdStepper(const LinearCoefficients& coeffs, const GridSpec& grid,
              const FieldHistoryFn& init, const FdOptions& opts = {})
        : c_(coeffs), grid_(grid), opts_(opts) {
        grid.validate();
        if (coeffs.h <= 0.0) throw ConfigError("FdStepper: h > 0 required");
        const double dx = grid.dx();
        const double dt_max = opts.cfl * dx * dx;
        std::size_t n_delay;
        if (opts.dt_override > 0.0) {
            const double ratio = coeffs.h / opts.dt_override;
            n_delay = static_cast<std::size_t>(std::llround(ratio));
            if (n_delay < 1 || std::abs(ratio - static_cast<double>(n_delay)) > 1e-9)
                throw ConfigError("FdStepper: dt_override must divide h");
            if (opts.dt_override > dt_max * (1.0 + 1e-12))
                throw ConfigError("FdStepper: CFL violation, dt > cfl*dx^2");
        } else {
            n_delay = static_cast<std::size_t>(std::ceil(coeffs.h / dt_max - 1e-12));
            n_delay = std::max<std::size_t>(n_delay, opts.min_n_delay);
        }
        ring_ = HistoryField::sample(grid, coeffs.h, n_delay, init);
        shift_ = detail::ShiftPlan::make(coeffs.d, dx);
        ext_ = {grid.periodic, opts.left, opts.right,
                std::exp(-opts.left_tail_rate * dx),
                std::exp(-opts.right_tail_rate * dx)};
        inv_dx2_ = 1.0 / (dx * dx);
        inv_2dx_ = 0.5 / dx;
        const std::size_t n = grid.n;
        for (auto* v : {&s_old_, &s_mid_, &s_new_, &stage_, &k_acc_, &k_sum_, &tmp_})
            v->assign(n, 0.0);
    }

    double dt() const { return ring_.dt(); }
    std::size_t n_delay() const { return ring_.n_delay(); }
    double t() const { return ring_.t(); }
    std::span<const double> field() const { return ring_.newest(); }
    const HistoryField& ring() const { return ring_; }
    bool interpolated_shift() const { return shift_.interpolated; }

    /// sup_s || u(s,.) ||_{L1} over the sampled history.
    double history_l1_sup() const {
        double best = 0.0;
        for (std::size_t j = 0; j <= ring_.n_delay(); ++j) {
            double acc = 0.0;
            for (double v : ring_.slice(j)) acc += std::abs(v);
            best = std::max(best, acc * grid_.dx());
        }
        return best;
    }

    void step() {
        const std::size_t n = grid_.n;
        const double dt = ring_.dt();
        const auto oldest = ring_.slice(0);
        const auto next_old = ring_.slice(1);
        for (std::size_t j = 0; j < n; ++j)
            tmp_[j] = 0.5 * (oldest[j] + next_old[j]);
        detail::apply_shift(shift_, oldest, s_old_, ext_);
        detail::apply_shift(shift_, tmp_, s_mid_, ext_);
        detail::apply_shift(shift_, next_old, s_new_, ext_);

        const auto u = ring_.newest();
        compute_rhs(u, s_old_, k_acc_);                                   // k1
        for (std::size_t j = 0; j < n; ++j) k_sum_[j] = k_acc_[j];
        for (std::size_t j = 0; j < n; ++j) stage_[j] = u[j] + 0.5 * dt * k_acc_[j];
        compute_rhs(stage_, s_mid_, k_acc_);                              // k2
        for (std::size_t j = 0; j < n; ++j) k_sum_[j] += 2.0 * k_acc_[j];
        for (std::size_t j = 0; j < n; ++j) stage_[j] = u[j] + 0.5 * dt * k_acc_[j];
        compute_rhs(stage_, s_mid_, k_acc_);                              // k3
        for (std::size_t j = 0; j < n; ++j) k_sum_[j] += 2.0 * k_acc_[j];
        for (std::size_t j = 0; j < n; ++j) stage_[j] = u[j] + dt * k_acc_[j];
        compute_rhs(stage_, s_new_, k_acc_);                              // k4
        for (std::size_t j = 0; j < n; ++j) k_sum_[j] += k_acc_[j];

        const double w = dt / 6.0;
        double sup = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            tmp_[j] = u[j] + w * k_sum_[j];
            sup = std::max(sup, std::abs(tmp_[j]));
        }
        if (!(sup < opts_.guard_max))
            throw NumericalError("FdStepper: blow-up guard tripped", ring_.t());
        ring_.push(tmp_);
    }

private:
    void compute_rhs(std::span<const double> u, const std::vector<double>& delayed,
                     std::vector<double>& k_out) {
        const std::size_t n = grid_.n;
        const double m = c_.m, p = c_.p, q = c_.q;
        auto body = [&](std::size_t j, double um, double uc, double up) {
            const double lap = (um - 2.0 * uc + up) * inv_dx2_;
            const double adv = (up - um) * inv_2dx_ * m;
            return lap + adv + p * uc + q * delayed[j];
        };
        if (grid_.periodic) {
            k_out[0] = body(0, u[n - 1], u[0], u[1]);
            for (std::size_t j = 1; j + 1 < n; ++j)
                k_out[j] = body(j, u[j - 1], u[j], u[j + 1]);
            k_out[n - 1] = body(n - 1, u[n - 2], u[n - 1], u[0]);
        } else {
            const double gl = detail::stencil_ghost_left(u, opts_.left,
                                                         ext_.left_step_factor);
            const double gr = detail::stencil_ghost_right(u, opts_.right,
                                                          ext_.right_step_factor);
            k_out[0] = body(0, gl, u[0], u[1]);
            for (std::size_t j = 1; j + 1 < n; ++j)
                k_out[j] = body(j, u[j - 1], u[j], u[j + 1]);
            k_out[n - 1] = body(n - 1, u[n - 2], u[n - 1], gr);
        }
    }

    LinearCoefficients c_;
    GridSpec grid_;
    FdOptions opts_;
    HistoryField ring_;
    detail::ShiftPlan shift_;
    detail::Extension ext_;
    double inv_dx2_ = 0.0, inv_2dx_ = 0.0;
    std::vector<double> s_old_, s_mid_, s_new_, stage_, k_acc_, k_sum_, tmp_;
};

namespace detail {

/// Numerical support of the initial slice vs. the diffusive reach sqrt(T):
/// flags data whose support sits closer to a boundary than 8 sqrt(T).
inline std::pair<bool, std::string> support_check(const GridSpec& grid,
                                                  std::span<const double> u0,
                                                  double T) {
    double peak = 0.0;
    for (double v : u0) peak = std::max(peak, std::abs(v));
    if (peak == 0.0) return {false, ""};
    std::size_t lo = 0, hi = grid.n - 1;
    while (lo < grid.n && std::abs(u0[lo]) < 1e-13 * peak) ++lo;
    while (hi > 0 && std::abs(u0[hi]) < 1e-13 * peak) --hi;
    const double margin = 8.0 * std::sqrt(std::max(T, 1.0));
    const double left_gap = grid.x(lo) - grid.x_min;
    const double right_gap = grid.x_max - grid.x(hi);
    if (left_gap < margin || right_gap < margin)
        return {true, "datum support within " + std::to_string(margin) +
                          " of a boundary; whole-line emulation degraded"};
    return {false, ""};
}

inline std::vector<std::size_t> snap_output_steps(const std::vector<double>& wanted,
                                                  double dt, std::size_t n_steps) {
    std::vector<std::size_t> steps;
    steps.reserve(wanted.size());
    for (double t : wanted) {
        const auto k = static_cast<std::size_t>(
            std::clamp<long long>(std::llround(t / dt), 0, static_cast<long long>(n_steps)));
        steps.push_back(k);
    }
    return steps;
}

}  // namespace detail

/// Method-of-lines solve up to T with outputs at the step times nearest the
/// requested ones.
inline LinearSolveResult solve_fd(const LinearCoefficients& coeffs,
                                  const GridSpec& grid, const FieldHistoryFn& init,
                                  double T, const std::vector<double>& out_times,
                                  const FdOptions& opts = {}) {
    FdStepper st(coeffs, grid, init, opts);
    LinearSolveResult res;
    res.dt = st.dt();
    res.n_delay = st.n_delay();
    res.C_u0 = st.history_l1_sup();
    res.interpolated_shift = st.interpolated_shift();
    std::tie(res.support_warning, res.warning) =
        detail::support_check(grid, st.field(), T);

    const auto n_steps = static_cast<std::size_t>(std::ceil(T / st.dt() - 1e-9));
    const auto want = detail::snap_output_steps(out_times, st.dt(), n_steps);

    auto record = [&](std::size_t k) {
        for (std::size_t i = 0; i < want.size(); ++i) {
            if (want[i] != k) continue;
            const auto u = st.field();
            double sup = 0.0, mass = 0.0;
            for (double v : u) {
                sup = std::max(sup, std::abs(v));
                mass += v;
            }
            res.outputs.push_back({st.t(), std::vector<double>(u.begin(), u.end())});
            res.out_times.push_back(st.t());
            res.sup_series.push_back(sup);
            res.mass_series.push_back(mass * grid.dx());
        }
    };
    record(0);
    for (std::size_t k = 1; k <= n_steps; ++k) {
        st.step();
        record(k);
    }
    return res;
}

struct SpectralOptions {
    int n_history_samples = 32;    ///< history slices sampled in s
    double mode_tol = 1e-12;       ///< relative per-mode accuracy target
    double stability_frac = 2.2;   ///< |sigma| dt <= this (RK4 real-axis 2.785)
    std::size_t min_n_delay = 16;
};

/// Fourier backend: each mode zeta solves r' = sigma(zeta) r + k(zeta) r(t-h)
/// with sigma = -zeta^2 + i m zeta + p and k = q e^{i zeta d}, integrated by
/// the scalar delay integrator. The spatial shift d is an exact phase.
inline LinearSolveResult solve_spectral(const LinearCoefficients& coeffs,
                                        const GridSpec& grid,
                                        const FieldHistoryFn& init, double T,
                                        const std::vector<double>& out_times,
                                        const SpectralOptions& opts = {}) {
    grid.validate();
    if (!grid.periodic) throw ConfigError("solve_spectral: periodic grid required");
    if (!detail::is_pow2(grid.n))
        throw ConfigError("solve_spectral: n must be a power of two");
    if (coeffs.h <= 0.0) throw ConfigError("solve_spectral: h > 0 required");

    const std::size_t n = grid.n;
    const double W = grid.x_max - grid.x_min;
    const double two_pi = 6.283185307179586476925286766559;

    // history slices in s, transformed once
    const int ns = std::max(opts.n_history_samples, 8);
    std::vector<std::vector<cplx>> hist_modes(static_cast<std::size_t>(ns) + 1);
    std::vector<cplx> buf(n);
    for (int l = 0; l <= ns; ++l) {
        const double s = coeffs.h * (static_cast<double>(l) / ns - 1.0);
        for (std::size_t j = 0; j < n; ++j) buf[j] = init(s, grid.x(j));
        detail::fft(buf, false);
        hist_modes[static_cast<std::size_t>(l)] = buf;
    }

    LinearSolveResult res;
    res.dt = 0.0;
    res.n_delay = 0;
    {
        double best = 0.0;
        for (int l = 0; l <= ns; ++l) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                acc += std::abs(init(coeffs.h * (static_cast<double>(l) / ns - 1.0),
                                     grid.x(j)));
            best = std::max(best, acc * grid.dx());
        }
        res.C_u0 = best;
    }

    std::vector<double> times = out_times;
    const double t_min =
        times.empty() ? T : *std::min_element(times.begin(), times.end());
    std::vector<std::vector<cplx>> mode_at_time(times.size(),
                                                std::vector<cplx>(n, {0.0, 0.0}));

    for (std::size_t k = 0; k <= n / 2; ++k) {
        const double kt = static_cast<double>(k);
        const double zeta = two_pi * kt / W;
        const cplx sigma(-zeta * zeta + coeffs.p, coeffs.m * zeta);
        const cplx kdel = coeffs.q * std::exp(cplx(0.0, zeta * coeffs.d));
        const double S = std::abs(sigma) + std::abs(kdel) + 1e-3;

        // dt from stability; refined for accuracy on modes that still matter
        double dt_k = opts.stability_frac / S;
        const double damp = std::max(0.0, -sigma.real()) * std::max(t_min, 0.0);
        const double budget =
            opts.mode_tol * 120.0 * std::exp(std::min(690.0, damp)) /
            (std::max(T, 1.0) * S);
        dt_k = std::min(dt_k, std::pow(budget, 0.25) / S);
        auto n_del = static_cast<std::size_t>(std::ceil(coeffs.h / dt_k - 1e-9));
        n_del = std::max(n_del, opts.min_n_delay);

        std::vector<cplx> samples(hist_modes.size());
        for (std::size_t l = 0; l < hist_modes.size(); ++l)
            samples[l] = hist_modes[l][k];

        ScalarDDE dde;
        dde.sigma = sigma;
        dde.k = kdel;
        dde.h = coeffs.h;
        dde.history = sampled_history(std::move(samples), coeffs.h);
        dde.t_end = std::max(T, t_min) + 1e-12;
        dde.n_per_delay = static_cast<int>(n_del);
        const Trajectory tr = integrate_dde(dde);

        for (std::size_t i = 0; i < times.size(); ++i) {
            const cplx v = times[i] <= 0.0 ? tr.values[tr.n_delay] : tr.eval(times[i]);
            mode_at_time[i][k] = v;
            if (k > 0 && k < n / 2) mode_at_time[i][n - k] = std::conj(v);
            if (k == n / 2) mode_at_time[i][k] = cplx(v.real(), 0.0);
        }
    }

    for (std::size_t i = 0; i < times.size(); ++i) {
        std::vector<cplx> slice = mode_at_time[i];
        detail::fft(slice, true);
        Slice out;
        out.t = times[i];
        out.u.resize(n);
        double sup = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            out.u[j] = slice[j].real();
            sup = std::max(sup, std::abs(out.u[j]));
        }
        res.mass_series.push_back(mode_at_time[i][0].real() * grid.dx());
        res.sup_series.push_back(sup);
        res.out_times.push_back(times[i]);
        res.outputs.push_back(std::move(out));
    }
    return res;
}

/// Fit of log sup|u| ~ rate*t + power*log(t) + amplitude.
struct DecayFit {
    double rate = 0.0;
    double power = 0.0;
    double amplitude = 0.0;
    double residual_rms = 0.0;
    std::size_t n_samples = 0;
};

inline DecayFit fit_decay(std::span<const double> times, std::span<const double> sups) {
    std::vector<double> t, y;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] > 0.0 && sups[i] > 0.0) {
            t.push_back(times[i]);
            y.push_back(std::log(sups[i]));
        }
    }
    if (t.size() < 20)
        throw ConfigError("fit_decay: need at least 20 positive samples");
    // normal equations for basis (t, log t, 1)
    double A[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    double b[3] = {0, 0, 0};
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double phi[3] = {t[i], std::log(t[i]), 1.0};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) A[r][c] += phi[r] * phi[c];
            b[r] += phi[r] * y[i];
        }
    }
    for (int col = 0; col < 3; ++col) {  // Gaussian elimination, partial pivot
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        std::swap(A[col], A[piv]);
        std::swap(b[col], b[piv]);
        for (int r = col + 1; r < 3; ++r) {
            const double f = A[r][col] / A[col][col];
            for (int c = col; c < 3; ++c) A[r][c] -= f * A[col][c];
            b[r] -= f * b[col];
        }
    }
    double x[3];
    for (int r = 2; r >= 0; --r) {
        double acc = b[r];
        for (int c = r + 1; c < 3; ++c) acc -= A[r][c] * x[c];
        x[r] = acc / A[r][r];
    }
    DecayFit fit;
    fit.rate = x[0];
    fit.power = x[1];
    fit.amplitude = x[2];
    fit.n_samples = t.size();
    double ss = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double pred = x[0] * t[i] + x[1] * std::log(t[i]) + x[2];
        ss += (y[i] - pred) * (y[i] - pred);
    }
    fit.residual_rms = std::sqrt(ss / static_cast<double>(t.size()));
    return fit;
}

struct DecayReport {
    DecayFit fit;
    double gamma = 0.0;
    double A0_proof = 0.0;
    double A0_stated = 0.0;
    double C_u0 = 0.0;
    bool bound_ok = true;
    double worst_ratio = 0.0;  ///< max over samples of sup / (A0 e^{gamma t}/sqrt t)
    double worst_t = 0.0;
    std::vector<double> times, sups;
};

/// Runs the FD backend and checks sup_x |u(t,.)| < A0 e^{gamma t}/sqrt(t)
/// on every sampled t > h/2 (A0 is the proof-derived constant), then fits
/// the decay law on those samples.
inline DecayReport verify_decay(const LinearCoefficients& coeffs, const GridSpec& grid,
                                const FieldHistoryFn& init, double T,
                                const FdOptions& opts = {},
                                double sample_spacing = 0.25) {
    std::vector<double> want;
    for (double t = 0.0; t <= T + 1e-9; t += sample_spacing) want.push_back(t);
    const LinearSolveResult sol = solve_fd(coeffs, grid, init, T, want, opts);

    DecayReport rep;
    rep.C_u0 = sol.C_u0;
    const DecayAmplitude amp = decay_amplitude(coeffs, sol.C_u0);
    rep.gamma = amp.gamma;
    rep.A0_proof = amp.proof;
    rep.A0_stated = amp.stated;
    for (std::size_t i = 0; i < sol.out_times.size(); ++i) {
        const double t = sol.out_times[i];
        if (t <= coeffs.h / 2.0) continue;
        rep.times.push_back(t);
        rep.sups.push_back(sol.sup_series[i]);
        const double bound = amp.proof * std::exp(amp.gamma * t) / std::sqrt(t);
        const double ratio = sol.sup_series[i] / bound;
        if (ratio > rep.worst_ratio) {
            rep.worst_ratio = ratio;
            rep.worst_t = t;
        }
    }
    rep.bound_ok = rep.worst_ratio < 1.0;
    rep.fit = fit_decay(rep.times, rep.sups);
    return rep;
}

struct AsymptoticRow {
    double t = 0.0, x = 0.0;
    double measured = 0.0;  ///< sqrt(t) e^{-sigma t} u(t, x)
    double limit = 0.0;
    double rel_err = 0.0;
};

struct AsymptoticReport {
    double sigma = 0.0;
    double prefactor = 0.0;          ///< sqrt(1 + h q e^{-sigma h}) / (2 sqrt(pi))
    double weighted_integral = 0.0;  ///< integral of e^{m y / 2} u0
    std::vector<AsymptoticRow> rows;
    std::vector<double> t_list;
    std::vector<double> max_rel_err;  ///< per t, over the probes
    bool decreasing = true;
};

/// Long-time profile: with history e^{sigma s} u0 the rescaled solution
/// sqrt(t) e^{-sigma t} u(t, x) approaches
/// prefactor e^{-m x/2} int e^{m y/2} u0(y) dy at every fixed x.
inline AsymptoticReport verify_asymptotic_profile(
    const LinearCoefficients& coeffs, const GridSpec& grid,
    const std::function<double(double)>& u0, const std::vector<double>& t_list,
    const std::vector<double>& probes, const FdOptions& opts = {}) {
    if (coeffs.d != 0.0)
        throw ConfigError("verify_asymptotic_profile: requires d = 0");
    AsymptoticReport rep;
    rep.sigma = sigma_root(coeffs);
    rep.prefactor = std::sqrt(1.0 + coeffs.h * coeffs.q *
                                        std::exp(-rep.sigma * coeffs.h)) /
                    (2.0 * std::sqrt(3.141592653589793238462643));
    double I = 0.0;
    for (std::size_t j = 0; j < grid.n; ++j)
        I += std::exp(0.5 * coeffs.m * grid.x(j)) * u0(grid.x(j));
    rep.weighted_integral = I * grid.dx();
    rep.t_list = t_list;

    const double sigma = rep.sigma;
    const FieldHistoryFn init = [&u0, sigma](double s, double x) {
        return std::exp(sigma * s) * u0(x);
    };
    const double T = *std::max_element(t_list.begin(), t_list.end());
    const LinearSolveResult sol = solve_fd(coeffs, grid, init, T, t_list, opts);

    auto interp = [&](const std::vector<double>& u, double x) {
        // cubic Lagrange at the probe
        const double pos = (x - grid.x_min) / grid.dx();
        long j = static_cast<long>(std::floor(pos));
        j = std::clamp(j - 1, 0L, static_cast<long>(grid.n) - 4);
        const double s = pos - static_cast<double>(j);
        const double w0 = -(s - 1) * (s - 2) * (s - 3) / 6.0;
        const double w1 = s * (s - 2) * (s - 3) / 2.0;
        const double w2 = -s * (s - 1) * (s - 3) / 2.0;
        const double w3 = s * (s - 1) * (s - 2) / 6.0;
        const auto uj = static_cast<std::size_t>(j);
        return w0 * u[uj] + w1 * u[uj + 1] + w2 * u[uj + 2] + w3 * u[uj + 3];
    };

    for (std::size_t i = 0; i < sol.outputs.size(); ++i) {
        const double t = sol.out_times[i];
        double worst = 0.0;
        for (double x : probes) {
            AsymptoticRow row;
            row.t = t;
            row.x = x;
            row.measured = std::sqrt(t) * std::exp(-rep.sigma * t) *
                           interp(sol.outputs[i].u, x);
            row.limit = rep.prefactor * std::exp(-0.5 * coeffs.m * x) *
                        rep.weighted_integral;
            row.rel_err = std::abs(row.measured - row.limit) /
                          std::max(std::abs(row.limit), 1e-300);
            worst = std::max(worst, row.rel_err);
            rep.rows.push_back(row);
        }
        rep.max_rel_err.push_back(worst);
    }
    for (std::size_t i = 1; i < rep.max_rel_err.size(); ++i)
        if (rep.max_rel_err[i] > rep.max_rel_err[i - 1]) rep.decreasing = false;
    return rep;
}

}  // namespace semiwave
