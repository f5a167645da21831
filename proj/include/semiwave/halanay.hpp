#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "semiwave/charspec.hpp"
#include "semiwave/errors.hpp"

// Scalar complex delay ODE r'(t) = sigma r(t) + k r(t-h), integrated by the
// method of steps, and certification of the exponential bound governed by the
// real root of lambda = Re(sigma) + |k| e^{-h lambda}.

namespace semiwave {

using cplx = std::complex<double>;

/// History on [-h, 0] is supplied as a callable so stage-time evaluations are
/// exact for analytic histories and interpolated for sampled ones.
using HistoryFn = std::function<cplx(double s)>;

/// Wraps equispaced samples (at -h, -h+ds, ..., 0) as a history function via
/// 4-point Lagrange interpolation.
inline HistoryFn sampled_history(std::vector<cplx> samples, double h) {
    if (samples.size() < 2) throw ConfigError("sampled_history: need >= 2 samples");
    const double ds = h / static_cast<double>(samples.size() - 1);
    return [samples = std::move(samples), h, ds](double s) -> cplx {
        const auto n = static_cast<long>(samples.size());
        double pos = (s + h) / ds;
        long j = static_cast<long>(std::floor(pos));
        j = std::clamp(j - 1, 0L, n - 4);  // 4-point stencil [j, j+3]
        if (n == 2) {
            const double w = pos;  // linear
            return samples[0] * (1.0 - w) + samples[1] * w;
        }
        if (n == 3) {  // quadratic through all three
            const double x = pos;
            return samples[0] * ((x - 1.0) * (x - 2.0) / 2.0) +
                   samples[1] * (x * (2.0 - x)) + samples[2] * (x * (x - 1.0) / 2.0);
        }
        const double x = pos - static_cast<double>(j);
        const double w0 = -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0;
        const double w1 = x * (x - 2.0) * (x - 3.0) / 2.0;
        const double w2 = -x * (x - 1.0) * (x - 3.0) / 2.0;
        const double w3 = x * (x - 1.0) * (x - 2.0) / 6.0;
        return samples[j] * w0 + samples[j + 1] * w1 + samples[j + 2] * w2 +
               samples[j + 3] * w3;
    };
}

struct ScalarDDE {
    cplx sigma{0.0, 0.0};
    cplx k{0.0, 0.0};
    double h = 1.0;
    HistoryFn history;        ///< continuous on [-h, 0]
    double t_end = 1.0;
    double dt = 0.0;          ///< must divide h exactly; 0 selects h/n_per_delay
    int n_per_delay = 64;     ///< used when dt == 0; >= 16
};

/// Dense trajectory on the dt grid from -h to t_end. Off-grid values for
/// t >= 0 come from cubic Hermite segments built on the stored ODE
/// derivatives, which keeps dense output at the integrator's own order.
struct Trajectory {
    double dt = 0.0;
    double h = 0.0;
    std::size_t n_delay = 0;  ///< nodes per delay interval
    std::vector<double> times;
    std::vector<cplx> values;
    std::vector<cplx> derivs;     ///< ODE derivative at nodes with t >= 0
    double sup_history = 0.0;     ///< sup |r| over every history evaluation made

    /// Hermite dense output for t in [0, t_end]; clamps to node range.
    cplx eval(double t) const {
        const double pos = (t + h) / dt;
        const auto n = static_cast<long>(values.size());
        long j = std::clamp(static_cast<long>(std::floor(pos)),
                            static_cast<long>(n_delay), n - 2);
        const double x = pos - static_cast<double>(j);
        const double x2 = x * x, x3 = x2 * x;
        const cplx& y0 = values[j];
        const cplx& y1 = values[j + 1];
        const cplx m0 = derivs[j] * dt;
        const cplx m1 = derivs[j + 1] * dt;
        return y0 * (2 * x3 - 3 * x2 + 1) + m0 * (x3 - 2 * x2 + x) +
               y1 * (-2 * x3 + 3 * x2) + m1 * (x3 - x2);
    }
};

/// Method-of-steps integration with classical RK4 on the dt grid. On each
/// delay interval the delayed value is known data: from the history function
/// on [-h, 0], from the stored Hermite segments afterwards. dt divides h
/// exactly so the breakpoints of smoothness land on grid nodes.
inline Trajectory integrate_dde(const ScalarDDE& p) {
    if (p.h <= 0.0) throw ConfigError("integrate_dde: h must be > 0");
    if (!p.history) throw ConfigError("integrate_dde: history function required");
    std::size_t n_delay;
    if (p.dt > 0.0) {
        const double ratio = p.h / p.dt;
        n_delay = static_cast<std::size_t>(std::llround(ratio));
        if (n_delay < 16 || std::abs(ratio - static_cast<double>(n_delay)) > 1e-9)
            throw ConfigError("integrate_dde: dt must equal h/N for integer N >= 16");
    } else {
        if (p.n_per_delay < 16)
            throw ConfigError("integrate_dde: n_per_delay must be >= 16");
        n_delay = static_cast<std::size_t>(p.n_per_delay);
    }
    const double dt = p.h / static_cast<double>(n_delay);
    const auto n_steps = static_cast<std::size_t>(std::ceil(p.t_end / dt - 1e-9));

    Trajectory tr;
    tr.dt = dt;
    tr.h = p.h;
    tr.n_delay = n_delay;
    const std::size_t n_nodes = n_delay + n_steps + 1;
    tr.times.resize(n_nodes);
    tr.values.resize(n_nodes);
    tr.derivs.resize(n_nodes);

    double sup_hist = 0.0;
    auto hist = [&](double s) {
        const cplx v = p.history(s);
        sup_hist = std::max(sup_hist, std::abs(v));
        return v;
    };

    for (std::size_t j = 0; j <= n_delay; ++j) {
        const double t = (static_cast<double>(j) - static_cast<double>(n_delay)) * dt;
        tr.times[j] = t;
        tr.values[j] = hist(std::min(t, 0.0));
    }

    // delayed lookup at tau = t - h; tau <= 0 hits the history function
    auto delayed = [&](double tau, std::size_t node_hint) -> cplx {
        if (tau <= 1e-14) return hist(std::max(tau, -p.h));
        (void)node_hint;
        return tr.eval(tau);
    };

    const cplx sig = p.sigma, kk = p.k;
    std::size_t cur = n_delay;  // node at t = 0
    tr.derivs[cur] = sig * tr.values[cur] + kk * tr.values[0];
    for (std::size_t s = 0; s < n_steps; ++s, ++cur) {
        const double t = (static_cast<double>(cur) - static_cast<double>(n_delay)) * dt;
        const cplx r = tr.values[cur];
        const cplx d0 = tr.values[cur - n_delay];         // r(t - h), grid node
        const cplx d4 = tr.values[cur + 1 - n_delay];     // r(t + dt - h), grid node
        const cplx dmid = delayed(t + 0.5 * dt - p.h, cur);

        const cplx k1 = sig * r + kk * d0;
        const cplx k2 = sig * (r + 0.5 * dt * k1) + kk * dmid;
        const cplx k3 = sig * (r + 0.5 * dt * k2) + kk * dmid;
        const cplx k4 = sig * (r + dt * k3) + kk * d4;

        tr.values[cur + 1] = r + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        tr.times[cur + 1] = t + dt;
        tr.derivs[cur + 1] = sig * tr.values[cur + 1] + kk * d4;
        if (!std::isfinite(tr.values[cur + 1].real()) ||
            !std::isfinite(tr.values[cur + 1].imag()))
            throw NumericalError("integrate_dde: non-finite value", t);
    }
    tr.sup_history = sup_hist;
    return tr;
}

/// Result of checking |r(t)| <= sup_hist e^{max(0,lambda) h} e^{lambda t}.
///
/// Note the prefactor: for lambda > 0 the extremal comparison solution must
/// dominate the history segment at s = -h, which requires e^{+lambda h};
/// for lambda <= 0 the factor is 1.
struct HalanayReport {
    bool ok = true;
    double lambda = 0.0;
    double sup_history = 0.0;
    double worst_t = 0.0;
    double worst_ratio = 0.0;  ///< max over grid times of |r| / bound
    double tolerance = 1e-6;
};

inline HalanayReport check_halanay(const ScalarDDE& p, const Trajectory& tr,
                                   double tolerance = 1e-6) {
    HalanayReport rep;
    rep.tolerance = tolerance;
    rep.lambda = solve_scalar_char(p.sigma.real(), std::abs(p.k), p.h);
    rep.sup_history = tr.sup_history;
    const double pref = tr.sup_history * std::exp(std::max(0.0, rep.lambda) * p.h);
    for (std::size_t j = 1; j < tr.values.size(); ++j) {  // every grid t > -h
        const double bound = pref * std::exp(rep.lambda * tr.times[j]);
        const double mag = std::abs(tr.values[j]);
        const double ratio = bound > 0.0 ? mag / bound : (mag > 0.0 ? INFINITY : 0.0);
        if (ratio > rep.worst_ratio) {
            rep.worst_ratio = ratio;
            rep.worst_t = tr.times[j];
        }
    }
    rep.ok = rep.worst_ratio <= 1.0 + tolerance;
    return rep;
}

inline HalanayReport check_halanay(const ScalarDDE& p, double tolerance = 1e-6) {
    return check_halanay(p, integrate_dde(p), tolerance);
}

}  // namespace semiwave
