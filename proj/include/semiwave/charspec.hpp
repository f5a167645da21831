#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "semiwave/errors.hpp"

// Scalar transcendental characteristic equations of delayed linear evolution,
// and the spectral bounds / speed thresholds derived from their real roots.

namespace semiwave {

/// lambda = a + b e^{-h lambda}, the characteristic equation of the scalar
/// delay ODE r' = a r + b r(t-h) with b >= 0.
struct ScalarCharProblem {
    double a = 0.0;  ///< drift coefficient (real part of sigma)
    double b = 0.0;  ///< delayed-term magnitude, >= 0
    double h = 1.0;  ///< delay, > 0
};

/// Coefficients of u_t = u_xx + m u_x + p u + q u(t-h, x+d).
struct LinearCoefficients {
    double m = 0.0;
    double p = 0.0;
    double q = 0.0;
    double d = 0.0;
    double h = 1.0;
};

namespace detail {

inline void require_finite(double v, const char* name) {
    if (!std::isfinite(v))
        throw std::invalid_argument(std::string("non-finite input: ") + name);
}

}  // namespace detail

/// Unique real root of lambda = a + b e^{-h lambda}  (b >= 0, h > 0).
///
/// f(lambda) = lambda - a - b e^{-h lambda} is strictly increasing, with
/// f(a) <= 0 and f(max(a+b, 0)) >= 0, so a bracketed bisection always
/// converges; a short Newton polish brings the residual to rounding level.
/// Sign facts: lambda <= 0 iff -a >= b, and lambda = 0 iff -a = b (exact).
inline double solve_scalar_char(double a, double b, double h) {
    detail::require_finite(a, "a");
    detail::require_finite(b, "b");
    detail::require_finite(h, "h");
    if (b < 0.0) throw std::invalid_argument("solve_scalar_char: b must be >= 0");
    if (h <= 0.0) throw std::invalid_argument("solve_scalar_char: h must be > 0");

    if (b == 0.0) return a;
    if (a + b == 0.0) return 0.0;  // critical case, root exactly 0

    auto f = [&](double lam) { return lam - a - b * std::exp(-h * lam); };

    double lo = a;                  // f(lo) <= 0
    double hi = std::max(a + b, 0.0);  // f(hi) >= 0 (sign of a+b decides which)
    for (int it = 0; it < 220 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) <= 0.0)
            lo = mid;
        else
            hi = mid;
    }
    double lam = 0.5 * (lo + hi);
    for (int it = 0; it < 5; ++it) {
        const double e = std::exp(-h * lam);
        const double fv = lam - a - b * e;
        const double fp = 1.0 + h * b * e;
        const double step = fv / fp;
        lam -= step;
        if (std::abs(step) < 1e-16 * (1.0 + std::abs(lam))) break;
    }
    return lam;
}

inline double solve_scalar_char(const ScalarCharProblem& prob) {
    return solve_scalar_char(prob.a, prob.b, prob.h);
}

/// The non-positive root gamma of gamma - p = q e^{-h gamma} together with
/// eps_h = 1/(1 + h(gamma - p)) and the Gaussian-log envelope
/// alpha_h(zeta) = -(1/h) log(1 + h eps_h zeta^2).
struct SpectralEnvelope {
    double gamma = 0.0;
    double eps_h = 1.0;  ///< in (0, 1]
    double h = 1.0;

    double alpha(double zeta) const {
        return -std::log1p(h * eps_h * zeta * zeta) / h;
    }
};

/// Requires -p >= q >= 0 so that gamma <= 0.
inline SpectralEnvelope gamma_root(const LinearCoefficients& c) {
    if (c.q < 0.0) throw std::domain_error("gamma_root: q >= 0 violated");
    if (-c.p < c.q) throw std::domain_error("gamma_root: -p >= q violated");
    if (c.h <= 0.0) throw std::domain_error("gamma_root: h > 0 violated");
    SpectralEnvelope env;
    env.h = c.h;
    env.gamma = solve_scalar_char(c.p, c.q, c.h);
    if (env.gamma > 0.0) env.gamma = 0.0;  // rounding guard; -p >= q forces gamma <= 0
    env.eps_h = 1.0 / (1.0 + c.h * (env.gamma - c.p));
    return env;
}

/// Per-mode decay exponent: lambda(zeta) = -zeta^2 + p + q e^{-h lambda(zeta)}.
inline double lambda_of_zeta(double zeta, const LinearCoefficients& c) {
    if (c.q < 0.0) throw std::domain_error("lambda_of_zeta: q >= 0 violated");
    return solve_scalar_char(-zeta * zeta + c.p, c.q, c.h);
}

struct GaussBoundsRow {
    double zeta = 0.0;
    double lambda = 0.0;
    double lower = 0.0;   ///< -eps_h zeta^2 + gamma
    double upper = 0.0;   ///< alpha_h(zeta) + gamma
    double lower_margin = 0.0;  ///< lambda - lower
    double upper_margin = 0.0;  ///< upper - lambda
};

struct GaussBoundsReport {
    bool all_pass = true;
    std::size_t n_checked = 0;
    double worst_lower_margin = std::numeric_limits<double>::infinity();
    double worst_upper_margin = std::numeric_limits<double>::infinity();
    double worst_zeta = 0.0;
    std::vector<GaussBoundsRow> violations;
};

/// Checks -eps_h zeta^2 + gamma <= lambda(zeta) <= alpha_h(zeta) + gamma for
/// every requested zeta; both bounds are tight at zeta = 0.
inline GaussBoundsReport check_gauss_bounds(const LinearCoefficients& c,
                                            const std::vector<double>& zetas) {
    const SpectralEnvelope env = gamma_root(c);
    GaussBoundsReport rep;
    for (double z : zetas) {
        GaussBoundsRow row;
        row.zeta = z;
        row.lambda = lambda_of_zeta(z, c);
        row.lower = -env.eps_h * z * z + env.gamma;
        row.upper = env.alpha(z) + env.gamma;
        row.lower_margin = row.lambda - row.lower;
        row.upper_margin = row.upper - row.lambda;
        const double tol = 1e-10 * (1.0 + std::abs(row.lambda));
        if (row.lower_margin < -tol || row.upper_margin < -tol) {
            rep.all_pass = false;
            rep.violations.push_back(row);
        }
        if (row.lower_margin < rep.worst_lower_margin) {
            rep.worst_lower_margin = row.lower_margin;
            rep.worst_zeta = z;
        }
        rep.worst_upper_margin = std::min(rep.worst_upper_margin, row.upper_margin);
        ++rep.n_checked;
    }
    return rep;
}

/// lambda(zeta)/log(zeta); tends to -2/h as zeta grows, with a
/// (log q)/(h log zeta) first correction.
inline double log_asymptotics_ratio(const LinearCoefficients& c, double zeta) {
    if (c.q <= 0.0) throw std::domain_error("log_asymptotics_ratio: needs q > 0");
    if (zeta <= 1.0) throw std::domain_error("log_asymptotics_ratio: needs zeta > 1");
    return lambda_of_zeta(zeta, c) / std::log(zeta);
}

/// The only real sigma with q e^{-sigma h} = sigma + m^2/4 - p.
inline double sigma_root(const LinearCoefficients& c) {
    if (c.q < 0.0) throw std::domain_error("sigma_root: q >= 0 violated");
    return solve_scalar_char(c.p - 0.25 * c.m * c.m, c.q, c.h);
}

namespace detail {

/// E_c(lambda) = -lambda^2 + c lambda + 1 - L e^{-lambda c h}.
inline double speed_E(double lam, double c, double L, double h) {
    return -lam * lam + c * lam + 1.0 - L * std::exp(-lam * c * h);
}

/// max over lambda >= 0 of the strictly concave E_c; golden-section search.
/// Returns {max value, argmax}.
inline std::pair<double, double> speed_E_max(double c, double L, double h) {
    double a = 0.0;
    double b = 0.5 * (c + L * c * h) + 2.0;  // E' < 0 beyond this point
    constexpr double gr = 0.6180339887498949;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = speed_E(x1, c, L, h), f2 = speed_E(x2, c, L, h);
    while (b - a > 1e-12) {
        if (f1 > f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = speed_E(x1, c, L, h);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = speed_E(x2, c, L, h);
        }
    }
    const double lam = 0.5 * (a + b);
    return {speed_E(lam, c, L, h), lam};
}

}  // namespace detail

/// Minimal speed c(L): the unique c > 0 at which max_lambda E_c(lambda) = 0.
/// For h = 0 this equals 2 sqrt(L-1); the delay only lowers the threshold,
/// so [0, 2 sqrt(L-1) + L] brackets the root for every h >= 0.
inline double speed_threshold(double L, double h) {
    detail::require_finite(L, "L");
    detail::require_finite(h, "h");
    if (L <= 1.0)
        throw std::domain_error("speed_threshold: L > 1 required (E_c(0) = 1-L >= 0 otherwise)");
    if (h < 0.0) throw std::domain_error("speed_threshold: h >= 0 required");
    double lo = 0.0, hi = 2.0 * std::sqrt(L - 1.0) + L;
    while (hi - lo > 1e-11) {
        const double mid = 0.5 * (lo + hi);
        if (detail::speed_E_max(mid, L, h).first < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// The two positive roots lambda_1 <= lambda_2 of E_c, the admissible decay
/// exponents of the weight xi_c(z) = e^{-lambda_c z}.
struct SpeedData {
    double L = 2.0;
    double h = 1.0;
    double c = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double lambda_c = 0.0;  ///< chosen weight exponent in [lambda1, lambda2]
    bool double_root = false;

    double E(double lam) const { return detail::speed_E(lam, c, L, h); }
    double xi(double z) const { return std::exp(-lambda_c * z); }
};

/// Both roots of E_c(lambda) = 0 for c >= c(L). Throws NoRealRootError when
/// the concave maximum is negative (c below the threshold). Tangency is
/// numerically fuzzy: roots closer than 1e-6 are reported as a double root
/// with lambda_c at their midpoint, otherwise lambda_c defaults to lambda1.
inline SpeedData lambda_interval(double c, double L, double h) {
    if (L <= 1.0) throw std::domain_error("lambda_interval: L > 1 required");
    const auto [emax, lam_star] = detail::speed_E_max(c, L, h);
    if (emax < 0.0)
        throw NoRealRootError("lambda_interval: E_c has no real root (c < c(L))");

    auto polish = [&](double lam) {
        for (int it = 0; it < 6; ++it) {
            const double e = std::exp(-lam * c * h);
            const double f = -lam * lam + c * lam + 1.0 - L * e;
            const double fp = -2.0 * lam + c + L * c * h * e;
            if (fp == 0.0) break;
            lam -= f / fp;
        }
        return lam;
    };
    auto bisect = [&](double lo, double hi, bool rising) {
        // rising: E goes from <0 to >=0 over [lo, hi]
        for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + hi); ++it) {
            const double mid = 0.5 * (lo + hi);
            const bool neg = detail::speed_E(mid, c, L, h) < 0.0;
            if (neg == rising)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    };

    SpeedData sd;
    sd.L = L;
    sd.h = h;
    sd.c = c;
    double hi2 = lam_star + 1.0;
    while (detail::speed_E(hi2, c, L, h) >= 0.0) hi2 += 1.0;
    sd.lambda1 = polish(bisect(0.0, lam_star, true));
    sd.lambda2 = polish(bisect(lam_star, hi2, false));
    if (sd.lambda2 < sd.lambda1) std::swap(sd.lambda1, sd.lambda2);
    sd.double_root = (sd.lambda2 - sd.lambda1) < 1e-6;
    sd.lambda_c = sd.double_root ? 0.5 * (sd.lambda1 + sd.lambda2) : sd.lambda1;
    return sd;
}

/// Largest gamma0 in [0, 1) with
///   -lambda_c^2 + c lambda_c + 1 >= gamma0 + L_g e^{gamma0 h} e^{-lambda_c c h}
///   and L_I <= e^{-gamma0 h} (1 - gamma0).
/// Both slacks are strictly decreasing in gamma0, so bisection applies.
inline double gamma0_solve(const SpeedData& sd, double L_g, double L_I) {
    const double lhs = -sd.lambda_c * sd.lambda_c + sd.c * sd.lambda_c + 1.0;
    const double shift = std::exp(-sd.lambda_c * sd.c * sd.h);
    auto feasible = [&](double g) {
        return lhs + 1e-12 >= g + L_g * std::exp(g * sd.h) * shift &&
               L_I <= std::exp(-g * sd.h) * (1.0 - g);
    };
    if (L_I > 1.0)
        throw InfeasibleError("gamma0_solve: L_I > 1, no rate exists");
    if (!feasible(0.0))
        throw InfeasibleError("gamma0_solve: E_c(lambda_c) < 0, gamma0 = 0 infeasible");
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (feasible(mid))
            lo = mid;
        else
            hi = mid;
    }
    return lo < 1e-12 ? 0.0 : lo;  // only gamma0 = 0 is feasible
}

/// Maximizes gamma0_solve over the admissible lambda_c in [lambda1, lambda2].
/// At the endpoints E_c vanishes and only gamma0 = 0 is feasible, so the
/// useful rate always sits in the interior; scan plus golden refinement.
inline double gamma0_best(double c, double L_g, double L_I, double h,
                          double* lambda_at_best = nullptr) {
    SpeedData sd = lambda_interval(c, L_g, h);
    auto value = [&](double lam) {
        sd.lambda_c = lam;
        try {
            return gamma0_solve(sd, L_g, L_I);
        } catch (const InfeasibleError&) {
            return -1.0;
        }
    };
    double best_lam = sd.lambda1, best = value(sd.lambda1);
    constexpr int kScan = 200;
    for (int i = 1; i <= kScan; ++i) {
        const double lam = sd.lambda1 + (sd.lambda2 - sd.lambda1) * i / kScan;
        const double g = value(lam);
        if (g > best) {
            best = g;
            best_lam = lam;
        }
    }
    const double step = (sd.lambda2 - sd.lambda1) / kScan;
    double a = std::max(sd.lambda1, best_lam - step);
    double b = std::min(sd.lambda2, best_lam + step);
    constexpr double gr = 0.6180339887498949;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = value(x1), f2 = value(x2);
    for (int it = 0; it < 90; ++it) {
        if (f1 > f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = value(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = value(x2);
        }
    }
    const double lam = 0.5 * (a + b);
    const double g = value(lam);
    if (g >= best) {
        best = g;
        best_lam = lam;
    }
    if (best < 0.0) throw InfeasibleError("gamma0_best: infeasible for every lambda_c");
    if (lambda_at_best) *lambda_at_best = best_lam;
    return best;
}

/// The decay-estimate prefactor A0. The stated form is C/2 sqrt(1+h(gamma-p));
/// tracing the Fourier-side estimate gives an extra sqrt(h). Both are
/// reported; they coincide at h = 1.
struct DecayAmplitude {
    double proof = 0.0;   ///< (C/2) sqrt(h (1 + h(gamma-p)))
    double stated = 0.0;  ///< (C/2) sqrt(1 + h(gamma-p))
    double gamma = 0.0;
};

inline DecayAmplitude decay_amplitude(const LinearCoefficients& c, double C_u0) {
    if (C_u0 < 0.0) throw std::invalid_argument("decay_amplitude: C_u0 >= 0 required");
    const SpectralEnvelope env = gamma_root(c);
    const double base = 1.0 + c.h * (env.gamma - c.p);
    DecayAmplitude a;
    a.gamma = env.gamma;
    a.stated = 0.5 * C_u0 * std::sqrt(base);
    a.proof = 0.5 * C_u0 * std::sqrt(c.h * base);
    return a;
}

}  // namespace semiwave
