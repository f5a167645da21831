#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "semiwave/charspec.hpp"
#include "semiwave/errors.hpp"

// Birth-function families g: R+ -> R+ with two fixed points 0 and kappa, and
// the scalar constants the stability theory consumes (kappa, L_g, M_g, m_g,
// interval Lipschitz constants, invariant-interval witnesses).

namespace semiwave {

class BirthFunction {
public:
    enum class Family { Nicholson, MackeyGlass, CustomMonotone };

    /// g(u) = p u e^{-u}; unit decay and diffusion form.
    static BirthFunction nicholson(double p) {
        if (!(p > 0.0)) throw std::invalid_argument("nicholson: p > 0 required");
        BirthFunction bf;
        bf.family_ = Family::Nicholson;
        bf.p1_ = p;
        bf.name_ = "nicholson";
        return bf;
    }

    /// g(u) = a b^n u / (b^n + u^n).
    static BirthFunction mackey_glass(double a, double b, double n) {
        if (!(a > 0.0 && b > 0.0 && n > 0.0))
            throw std::invalid_argument("mackey_glass: a, b, n > 0 required");
        BirthFunction bf;
        bf.family_ = Family::MackeyGlass;
        bf.p1_ = a;
        bf.p2_ = b;
        bf.p3_ = n;
        bf.name_ = "mackey_glass";
        return bf;
    }

    static BirthFunction custom(std::string name, std::function<double(double)> g,
                                std::function<double(double)> gprime,
                                double scan_max) {
        BirthFunction bf;
        bf.family_ = Family::CustomMonotone;
        bf.g_ = std::move(g);
        bf.gp_ = std::move(gprime);
        bf.scan_max_ = scan_max;
        bf.name_ = std::move(name);
        return bf;
    }

    double operator()(double u) const {
        switch (family_) {
            case Family::Nicholson: return p1_ * u * std::exp(-u);
            case Family::MackeyGlass: {
                const double bn = std::pow(p2_, p3_);
                return p1_ * bn * u / (bn + std::pow(u, p3_));
            }
            default: return g_(u);
        }
    }

    double deriv(double u) const {
        switch (family_) {
            case Family::Nicholson: return p1_ * (1.0 - u) * std::exp(-u);
            case Family::MackeyGlass: {
                const double bn = std::pow(p2_, p3_);
                const double un = std::pow(u, p3_);
                const double den = bn + un;
                return p1_ * bn * (bn + (1.0 - p3_) * un) / (den * den);
            }
            default:
                if (gp_) return gp_(u);
                const double eps = 1e-6 * (1.0 + std::abs(u));
                return ((*this)(u + eps) - (*this)(std::max(0.0, u - eps))) /
                       (u - eps >= 0.0 ? 2.0 * eps : eps + u - std::max(0.0, u - eps));
        }
    }

    /// Elementwise g over a slice; the family switch stays out of the loop.
    void eval_array(std::span<const double> in, std::span<double> out) const {
        switch (family_) {
            case Family::Nicholson: {
                const double p = p1_;
                for (std::size_t j = 0; j < in.size(); ++j)
                    out[j] = p * in[j] * std::exp(-in[j]);
                return;
            }
            case Family::MackeyGlass: {
                const double bn = std::pow(p2_, p3_);
                const double a = p1_, n = p3_;
                for (std::size_t j = 0; j < in.size(); ++j)
                    out[j] = a * bn * in[j] / (bn + std::pow(in[j], n));
                return;
            }
            default:
                for (std::size_t j = 0; j < in.size(); ++j) out[j] = g_(in[j]);
        }
    }

    Family family() const { return family_; }
    const std::string& name() const { return name_; }
    double param1() const { return p1_; }
    double param2() const { return p2_; }
    double param3() const { return p3_; }
    double scan_max() const { return scan_max_; }

private:
    Family family_ = Family::CustomMonotone;
    double p1_ = 0.0, p2_ = 0.0, p3_ = 0.0;
    double scan_max_ = 10.0;
    std::function<double(double)> g_, gp_;
    std::string name_;
};

/// Positive fixed point. Closed forms for the named families; sign-change
/// bisection of g(u) - u for custom ones.
inline double kappa(const BirthFunction& bf) {
    switch (bf.family()) {
        case BirthFunction::Family::Nicholson: {
            const double p = bf.param1();
            if (p <= 1.0)
                throw std::domain_error("kappa: Nicholson needs p > 1 for a positive fixed point");
            return std::log(p);
        }
        case BirthFunction::Family::MackeyGlass: {
            const double a = bf.param1(), b = bf.param2(), n = bf.param3();
            if (a <= 1.0)
                throw std::domain_error("kappa: Mackey-Glass needs a > 1 for a positive fixed point");
            return b * std::pow(a - 1.0, 1.0 / n);
        }
        default: {
            const double hi = bf.scan_max();
            constexpr int kScan = 4096;
            double prev_u = hi / kScan, prev_f = bf(prev_u) - prev_u;
            for (int i = 2; i <= kScan; ++i) {
                const double u = hi * i / kScan;
                const double f = bf(u) - u;
                if (prev_f > 0.0 && f <= 0.0) {
                    double lo = prev_u, up = u;
                    for (int it = 0; it < 200; ++it) {
                        const double mid = 0.5 * (lo + up);
                        if (bf(mid) - mid > 0.0)
                            lo = mid;
                        else
                            up = mid;
                    }
                    return 0.5 * (lo + up);
                }
                prev_u = u;
                prev_f = f;
            }
            throw std::domain_error("kappa: no positive fixed point found on (0, scan_max]");
        }
    }
}

namespace detail {

/// sup of fn over [lo, hi]: dense scan plus golden refinement around the best
/// sample. The returned value carries a 1e-4 relative headroom so it can be
/// quoted as an upper estimate.
inline double sampled_sup(const std::function<double(double)>& fn, double lo, double hi,
                          int samples = 100000) {
    double best = -INFINITY, best_u = lo;
    for (int i = 0; i <= samples; ++i) {
        const double u = lo + (hi - lo) * i / samples;
        const double v = fn(u);
        if (v > best) {
            best = v;
            best_u = u;
        }
    }
    const double step = (hi - lo) / samples;
    double a = std::max(lo, best_u - step), b = std::min(hi, best_u + step);
    constexpr double gr = 0.6180339887498949;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = fn(x1), f2 = fn(x2);
    for (int it = 0; it < 80; ++it) {
        if (f1 > f2) {
            b = x2; x2 = x1; f2 = f1; x1 = b - gr * (b - a); f1 = fn(x1);
        } else {
            a = x1; x1 = x2; f1 = f2; x2 = a + gr * (b - a); f2 = fn(x2);
        }
    }
    best = std::max(best, std::max(f1, f2));
    return best * (best > 0.0 ? 1.0 + 1e-4 : 1.0 - 1e-4);
}

inline double sampled_inf(const std::function<double(double)>& fn, double lo, double hi,
                          int samples = 100000) {
    return -sampled_sup([&](double u) { return -fn(u); }, lo, hi, samples);
}

/// Same search without the headroom factor (for quantities compared exactly).
inline double sampled_sup_exact(const std::function<double(double)>& fn, double lo,
                                double hi, int samples = 100000) {
    const double v = sampled_sup(fn, lo, hi, samples);
    return v > 0.0 ? v / (1.0 + 1e-4) : v / (1.0 - 1e-4);
}

inline double sampled_inf_exact(const std::function<double(double)>& fn, double lo,
                                double hi, int samples = 100000) {
    return -sampled_sup_exact([&](double u) { return -fn(u); }, lo, hi, samples);
}

/// Global argmax of g, refined by golden section around the best sample.
inline double global_argmax(const BirthFunction& bf, double hi) {
    double best = -INFINITY, best_u = 0.0;
    constexpr int N = 20000;
    for (int i = 0; i <= N; ++i) {
        const double u = hi * i / N;
        const double v = bf(u);
        if (v > best) {
            best = v;
            best_u = u;
        }
    }
    const double step = hi / N;
    double a = std::max(0.0, best_u - step), b = std::min(hi, best_u + step);
    constexpr double gr = 0.6180339887498949;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = bf(x1), f2 = bf(x2);
    for (int it = 0; it < 90; ++it) {
        if (f1 > f2) {
            b = x2; x2 = x1; f2 = f1; x1 = b - gr * (b - a); f1 = bf(x1);
        } else {
            a = x1; x1 = x2; f1 = f2; x2 = a + gr * (b - a); f2 = bf(x2);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace detail

/// Global Lipschitz constant L_g = sup_{u>=0} |g'(u)|. Analytic for
/// Nicholson (= p) and monotone Mackey-Glass (= a); sampled on [0, 10 kappa]
/// otherwise (slightly overestimates, by design under 0.1%).
inline double lipschitz_global(const BirthFunction& bf) {
    switch (bf.family()) {
        case BirthFunction::Family::Nicholson:
            // |(1-u)e^{-u}| peaks at u=0 with value 1; interior max e^{-2} < 1
            return bf.param1();
        case BirthFunction::Family::MackeyGlass: {
            if (bf.param3() <= 1.0) return bf.param1();  // g' decreasing from a
            const double k = kappa(bf);
            return std::max(bf.param1(),
                            detail::sampled_sup(
                                [&](double u) { return std::abs(bf.deriv(u)); }, 0.0,
                                10.0 * k));
        }
        default: {
            double hi = bf.scan_max();
            try {
                hi = std::max(hi, 10.0 * kappa(bf));
            } catch (const std::domain_error&) {
            }
            return detail::sampled_sup(
                [&](double u) { return std::abs(bf.deriv(u)); }, 0.0, hi);
        }
    }
}

struct MonostabilityReport {
    double kappa = 0.0;
    double g_prime_0 = 0.0;
    double g_prime_kappa = 0.0;
    double holder_C = 0.0;
    double holder_theta = 1.0;
    double delta0 = 0.0;
    bool passes_M = false;
    bool kappa_slope_marginal = false;  ///< |g'(kappa)| within 1e-9 of 1
    int fixed_point_count = 0;          ///< positive fixed points located
    std::vector<double> crossings;      ///< positive solutions of g(u) = u found
    std::string failure;
};

/// Verifies the monostability condition: exactly two fixed points (0 and
/// kappa), g'(0) > 1 > g'(kappa), and a Hoelder estimate for g' near the
/// equilibria obtained by log-log regression on (0, kappa/10].
inline MonostabilityReport check_M(const BirthFunction& bf) {
    MonostabilityReport rep;
    rep.g_prime_0 = bf.deriv(0.0);
    double k;
    try {
        k = kappa(bf);
    } catch (const std::domain_error& e) {
        rep.failure = e.what();
        return rep;
    }
    rep.kappa = k;
    rep.g_prime_kappa = bf.deriv(k);
    rep.delta0 = k / 10.0;

    // sign scan of g(u) - u over (0, 10 kappa], step kappa/1e4
    const double step = k / 1e4;
    const double hi = 10.0 * k;
    double prev_u = step, prev_f = bf(prev_u) - prev_u;
    for (double u = 2.0 * step; u <= hi; u += step) {
        const double f = bf(u) - u;
        if ((prev_f > 0.0 && f <= 0.0) || (prev_f < 0.0 && f >= 0.0)) {
            double lo = prev_u, up = u;
            for (int it = 0; it < 100; ++it) {
                const double mid = 0.5 * (lo + up);
                const double fm = bf(mid) - mid;
                if ((prev_f > 0.0) == (fm > 0.0))
                    lo = mid;
                else
                    up = mid;
            }
            rep.crossings.push_back(0.5 * (lo + up));
        }
        prev_u = u;
        prev_f = f;
    }
    rep.fixed_point_count = static_cast<int>(rep.crossings.size());

    // Hoelder quotient near the equilibria
    std::vector<double> lx, ly;
    for (int i = 1; i <= 40; ++i) {
        const double u = rep.delta0 * i / 40.0;
        const double H = std::abs(bf.deriv(u) - rep.g_prime_0) +
                         std::abs(rep.g_prime_kappa - bf.deriv(k - u));
        if (H > 0.0) {
            lx.push_back(std::log(u));
            ly.push_back(std::log(H));
        }
    }
    if (lx.size() >= 3) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sx += lx[i];
            sy += ly[i];
            sxx += lx[i] * lx[i];
            sxy += lx[i] * ly[i];
        }
        const double n = static_cast<double>(lx.size());
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        const double intercept = (sy - slope * sx) / n;
        rep.holder_theta = std::clamp(slope, 1e-3, 1.0);
        rep.holder_C = std::exp(intercept);
    }

    rep.kappa_slope_marginal = std::abs(std::abs(rep.g_prime_kappa) - 1.0) < 1e-9;
    if (rep.fixed_point_count != 1) {
        rep.failure = "fixed-point count on (0, 10 kappa] is " +
                      std::to_string(rep.fixed_point_count) + ", expected 1 (plus 0)";
        return rep;
    }
    if (!(rep.g_prime_0 > 1.0)) {
        rep.failure = "g'(0) <= 1";
        return rep;
    }
    if (!(rep.g_prime_kappa < 1.0)) {
        rep.failure = "g'(kappa) >= 1";
        return rep;
    }
    rep.passes_M = true;
    return rep;
}

struct IntervalData {
    double kappa = 0.0;
    double u_peak = 0.0;   ///< argmax of g on [0, kappa]
    double M_g = 0.0;      ///< max of g on [0, kappa]
    double m_g = 0.0;      ///< min of g on [kappa, M_g]
    double L_I = 0.0;      ///< Lipschitz constant of g on I_g = [m_g, M_g]
    double zeta1 = 0.0, zeta2 = 0.0;
    double g_star_plus = 0.0;  ///< sup_{s>0} g(s)/s
    double K = 0.0;            ///< fixed point of the running-max envelope
    double m_K = 0.0;          ///< min of g on [kappa, K]
    bool b_valid = false;      ///< (B1)-(B4) hold for (zeta1, zeta2)
    std::string b_failure;     ///< first violated item if not
    std::string zeta_construction;  ///< which (zeta1, zeta2) pair validated
};

namespace detail {

/// (B1)-(B4) for a candidate pair; returns empty string or the violated item.
inline std::string validate_B(const BirthFunction& bf, double z1, double z2,
                              double kap) {
    constexpr int N = 4000;
    double gmin = INFINITY, gmax = -INFINITY;
    for (int i = 0; i <= N; ++i) {
        const double u = z1 + (z2 - z1) * i / N;
        const double v = bf(u);
        gmin = std::min(gmin, v);
        gmax = std::max(gmax, v);
    }
    const double tol = 1e-9 * (1.0 + std::abs(z2));
    if (gmin < z1 - tol || gmax > z2 + tol) return "B1: g([z1,z2]) not inside [z1,z2]";
    for (int i = 0; i <= N; ++i) {
        const double u = z1 * i / N;
        const double v = bf(u);
        if (v < -tol || v > z2 + tol) return "B1: g([0,z1]) not inside [0,z2]";
    }
    if (bf(z1) > gmin + tol) return "B2: min of g on [z1,z2] not attained at z1";
    for (int i = 1; i < N; ++i) {  // interior of (0, z1); endpoints may equal
        const double u = z1 * i / N;
        if (bf(u) <= u + 0.0) return "B3: g(x) > x fails on (0, z1)";
    }
    const double gp0 = bf.deriv(0.0);
    if (!(gp0 > 1.0)) return "B3: g'(0) <= 1";
    // B4: fixed points of g on [0, z2] are exactly 0 and kappa
    int count = 0;
    double prev = bf(z2 / N * 1.0) - z2 / N;
    for (int i = 2; i <= N; ++i) {
        const double u = z2 * i / N;
        const double f = bf(u) - u;
        if ((prev > 0) != (f > 0)) ++count;
        prev = f;
    }
    if (count != 1 && z2 > kap) return "B4: extra fixed points on [0, z2]";
    return "";
}

}  // namespace detail

/// All the interval constants: M_g, m_g, L_I, the invariant-interval pair
/// (zeta1, zeta2), g*_+, and the envelope data (K, m_K).
///
/// The pair (m_g, M_g) is proposed first. For unimodal g it fails (B2)
/// (the minimum over [m_g, M_g] sits at the right end), in which case zeta1
/// falls back to the increasing-branch preimage of m_g, which satisfies
/// (B1)-(B4); the report records which construction validated.
inline IntervalData interval_data(const BirthFunction& bf) {
    const MonostabilityReport m = check_M(bf);
    if (!m.passes_M)
        throw std::domain_error("interval_data: condition (M) fails: " + m.failure);
    IntervalData d;
    d.kappa = m.kappa;

    // peak of g on [0, kappa]
    constexpr double gr = 0.6180339887498949;
    double a = 0.0, b = d.kappa;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = bf(x1), f2 = bf(x2);
    for (int it = 0; it < 120; ++it) {
        if (f1 > f2) {
            b = x2; x2 = x1; f2 = f1; x1 = b - gr * (b - a); f1 = bf(x1);
        } else {
            a = x1; x1 = x2; f1 = f2; x2 = a + gr * (b - a); f2 = bf(x2);
        }
    }
    d.u_peak = 0.5 * (a + b);
    d.M_g = std::max(bf(d.u_peak), bf(d.kappa));
    if (bf(d.kappa) >= bf(d.u_peak) - 1e-13 * (1.0 + d.M_g)) {
        // monotone on [0, kappa]: everything degenerates to kappa
        d.u_peak = d.kappa;
        d.M_g = bf(d.kappa);
    }
    d.m_g = (d.M_g <= d.kappa + 1e-13)
                ? d.kappa
                : detail::sampled_inf_exact([&](double u) { return bf(u); }, d.kappa,
                                            d.M_g, 20000);
    d.m_g = std::min(d.m_g, d.kappa);
    d.L_I = (d.M_g - d.m_g < 1e-13)
                ? std::abs(bf.deriv(d.kappa))
                : detail::sampled_sup(
                      [&](double u) { return std::abs(bf.deriv(u)); }, d.m_g, d.M_g);

    d.g_star_plus = detail::sampled_sup_exact(
        [&](double u) { return u > 0.0 ? bf(u) / u : bf.deriv(0.0); }, 1e-12,
        10.0 * d.kappa);
    d.g_star_plus = std::max(d.g_star_plus, bf.deriv(0.0));

    d.K = d.M_g;    // fixed point of the running-max envelope
    d.m_K = d.m_g;  // min of g on [kappa, K]

    d.zeta1 = d.m_g;
    d.zeta2 = d.M_g;
    d.zeta_construction = "(m_g, M_g)";
    std::string fail = detail::validate_B(bf, d.zeta1, d.zeta2, d.kappa);
    if (!fail.empty() && d.M_g > d.kappa + 1e-13) {
        // increasing-branch preimage of m_g
        double lo = 0.0, hi = d.u_peak;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (bf(mid) < d.m_g)
                lo = mid;
            else
                hi = mid;
        }
        d.zeta1 = 0.5 * (lo + hi);
        d.zeta_construction = "(increasing-branch preimage of m_g, M_g)";
        fail = detail::validate_B(bf, d.zeta1, d.zeta2, d.kappa);
    }
    d.b_valid = fail.empty();
    d.b_failure = fail;
    return d;
}

/// Running-maximum envelope: gbar(u) = max_{s in [0,u]} g(s). Nondecreasing,
/// gbar >= g, and for the (unimodal) named families the positive fixed point
/// is M_g. The peak here is the global one, not the [0, kappa] maximizer.
inline BirthFunction envelope_upper(const BirthFunction& bf) {
    double hi = bf.scan_max();
    try {
        hi = std::max(hi, 10.0 * kappa(bf));
    } catch (const std::domain_error&) {
    }
    const double peak = detail::global_argmax(bf, hi);
    const BirthFunction base = bf;
    return BirthFunction::custom(
        bf.name() + "_upper_envelope",
        [base, peak](double u) { return base(std::min(u, peak)); },
        [base, peak](double u) { return u < peak ? base.deriv(u) : 0.0; }, hi);
}

}  // namespace semiwave
