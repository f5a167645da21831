#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "semiwave/halanay.hpp"

using namespace semiwave;

namespace {

HistoryFn random_trig_history(std::mt19937_64& rng, double amp) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const double a0r = U(rng), a0i = U(rng), a1 = U(rng), a2 = U(rng);
    const double w1 = 2.0 + 2.0 * U(rng), w2 = 4.0 + U(rng), ph = 3.0 * U(rng);
    return [=](double s) {
        return cplx(amp * (a0r + a1 * std::cos(w1 * s + ph)),
                    amp * (a0i + a2 * std::sin(w2 * s)));
    };
}

}  // namespace

TEST_CASE("undelayed exponential") {
    ScalarDDE p;
    p.sigma = {-1.0, 0.0};
    p.k = {0.0, 0.0};
    p.h = 1.0;
    p.t_end = 3.0;
    p.n_per_delay = 64;
    p.history = [](double) { return cplx(1.0, 0.0); };
    const Trajectory tr = integrate_dde(p);
    double worst = 0.0;
    for (std::size_t j = tr.n_delay; j < tr.values.size(); ++j)
        worst = std::max(worst,
                         std::abs(tr.values[j] - std::exp(-tr.times[j])));
    CHECK(worst < 1e-8);
}

TEST_CASE("method of steps: piecewise polynomial segments are exact") {
    ScalarDDE p;
    p.sigma = {0.0, 0.0};
    p.k = {-1.0, 0.0};
    p.h = 1.0;
    p.t_end = 2.0;
    p.n_per_delay = 32;
    p.history = [](double) { return cplx(1.0, 0.0); };
    const Trajectory tr = integrate_dde(p);
    for (std::size_t j = tr.n_delay; j < tr.values.size(); ++j) {
        const double t = tr.times[j];
        // r = 1 - t on [0,1]; r = 1 - t + (t-1)^2/2 on [1,2]
        const double exact = t <= 1.0 ? 1.0 - t : 1.0 - t + 0.5 * (t - 1) * (t - 1);
        REQUIRE(std::abs(tr.values[j].real() - exact) < 1e-12);
        REQUIRE(std::abs(tr.values[j].imag()) < 1e-15);
    }
}

TEST_CASE("complex critical case: |r| bounded by the history sup") {
    ScalarDDE p;
    p.sigma = {-1.0, 5.0};
    p.k = std::polar(1.0, 3.141592653589793 / 3.0);
    p.h = 0.5;
    p.t_end = 4.0;
    p.n_per_delay = 128;
    p.history = [](double s) { return cplx(std::cos(s), 0.3); };
    const double lam = solve_scalar_char(p.sigma.real(), std::abs(p.k), p.h);
    CHECK(lam == 0.0);  // -Re sigma = |k| exactly
    const HalanayReport rep = check_halanay(p);
    CHECK(rep.ok);
    CHECK(rep.lambda == 0.0);
}

TEST_CASE("linearity of the integrator") {
    std::mt19937_64 rng(99);
    ScalarDDE p;
    p.sigma = {-0.8, 1.2};
    p.k = {0.4, -0.6};
    p.h = 0.7;
    p.t_end = 3.0;
    p.n_per_delay = 32;
    p.history = random_trig_history(rng, 1.0);
    const Trajectory base = integrate_dde(p);

    const cplx alpha{2.5, -1.25};
    ScalarDDE ps = p;
    const HistoryFn h0 = p.history;
    ps.history = [h0, alpha](double s) { return alpha * h0(s); };
    const Trajectory scaled = integrate_dde(ps);
    for (std::size_t j = 0; j < base.values.size(); ++j) {
        const cplx want = alpha * base.values[j];
        REQUIRE(std::abs(scaled.values[j] - want) <=
                1e-13 * (1.0 + std::abs(want)));
    }
}

TEST_CASE("fourth-order convergence against a fine reference") {
    auto run = [](int n) {
        ScalarDDE p;
        p.sigma = {-1.0, 0.3};
        p.k = {0.4, -0.2};
        p.h = 1.0;
        p.t_end = 4.0;
        p.n_per_delay = n;
        p.history = [](double s) { return cplx(std::exp(0.7 * s), 0.2 * s); };
        return integrate_dde(p);
    };
    const Trajectory ref = run(1024);
    auto err = [&](const Trajectory& tr) {
        double worst = 0.0;
        for (std::size_t j = tr.n_delay; j < tr.values.size(); ++j)
            worst = std::max(worst, std::abs(tr.values[j] - ref.eval(tr.times[j])));
        return worst;
    };
    const double e64 = err(run(64));
    const double e128 = err(run(128));
    const double ratio = e64 / e128;
    CHECK(ratio > 11.0);
    CHECK(ratio < 22.0);
}

TEST_CASE("halanay bound: directed cases and random sweep") {
    SECTION("undelayed equality case") {
        ScalarDDE p;
        p.sigma = {-1.0, 0.0};
        p.k = {0.0, 0.0};
        p.h = 1.0;
        p.t_end = 2.0;
        p.n_per_delay = 32;
        p.history = [](double) { return cplx(1.0, 0.0); };
        const HalanayReport rep = check_halanay(p);
        CHECK(rep.ok);
        CHECK(rep.lambda == -1.0);
        CHECK(rep.worst_ratio == Catch::Approx(1.0).epsilon(1e-6));  // equality
    }
    SECTION("100 random contactive draws") {
        std::mt19937_64 rng(4242);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        for (int i = 0; i < 100; ++i) {
            ScalarDDE p;
            p.sigma = {-2.0, 4.0 * U(rng) - 2.0};
            p.k = std::polar(U(rng), 6.28 * U(rng));
            p.h = 1.0;
            p.t_end = 5.0;
            p.n_per_delay = 64;
            p.history = random_trig_history(rng, 0.5 + U(rng));
            const HalanayReport rep = check_halanay(p);
            REQUIRE(rep.ok);
        }
    }
    SECTION("growing case needs the e^{lambda h} prefactor") {
        ScalarDDE p;
        p.sigma = {0.5, 0.0};
        p.k = {1.0, 0.0};
        p.h = 1.0;
        p.t_end = 4.0;
        p.n_per_delay = 256;
        p.history = [](double) { return cplx(1.0, 0.0); };
        const HalanayReport rep = check_halanay(p);
        CHECK(rep.lambda > 0.0);
        CHECK(rep.ok);
    }
}

TEST_CASE("configuration errors") {
    ScalarDDE p;
    p.sigma = {-1.0, 0.0};
    p.k = {0.0, 0.0};
    p.h = 1.0;
    p.t_end = 1.0;
    p.history = [](double) { return cplx(1.0, 0.0); };
    p.dt = 0.3;  // does not divide h
    CHECK_THROWS_AS(integrate_dde(p), ConfigError);
    p.dt = 0.0;
    p.n_per_delay = 8;  // below the floor
    CHECK_THROWS_AS(integrate_dde(p), ConfigError);
}
