#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "semiwave/rdwave.hpp"

using namespace semiwave;

namespace {

FieldHistoryFn tanh_step(double kap, double z0 = 0.0) {
    return [kap, z0](double, double z) {
        return 0.5 * kap * (1.0 + std::tanh(0.5 * (z - z0)));
    };
}

}  // namespace

TEST_CASE("equilibria are exact fixed points of the stepper") {
    const auto bf = BirthFunction::nicholson(2.0);
    const double kap = kappa(bf);
    GridSpec grid = make_shift_aligned_grid(-10.0, 10.0, 0.1, 1.5, 1.0);
    ComovingOptions opts;
    opts.left = Boundary::Neumann0;
    opts.right = Boundary::Neumann0;

    for (double level : {0.0, kap}) {
        ComovingStepper st(bf, 1.5, 1.0, grid,
                           [level](double, double) { return level; }, opts);
        for (int k = 0; k < 200; ++k) st.step();
        for (double v : st.field()) REQUIRE(v == Catch::Approx(level).margin(1e-13));
    }
}

TEST_CASE("identity birth function reduces to the linear solver") {
    const auto ident = BirthFunction::custom("identity", [](double u) { return u; },
                                             [](double) { return 1.0; }, 10.0);
    const double c = 1.5, h = 1.0;
    GridSpec grid = make_shift_aligned_grid(-15.0, 15.0, 0.1, c, h);
    const FieldHistoryFn init = [](double, double z) {
        return std::exp(-0.5 * z * z);
    };
    ComovingOptions copts;
    copts.right = Boundary::Dirichlet0;
    const auto nl = solve_comoving(ident, c, h, grid, init, 2.0, {1.0, 2.0}, copts);

    FdOptions lopts;  // both Dirichlet by default
    const auto lin = solve_fd({-c, -1.0, 1.0, -c * h, h}, grid, init, 2.0, {1.0, 2.0}, lopts);
    for (std::size_t i = 0; i < nl.outputs.size(); ++i) {
        double worst = 0.0;
        for (std::size_t j = 0; j < grid.n; ++j)
            worst = std::max(worst,
                             std::abs(nl.outputs[i].u[j] - lin.outputs[i].u[j]));
        REQUIRE(worst < 1e-12);
    }
}

TEST_CASE("zero history stays zero, blow-up guard trips on growth") {
    const auto bf = BirthFunction::nicholson(2.0);
    GridSpec grid = make_shift_aligned_grid(-10.0, 10.0, 0.1, 1.0, 1.0);
    const auto res = solve_comoving(bf, 1.0, 1.0, grid,
                                    [](double, double) { return 0.0; }, 1.0, {1.0});
    for (double v : res.outputs[0].u) REQUIRE(v == 0.0);

    const auto grow = BirthFunction::custom("tenfold", [](double u) { return 10.0 * u; },
                                            [](double) { return 10.0; }, 100.0);
    ComovingOptions opts;
    opts.guard_max = 5.0;
    opts.left = Boundary::Neumann0;
    opts.right = Boundary::Neumann0;
    try {
        solve_comoving(grow, 1.0, 1.0, grid, [](double, double) { return 1.0; }, 5.0,
                       {5.0}, opts);
        FAIL("expected blow-up guard");
    } catch (const NumericalError& e) {
        CHECK(e.last_valid_time >= 0.0);
        CHECK(e.last_valid_time < 5.0);
    }
}

TEST_CASE("profile relaxation: Nicholson p = 2, c = 3 wavefront") {
    const auto bf = BirthFunction::nicholson(2.0);
    const double kap = kappa(bf);
    const double c = 3.0, h = 1.0;
    GridSpec grid = make_shift_aligned_grid(-185.0, 45.0, 0.06, c, h);
    ProfileOptions opts;
    opts.max_time = 120.0;
    const WaveProfile prof = compute_profile(bf, c, h, grid, opts);

    REQUIRE(prof.converged);
    CHECK(prof.residual_sup < 1e-6);
    CHECK(prof.left_tail_ok);
    CHECK(prof.range_ok);
    CHECK_FALSE(prof.speed_warning);
    CHECK(prof.value_at(grid.x_max - 5.0) == Catch::Approx(kap).margin(1e-4));
    CHECK(prof.anchored_value(0.0) == Catch::Approx(0.5 * kap).margin(1e-10));
    // monotone tail on the left of the anchor
    double prev = -1.0;
    for (double off = -20.0; off <= 0.0; off += 1.0) {
        const double v = prof.anchored_value(off);
        REQUIRE(v >= prev - 1e-12);
        prev = v;
    }
}

TEST_CASE("profile relaxation: non-monotone regime lands in I_g") {
    const auto bf = BirthFunction::nicholson(std::exp(1.5));
    const double h = 0.5;
    const double c = speed_threshold(lipschitz_global(bf), h) + 1.0;
    GridSpec grid = make_shift_aligned_grid(-50.0, 40.0, 0.05, c, h);
    ProfileOptions opts;
    opts.max_time = 150.0;
    const WaveProfile prof = compute_profile(bf, c, h, grid, opts);
    REQUIRE(prof.converged);
    CHECK(prof.residual_sup < 1e-6);
    CHECK(prof.range_ok);
    // the sharper interval of the global-stability theorem on the right half
    const IntervalData d = interval_data(bf);
    CHECK(prof.range_min >= d.m_K - 1e-3);
    CHECK(prof.range_max <= d.K + 1e-3);
}

TEST_CASE("translation equivariance of the evolution and the anchor") {
    const auto bf = BirthFunction::nicholson(2.0);
    const double kap = kappa(bf);
    const double c = 1.5, h = 1.0;
    GridSpec grid = make_shift_aligned_grid(-40.0, 40.0, 0.1, c, h);
    const double dx = grid.dx();
    const double shift = 7.0 * dx;

    const auto a = solve_comoving(bf, c, h, grid, tanh_step(kap, 0.0), 5.0, {5.0});
    const auto b = solve_comoving(bf, c, h, grid, tanh_step(kap, shift), 5.0, {5.0});
    const double anchor_a = detail::find_anchor(a.outputs[0].u, grid, 0.5 * kap);
    const double anchor_b = detail::find_anchor(b.outputs[0].u, grid, 0.5 * kap);
    CHECK(anchor_b - anchor_a == Catch::Approx(shift).margin(1e-9));
    double worst = 0.0;
    for (std::size_t j = 7; j < grid.n; ++j)
        worst = std::max(worst,
                         std::abs(b.outputs[0].u[j] - a.outputs[0].u[j - 7]));
    CHECK(worst < 1e-10);
}

TEST_CASE("leading edge: zero perturbation keeps both sides at zero") {
    const auto bf = BirthFunction::nicholson(2.0);
    const double h = 1.0;
    const double c = speed_threshold(2.0, h) + 0.5;
    GridSpec grid = make_shift_aligned_grid(-60.0, 30.0, 0.08, c, h);
    ProfileOptions popts;
    popts.max_time = 60.0;
    popts.rate_tol = 1e-7;
    const WaveProfile prof = compute_profile(bf, c, h, grid, popts);
    REQUIRE(prof.converged);

    PerturbationSpec none;
    none.q_amp = 1e-30;  // effectively zero, keeps ratios well defined
    none.center = prof.anchor + 2.0;
    none.b = none.center - none.width;
    const LeadingEdgeReport rep = experiment_leading_edge(prof, bf, none, 2.0, 0.5);
    CHECK(rep.majorization_ok);
    for (const auto& row : rep.rows) CHECK(row.weighted_sup < 1e-25);
}

TEST_CASE("leading edge: compact bump is majorized, interior weight decays") {
    const auto bf = BirthFunction::nicholson(2.0);
    const double h = 1.0;
    const double c = speed_threshold(2.0, h) + 0.5;
    GridSpec grid = make_shift_aligned_grid(-70.0, 45.0, 0.08, c, h);
    ProfileOptions popts;
    popts.max_time = 80.0;
    popts.rate_tol = 1e-7;
    const WaveProfile prof = compute_profile(bf, c, h, grid, popts);
    REQUIRE(prof.converged);

    PerturbationSpec bump;
    bump.q_amp = 0.05;
    bump.width = 2.0;
    bump.center = prof.anchor + 2.0;
    bump.b = bump.center - bump.width;
    bump.lambda_c = prof.lambda_c;

    SECTION("default weight lambda1: critical linear majorant") {
        const LeadingEdgeReport rep = experiment_leading_edge(prof, bf, bump, 8.0, 0.5);
        CHECK(rep.majorization_ok);
        CHECK(std::abs(rep.gamma) < 1e-12);  // -p = q exactly at lambda1
        CHECK(-rep.linear.p == Catch::Approx(rep.linear.q).epsilon(1e-12));
    }
    SECTION("interior weight gives a strictly negative gamma") {
        const SpeedData sd = lambda_interval(c, 2.0, h);
        const double lam_mid = 0.5 * (sd.lambda1 + sd.lambda2);
        const LeadingEdgeReport rep =
            experiment_leading_edge(prof, bf, bump, 10.0, 0.5, lam_mid);
        CHECK(rep.gamma < -1e-3);
        CHECK(rep.majorization_ok);
        REQUIRE(rep.fit_valid);
        CHECK(rep.weighted_fit.rate <= rep.gamma + 0.05);
    }
}

TEST_CASE("uniqueness: identical data give identical anchored profiles") {
    const auto bf = BirthFunction::nicholson(2.0);
    const double kap = kappa(bf);
    const double h = 1.0;
    const double c = speed_threshold(2.0, h) + 0.5;
    GridSpec grid = make_shift_aligned_grid(-60.0, 30.0, 0.1, c, h);
    const double lam1 = lambda_interval(c, 2.0, h).lambda1;
    ProfileOptions opts;
    opts.max_time = 80.0;
    opts.rate_tol = 1e-7;
    const UniquenessReport rep =
        experiment_uniqueness(bf, c, h, grid, logistic_front_datum(kap, lam1),
                              logistic_front_datum(kap, lam1), opts);
    REQUIRE(rep.conclusive);
    CHECK(rep.hypothesis_ok);
    CHECK(rep.sup_distance == 0.0);
}

TEST_CASE("uniqueness: shallow-tail datum violates the weighted hypothesis") {
    const auto bf = BirthFunction::nicholson(2.0);
    const double kap = kappa(bf);
    const double h = 1.0;
    const double c = speed_threshold(2.0, h) + 0.5;
    GridSpec grid = make_shift_aligned_grid(-50.0, 25.0, 0.1, c, h);
    const double lam1 = lambda_interval(c, 2.0, h).lambda1;
    const FieldHistoryFn shallow = [kap](double, double z) {
        return z >= 0 ? kap : kap * std::exp(0.02 * z);  // slower than lambda1
    };
    ProfileOptions opts;
    opts.max_time = 0.5;  // hypothesis check only; no need to converge
    const UniquenessReport rep = experiment_uniqueness(
        bf, c, h, grid, logistic_front_datum(kap, lam1), shallow, opts);
    CHECK_FALSE(rep.hypothesis_ok);
    CHECK_FALSE(rep.conclusive);
}

TEST_CASE("comparison lemma: directed cases") {
    const double h = 0.8;
    GridSpec grid = make_shift_aligned_grid(-20.0, 20.0, 0.1, 1.2, h);
    SECTION("identical monotone problems stay equal") {
        const auto bf = BirthFunction::nicholson(2.0);
        const double kap = kappa(bf);
        const ComparisonReport rep = check_comparison(
            bf, bf, 1.2, h, grid, tanh_step(kap), tanh_step(kap), 2.0);
        REQUIRE(rep.pre_ok);
        CHECK(rep.order_ok);
        CHECK(rep.worst_violation <= 1e-14);
    }
    SECTION("g below its running-max envelope") {
        const auto bf = BirthFunction::nicholson(std::exp(1.5));
        const auto env = envelope_upper(bf);
        const double kap = kappa(bf);
        const ComparisonReport rep = check_comparison(
            bf, env, 1.2, h, grid, tanh_step(kap), tanh_step(kap), 4.0);
        REQUIRE(rep.pre_ok);
        CHECK(rep.order_ok);
        // squeeze upper half: the envelope run stays below K + eps
        const IntervalData d = interval_data(bf);
        CHECK(rep.final_sup_v2 <= d.K + 1e-6);
    }
    SECTION("ordered Nicholson pair with ordered data") {
        const auto g1 = BirthFunction::nicholson(1.8);
        const auto g2 = BirthFunction::nicholson(2.2);
        const FieldHistoryFn lo = [](double, double z) {
            return 0.3 / (1.0 + std::exp(-z));
        };
        const FieldHistoryFn hi = [&lo](double s, double z) {
            return lo(s, z) + 0.2 * std::exp(-0.25 * z * z);
        };
        const ComparisonReport rep = check_comparison(g1, g2, 1.2, h, grid, lo, hi, 3.0);
        REQUIRE(rep.pre_ok);
        CHECK(rep.order_ok);
    }
    SECTION("hypothesis violations are reported") {
        const auto g1 = BirthFunction::nicholson(2.2);
        const auto g2 = BirthFunction::nicholson(1.8);  // g1 > g2
        const FieldHistoryFn lo = [](double, double z) {
            return 0.3 / (1.0 + std::exp(-z));
        };
        const ComparisonReport rep = check_comparison(g1, g2, 1.2, h, grid, lo, lo, 1.0);
        CHECK_FALSE(rep.pre_ok);
    }
}
