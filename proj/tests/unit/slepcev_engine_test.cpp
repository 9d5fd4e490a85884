#include <doctest.h>

#include <cmath>
#include <random>

#include "nle/analytic_oracles.hpp"
#include "nle/diagnostics.hpp"
#include "nle/errors.hpp"
#include "nle/slepcev_engine.hpp"
#include "nle/weak_engine.hpp"
#include "test_support.hpp"

using namespace nle;

namespace {

SlepcevConfig config(double t_end, std::optional<double> tracked = -1.0 + 1e-12) {
    SlepcevConfig cfg;
    cfg.stepper.t_end = t_end;
    cfg.stepper.tracked_level = tracked;
    return cfg;
}

}  // namespace

TEST_CASE("zero kernel reproduces the local solver") {
    const Grid g = Grid::make(1, 4.0, 401);
    const ScalarField u0 = make_signed_initial(g, IntervalShape{0.3, 1.0});
    const ExternalVelocity c1 = ExternalVelocity::constant(-0.8);
    const KernelSpec zero = KernelSpec::zero(1, g.h());
    const Trajectory s = solve_slepcev(u0, zero, c1, config(0.5));
    StepControl ctrl = slepcev_step_control(zero, c1, config(0.5).stepper);
    const Trajectory l = solve_fixed_speed(u0, [g](double, double) { return SpeedField::constant(g, -0.8); }, ctrl);
    REQUIRE(s.steps == l.steps);
    CHECK(sup_distance(s.back(), l.back()) <= 1e-12);
}

TEST_CASE("negative kernels are refused") {
    const Grid g = Grid::make(1, 2.0, 101);
    const KernelSpec k = KernelSpec::from_function(1, g.h(), 0.2, [](const Point&) { return -1.0; });
    CHECK_THROWS_WITH_AS(solve_slepcev(make_signed_initial(g, IntervalShape{0.0, 0.5}), k,
                                       ExternalVelocity::constant(0.0), config(0.1)),
                         doctest::Contains("c0"), ConfigError);
}

TEST_CASE("radial data stays radial") {
    const Grid g = Grid::make(2, 1.5, 121);
    const ScalarField u0 = make_signed_initial(g, DiskShape{{0.0, 0.0}, 0.3});
    const KernelSpec k = KernelSpec::cone(2, g.h(), 0.4);
    const Trajectory tr = solve_slepcev(u0, k, ExternalVelocity::constant(0.3), config(0.3, -0.5));
    const ScalarField& f = tr.back();
    // Front radius along the axes and the diagonals.
    auto along = [&](double cx, double cy) {
        double r = 0.0;
        for (double s = 0.0; s < 1.4; s += g.h() / 4) {
            const double x = s * cx, y = s * cy;
            const int i = int(std::lround((x - g.lower(0)) / g.h())), j = int(std::lround((y - g.lower(1)) / g.h()));
            if (f[g.index(i, j)] >= 0.0) r = s;
        }
        return r;
    };
    const double d = std::sqrt(0.5);
    const double rs[] = {along(1, 0), along(0, 1), along(-1, 0), along(0, -1), along(d, d), along(-d, d)};
    const double lo = *std::min_element(std::begin(rs), std::end(rs)), hi = *std::max_element(std::begin(rs), std::end(rs));
    CHECK(hi - lo <= 2 * g.h());
}

TEST_CASE("counterexample data, shrinking phase") {
    const Grid g = Grid::make(1, 4.0, 801);
    const ScalarField u0 = make_signed_initial(g, IntervalShape{0.0, 1.0});
    const KernelSpec k = KernelSpec::box(1, g.h(), 3.0);
    const ExternalVelocity c1 = ExternalVelocity::of_time(Example32Spec::c1, 0.5);
    const Trajectory tr = solve_slepcev(u0, k, c1, config(0.75, -0.02));
    for (double t : {0.25, 0.5, 0.75}) {
        const ScalarField& f = tr.at_time(t);
        CHECK(std::abs(test::right_crossing(f) - x1(t)) <= 3 * g.h());
        CHECK(std::abs(test::left_crossing(f) + x1(t)) <= 3 * g.h());
    }
}

TEST_CASE("discrete comparison") {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const Grid g = Grid::make(1, 2.0, 161);
    for (int trial = 0; trial < 5; ++trial) {
        const double r = 0.3 + 0.3 * U(rng), lift = 0.2 * U(rng);
        ScalarField u0 = make_signed_initial(g, IntervalShape{0.1 * U(rng), r});
        ScalarField v0 = u0;
        for (std::size_t i = 0; i < g.size(); ++i) v0[i] = std::min(1.0, u0[i] + lift * U(rng));
        const KernelSpec k = KernelSpec::cone(1, g.h(), 0.2 + 0.3 * U(rng), U(rng));
        const ExternalVelocity c1 = ExternalVelocity::constant(U(rng) - 0.7);
        SlepcevConfig cfg = config(0.3, std::nullopt);
        const Trajectory a = solve_slepcev(u0, k, c1, cfg), b = solve_slepcev(v0, k, c1, cfg);
        for (std::size_t s = 0; s < a.frames.size(); ++s)
            for (std::size_t i = 0; i < g.size(); ++i) CHECK(a.frames[s][i] <= b.frames[s][i]);
    }
}

TEST_CASE("binned mode tracks exact mode") {
    const Grid g = Grid::make(1, 4.0, 401);
    const ScalarField u0 = make_signed_initial(g, IntervalShape{0.0, 0.5});
    const KernelSpec k = KernelSpec::box(1, g.h(), 0.5, 0.2);
    const ExternalVelocity c1 = ExternalVelocity::constant(0.1);
    SlepcevConfig ex = config(0.5), bn = config(0.5);
    bn.mode = SlepcevMode::binned(64);
    const Trajectory a = solve_slepcev(u0, k, c1, ex), b = solve_slepcev(u0, k, c1, bn);
    CHECK(std::abs(test::right_crossing(a.back()) - test::right_crossing(b.back())) <= 2 * g.h());
}

TEST_CASE("extremal solutions") {
    SUBCASE("zero kernel: the speeds coincide") {
        const Grid g = Grid::make(1, 4.0, 201);
        const ScalarField u0 = make_signed_initial(g, IntervalShape{0.0, 1.0});
        const KernelSpec zero = KernelSpec::zero(1, g.h());
        const ExternalVelocity c1 = ExternalVelocity::constant(0.5);
        const SlepcevConfig cfg = config(0.5);
        const Trajectory u = solve_slepcev(u0, zero, c1, cfg);
        const ExtremalPair p = extremal_solutions(u, zero, c1, slepcev_step_control(zero, c1, cfg.stepper));
        CHECK(p.sup_gap == 0.0);
        CHECK(p.unique);
        CHECK(p.sets_match);
    }
    SUBCASE("expanding front is unique") {
        const Grid g = Grid::make(1, 4.0, 401);
        const ScalarField u0 = make_signed_initial(g, IntervalShape{0.0, 0.5});
        const KernelSpec k = KernelSpec::box(1, g.h(), 0.5, 0.2);
        const ExternalVelocity c1 = ExternalVelocity::constant(0.1);
        const SlepcevConfig cfg = config(1.0);
        const Trajectory u = solve_slepcev(u0, k, c1, cfg);
        const ExtremalPair p = extremal_solutions(u, k, c1, slepcev_step_control(k, c1, cfg.stepper));
        CHECK(p.sup_gap <= 3 * g.h());
        CHECK(p.unique);
        CHECK(p.sets_match);
        for (std::size_t s = 0; s < p.rho_plus.size(); ++s)
            for (std::size_t i = 0; i < g.size(); ++i) {
                CHECK(p.rho_minus[s][i] <= p.rho_plus[s][i]);
                CHECK(p.v_minus.frames[s][i] <= p.v_plus.frames[s][i]);
            }
    }
}

TEST_CASE("window extremum is the Oleinik-Lax formula") {
    const Grid g = Grid::make(1, 3.0, 301);
    auto u0 = [](double x) { return std::clamp(0.4 - std::abs(x) + 0.2 * std::sin(5 * x), -1.0, 1.0); };
    ScalarField u(g, 0.0);
    for (int i = 0; i < g.n(); ++i) u[i] = u0(g.coord(0, i));
    for (double r : {0.0, 0.013, 0.25}) {
        const ScalarField up = window_extremum(u, r, true), down = window_extremum(u, r, false);
        for (int i = 40; i < 260; ++i) {
            const double x = g.coord(0, i);
            CHECK(std::abs(up[i] - oleinik_lax_1d(u0, x, Extremum::sup, r)) <= 2 * g.h() * g.h() * 25 + 1e-12);
            CHECK(std::abs(down[i] - oleinik_lax_1d(u0, x, Extremum::inf, r)) <= 2 * g.h() * g.h() * 25 + 1e-12);
        }
    }
}

TEST_CASE("counterexample family") {
    const Grid g = Grid::make(1, 4.0, 801);
    const Counterexample one = counterexample_family([](double) { return 1.0; }, g);
    const Counterexample zero = counterexample_family([](double) { return 0.0; }, g);
    CHECK(std::abs(one.y.back() - 1.0) <= 1e-6);
    CHECK(std::abs(zero.y.back() - 1.0 / 3.0) <= 1e-6);
    CHECK(one.u.back().time == doctest::Approx(2.0));
    CHECK(sup_distance(one.u.back(), zero.u.back()) >= 0.25);
    for (const auto* ce : {&one, &zero}) {
        const SandwichReport sw = check_sandwich(ce->u, ce->chi, 0.0);
        CHECK(sw.out_of_band == 0);
        const auto ind = superlevel_indicator(ce->u.back(), -kLevelRoundoff, false);
        CHECK(std::abs(max_radius(ind) - ce->y.back()) <= 4 * g.h());
    }
    // The family is the exact (clamped) solution on the grid.
    const GammaFn one_fn = [](double) { return 1.0; };
    for (std::size_t s = 0; s < one.u.frames.size(); s += 37) {
        const auto& f = one.u.frames[s];
        for (int i = 100; i < 700; i += 7) CHECK(std::abs(f[i] - std::clamp(exact_U(one_fn, g.coord(0, i), f.time, 1e-3), -1.0, 1.0)) <= 1e-6);
    }
    CHECK_THROWS_AS(counterexample_family([](double t) { return t < 1.5 ? 0.5 : 2.0; }, g), ConfigError);
    CHECK_THROWS_AS(counterexample_family([](double) { return 1.0; }, Grid::make(2, 4.0, 51)), ConfigError);
}
