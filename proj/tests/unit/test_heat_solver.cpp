#include <doctest.h>

#include <cmath>

#include "smalldev/error.hpp"
#include "smalldev/gamma_fn.hpp"
#include "smalldev/heat_solver.hpp"
#include "smalldev/rng.hpp"

using namespace smalldev;

namespace {

double solve_point(double a, double b, double x, double t, double beta, const WPath& w, HeatGrid grid = {}) {
    TubeProblem p;
    p.a = a;
    p.b = b;
    p.beta = beta;
    p.w = w;
    p.start = PointStart{x};
    return tube_survival_quenched(p, grid).probability();
}

}  // namespace

TEST_CASE("eigen series") {
    CHECK(tube_survival_fixed(0, 1, 0.5, 0.0) == 1.0);
    CHECK(tube_survival_fixed(0, 1, 0.0, 1.0) == 0.0);
    CHECK(tube_survival_fixed(0, 1, 1.0, 1.0) == 0.0);
    CHECK(std::abs(tube_survival_fixed(0, 1, 0.5, 1.0) - 0.009157) <= 1e-6);
    // frozen from tests/oracles/compute_oracles.py
    CHECK(tube_survival_fixed(0, 1, 0.5, 1.0) == doctest::Approx(0.00915699028976076).epsilon(1e-12));
    CHECK(tube_survival_fixed(0, 1, 0.3, 0.2) == doctest::Approx(0.383934269789147).epsilon(1e-12));
    CHECK(tube_survival_fixed(-1, 2, 0.0, 3.0) == doctest::Approx(0.212840838899944).epsilon(1e-12));
    CHECK_THROWS_AS(tube_survival_fixed(0, 1, 1.5, 1.0), Error);
}

TEST_CASE("W path sampling") {
    const auto w = sample_wpath(2.0, 0.01, 5, 3);
    REQUIRE(w.segments() == 200);
    CHECK(w.values[0] == 0.0);
    CHECK(w.at(0.005) == doctest::Approx(0.5 * w.values[1]));
    CHECK(sample_wpath(2.0, 0.01, 5, 3).values == w.values);
    CHECK(sample_wpath(2.0, 0.01, 5, 4).values != w.values);
    double s2 = 0.0;
    const auto big = sample_wpath(100.0, 0.01, 1);
    for (std::size_t i = 1; i < big.values.size(); ++i) s2 += std::pow(big.values[i] - big.values[i - 1], 2);
    CHECK(s2 / 10000.0 == doctest::Approx(0.01).epsilon(0.05));
}

TEST_CASE("fixed tube: solver vs series at the default grid") {
    const double series = tube_survival_fixed(0, 1, 0.5, 1.0);
    const double solver = solve_point(0, 1, 0.5, 1.0, 0.0, zero_wpath(1.0, 1e-3));
    CHECK(std::abs(solver - series) / series <= 1e-3);
}

TEST_CASE("beta = 0 ignores W; zero W ignores beta") {
    const double series = tube_survival_fixed(0, 1, 0.4, 0.8);
    const auto w = sample_wpath(0.8, 1e-3, 7);
    CHECK(std::abs(solve_point(0, 1, 0.4, 0.8, 0.0, w) - series) / series <= 1e-3);
    CHECK(std::abs(solve_point(0, 1, 0.4, 0.8, 2.0, zero_wpath(0.8, 1e-3)) - series) / series <= 1e-3);
}

TEST_CASE("refinement order in dx") {
    const double series = tube_survival_fixed(0, 2, 1.0, 4.0);
    const auto w = zero_wpath(4.0, 1e-2);
    const double e1 = std::abs(solve_point(0, 2, 1.0, 4.0, 0.0, w, {0.01, 1e-4}) - series);
    const double e2 = std::abs(solve_point(0, 2, 1.0, 4.0, 0.0, w, {0.005, 2.5e-5}) - series);
    CHECK(std::log2(e1 / e2) >= 1.8);
}

TEST_CASE("Brownian scaling") {
    const double base = solve_point(0, 1, 0.5, 1.0, 0.0, zero_wpath(1.0, 1e-2));
    const double scaled = solve_point(0, 2, 1.0, 4.0, 0.0, zero_wpath(4.0, 1e-2), {0.01, 1e-4});
    CHECK(std::abs(scaled - base) / base <= 1e-3);
}

TEST_CASE("reflecting sides conserve mass") {
    const double t = 1.0;
    const auto w = sample_wpath(t, 2.5e-4, 3);
    const std::size_t nodes = heat_intervals(0, 1, 0.005) + 1;
    const auto sol = solve_backward(0, 1, 1.0, w, HeatGrid{}, std::vector<double>(nodes, 1.0), SideCondition::Reflecting);
    for (double v : sol.values) CHECK(std::abs(std::exp(sol.log_scale) * v - 1.0) <= 1e-10 * t);
}

TEST_CASE("grid preconditions") {
    const auto w = zero_wpath(1.0, 1e-2);
    CHECK_THROWS_AS(solve_point(0, 1, 0.5, 1.0, 0.0, w, {0.01, 1e-4}), Error);
    CHECK_THROWS_AS(solve_point(0, 1, 0.5, 1.0, 0.0, w, {0.005, 3e-5}), Error);
}

TEST_CASE("lowest start and terminal window") {
    const auto w = sample_wpath(1.0, 2.5e-4, 11);
    TubeProblem p;
    p.beta = 1.0;
    p.w = w;
    p.start = LowestStart{default_entry_window(0, 1)};
    p.terminal = default_exit_window(0, 1);
    const auto lowest = tube_survival_quenched(p, HeatGrid{});
    CHECK(lowest.x >= 0.3 - 1e-12);
    CHECK(lowest.x <= 0.7 + 1e-12);
    for (double x : {0.3, 0.5, 0.7}) {
        p.start = PointStart{x};
        CHECK(lowest.log_prob <= tube_survival_quenched(p, HeatGrid{}).log_prob + 1e-12);
    }
    p.start = PointStart{0.5};
    const double with_terminal = tube_survival_quenched(p, HeatGrid{}).log_prob;
    p.terminal.reset();
    CHECK(with_terminal <= tube_survival_quenched(p, HeatGrid{}).log_prob);
}

TEST_CASE("beta = 1 solve vs path simulation") {
    // Z = B + W with W piecewise linear; per W segment Z moves with constant drift,
    // and the weight of a path is the bridge probability of not crossing either side.
    const double a = -1.5, b = 1.5, t = 2.0, x = 0.2;
    const auto w = sample_wpath(t, 4e-3, 21);
    const double solver = solve_point(a, b, x, t, 1.0, w);

    const std::size_t paths = 1000000;
    const std::size_t segs = w.segments();
    const double h = w.ds;
    const double sd = std::sqrt(h);
    auto rng = make_stream(99, "path-oracle", 0);
    double s = 0.0, s2 = 0.0;
    for (std::size_t k = 0; k < paths; ++k) {
        double z = x;
        double weight = 1.0;
        for (std::size_t i = 0; i < segs && weight > 0.0; ++i) {
            const double z1 = z + (w.values[i + 1] - w.values[i]) + sd * rng.normal();
            if (z1 <= a || z1 >= b) {
                weight = 0.0;
                break;
            }
            const double pa = std::exp(-2.0 * (z - a) * (z1 - a) / h);
            const double pb = std::exp(-2.0 * (b - z) * (b - z1) / h);
            weight *= std::max(0.0, 1.0 - pa - pb);
            z = z1;
        }
        s += weight;
        s2 += weight * weight;
    }
    const double mean = s / paths;
    const double se = std::sqrt((s2 / paths - mean * mean) / (paths - 1));
    CHECK(std::abs(solver - mean) <= 3.0 * se);
}
