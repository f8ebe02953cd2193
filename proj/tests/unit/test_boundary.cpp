#include <doctest.h>

#include <cmath>

#include "smalldev/boundary.hpp"
#include "smalldev/env.hpp"
#include "smalldev/error.hpp"

using namespace smalldev;

TEST_CASE("constant windows scale with n^alpha") {
    const auto spec = BoundarySpec::constant(0.3, -1.0, 2.0);
    const auto w = window_bounds(spec, nullptr, 1000);
    REQUIRE(w.size() == 1001);
    CHECK(w[0].lo == doctest::Approx(-std::pow(1000.0, 0.3)));
    CHECK(w[500].hi == doctest::Approx(2.0 * std::pow(1000.0, 0.3)));
    CHECK(window_scale(0.3, 1000) == doctest::Approx(7.943282347));
    CHECK(exponent_scale(0.3, 100000) == doctest::Approx(std::pow(100000.0, 0.4)));
}

TEST_CASE("nesting constraints") {
    auto spec = BoundarySpec::constant(0.3, -1.0, 1.0);
    spec.entry = Interval{-0.5, 0.5};
    spec.exit = Interval{-1.0, 1.0};
    CHECK_NOTHROW(spec.validate(100));
    spec.entry = Interval{-1.0, 0.5};  // a0 must exceed a
    CHECK_THROWS_AS(spec.validate(100), Error);
    spec.entry = Interval{-0.5, 0.5};
    spec.exit = Interval{-1.5, 1.0};
    CHECK_THROWS_AS(spec.validate(100), Error);
    CHECK_THROWS_AS(BoundarySpec::constant(0.3, 0.5, 1.0).validate(10), Error);
    CHECK_THROWS_AS(BoundarySpec::constant(0.5, -1.0, 1.0).validate(10), Error);

    BoundarySpec crossing;
    crossing.mode = FunctionalWindow{[](double s) { return s - 0.5; }, [](double) { return 0.2; }};
    CHECK_THROWS_AS(crossing.validate(20), Error);
}

TEST_CASE("recentered window follows the quenched mean") {
    const auto envr = sample_environment(models::epsilon_model(), 60, 3);
    BoundarySpec spec;
    spec.alpha = 0.3;
    spec.mode = RecenteredWindow{1.0};
    spec.start_shift = 10;
    const auto w = window_bounds(spec, &envr, 50);
    const double r = std::pow(50.0, 0.3);
    for (std::size_t i = 0; i <= 50; ++i) {
        const double m = envr.moments(10 + i).first - envr.moments(10).first;
        CHECK(w[i].lo == doctest::Approx(m - r));
        CHECK(w[i].hi == doctest::Approx(m + r));
    }
    CHECK_THROWS_AS(window_bounds(spec, &envr, 51), Error);
}

TEST_CASE("functional and explicit windows") {
    BoundarySpec spec;
    spec.alpha = 0.25;
    spec.mode = FunctionalWindow{[](double) { return 0.0; }, [](double s) { return 1.0 + s; }};
    const auto w = window_bounds(spec, nullptr, 16);
    CHECK(w[16].hi == doctest::Approx(2.0 * 2.0));
    CHECK(w[8].hi == doctest::Approx(1.5 * 2.0));
    CHECK(w[3].lo == 0.0);

    BoundarySpec ex;
    ex.mode = ExplicitWindow{{-1, -2, -3}, {1, 2, 3}};
    const auto e = window_bounds(ex, nullptr, 2);
    CHECK(e[2].lo == -3.0);
    CHECK_THROWS_AS(window_bounds(ex, nullptr, 3), Error);
}
