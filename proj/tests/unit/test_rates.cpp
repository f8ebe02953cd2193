#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "smalldev/error.hpp"
#include "smalldev/rates.hpp"

using namespace smalldev;

namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

GammaTable table() {
    return GammaTable({{0.0, kPi2 / 2, 0.0}, {0.5, 6.4, 0.1}, {1.0, 10.7, 0.3}, {2.0, 35.4, 1.3}});
}

}  // namespace

TEST_CASE("Mogulskii rate") {
    CHECK(mogulskii_rate(1, -1, 1) == doctest::Approx(-kPi2 / 8));
    CHECK(mogulskii_rate(1, -1, 1) == doctest::Approx(-1.2337).epsilon(1e-4));
    CHECK(mogulskii_rate(4, -1, 1) == doctest::Approx(4 * mogulskii_rate(1, -1, 1)));
    CHECK(mogulskii_rate(1, -2, 2) == doctest::Approx(-kPi2 / 32));
    CHECK_THROWS_AS(mogulskii_rate(1, 0.5, 1), Error);
    CHECK_THROWS_AS(mogulskii_rate(0, -1, 1), Error);
}

TEST_CASE("Shao rate") {
    CHECK(shao_rate(1, 1) == doctest::Approx(-kPi2 / 8));
    CHECK(shao_rate(2, 1) == doctest::Approx(-kPi2 / 4));
    for (double c : {0.5, 1.0, 3.0}) CHECK(shao_rate(1.7, c) == doctest::Approx(mogulskii_rate(1.7, -c, c)));
}

TEST_CASE("quenched rate from a gamma table") {
    const auto t = table();
    CHECK(rwre_rate(0.0, 1.3, -1, 2, t).predicted == doctest::Approx(mogulskii_rate(1.3, -1, 2)));
    const auto r = rwre_rate(1.0, 1.0, -1, 1, t);
    CHECK(r.predicted <= -kPi2 * 2 / 8);
    CHECK(r.predicted == doctest::Approx(-10.7 / 4));
    CHECK(r.ci == doctest::Approx(0.3 / 4));
    CHECK(r.gamma == doctest::Approx(10.7));
    try {
        rwre_rate(9.0, 1.0, -1, 1, t);
        FAIL("expected TableGap");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TableGap);
    }
}

TEST_CASE("table interpolation widens the CI between nodes") {
    const auto t = table();
    const auto mid = t.lookup(0.75);
    CHECK(mid.gamma == doctest::Approx(0.5 * (6.4 + 10.7)));
    CHECK(mid.ci == doctest::Approx(0.5 * (0.1 + 0.3) + 0.25 * (10.7 - 6.4)));
    CHECK(t.lookup(1.0).ci == doctest::Approx(0.3));
    CHECK_THROWS_AS(t.lookup(-0.1), Error);
}

TEST_CASE("invariants: monotone in sigma_A and window scaling") {
    const auto t = table();
    double prev = 0.0;
    for (double a2 = 0.0; a2 <= 4.0; a2 += 0.25) {
        const double p = rwre_rate(a2, 1.0, -1, 1, t).predicted;
        CHECK(p <= prev + 1e-12);
        prev = p;
    }
    for (double s : {0.5, 2.0, 3.0}) {
        CHECK(rwre_rate(0.7, 1.2, -s, 2 * s, t).predicted ==
              doctest::Approx(rwre_rate(0.7, 1.2, -1, 2, t).predicted / (s * s)));
        CHECK(mogulskii_rate(1.2, -s, 2 * s) == doctest::Approx(mogulskii_rate(1.2, -1, 2) / (s * s)));
    }
}

TEST_CASE("C_gh") {
    std::vector<double> g(101, -0.7), h(101, 1.3);
    CHECK(c_gh(g, h) == 1.0 / 4.0);
    std::vector<double> g2(202, -0.7), h2(202, 1.3);  // odd interval count
    CHECK(c_gh(g2, h2) == doctest::Approx(0.25).epsilon(1e-15));
    const auto zero = [](double) { return 0.0; };
    const auto lin = [](double s) { return 1.0 + s; };
    CHECK(std::abs(c_gh(zero, lin) - 0.5) < 1e-8);
    std::vector<double> gz(101), hz(101), gf(201), hf(201);
    for (int i = 0; i <= 100; ++i) hz[i] = 1.0 + i / 100.0;
    for (int i = 0; i <= 200; ++i) hf[i] = 1.0 + i / 200.0;
    CHECK(std::abs(c_gh(gz, hz) - c_gh(gf, hf)) < 1e-8);
    std::vector<double> bad = hz;
    bad[50] = -1.0;
    CHECK_THROWS_AS(c_gh(gz, bad), Error);
    CHECK_THROWS_AS(c_gh(std::vector<double>(50, 0.0), std::vector<double>(50, 1.0)), Error);
}

TEST_CASE("quenched vs annealed gap") {
    const auto t = table();
    CHECK(quenched_vs_annealed_gap(0.0, 1.0, 1.0, t).gap == doctest::Approx(0.0).epsilon(1e-12));
    const auto g = quenched_vs_annealed_gap(1.0, 1.0, 1.0, t);
    CHECK(g.gap <= -kPi2 / 8);
    CHECK(g.recentered == doctest::Approx(shao_rate(1, 1)));
    for (const auto& e : t.entries()) {
        if (e.beta > 0 && e.gamma >= kPi2 * (1 + e.beta * e.beta) / 2) {
            CHECK(quenched_vs_annealed_gap(e.beta * e.beta, 1.0, 1.0, t).gap < 0.0);
        }
    }
}

TEST_CASE("gamma table CSV") {
    std::istringstream in(
        "# smalldev 0.1.0 seed=1 config=0\n"
        "beta,t,mean_xbar,var_xbar,gamma_hat,ci\n"
        "1,2,20,1,10.5,0.3\n1,3,30,1,10.5,0.3\n0,2,10,0,4.93,0.01\n");
    const auto t = GammaTable::read_csv(in);
    REQUIRE(t.entries().size() == 2);
    CHECK(t.entries()[0].beta == 0.0);
    CHECK(t.lookup(1.0).gamma == 10.5);
    CHECK_THROWS_AS(GammaTable::load("/nonexistent.csv"), Error);
}
