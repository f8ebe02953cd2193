#include <doctest.h>

#include <cmath>
#include <numbers>

#include "smalldev/env.hpp"
#include "smalldev/error.hpp"

using namespace smalldev;

namespace {

std::shared_ptr<const EnvironmentModel> gaussian_pm1() {
    return std::make_shared<const EnvironmentModel>(std::vector<MixtureComponent>{
        {StepLaw::gaussian(1.0, 1.0), 0.5}, {StepLaw::gaussian(-1.0, 1.0), 0.5}});
}

// Closed-form oracle: trapezoid on a wide grid of the density.
double quadrature_abs_moment(double var, double lambda) {
    const double sd = std::sqrt(var);
    const int steps = 400000;
    const double lo = -14.0 * sd;
    const double h = 28.0 * sd / steps;
    double s = 0.0;
    for (int i = 0; i <= steps; ++i) {
        const double x = lo + i * h;
        const double f = std::pow(std::abs(x), lambda) * std::exp(-x * x / (2 * var)) / std::sqrt(2 * std::numbers::pi * var);
        s += (i == 0 || i == steps) ? 0.5 * f : f;
    }
    return s * h;
}

}  // namespace

TEST_CASE("sigma decomposition examples") {
    auto d = sigma_decomposition(*models::standard_gaussian());
    CHECK(d.sigmaA2 == doctest::Approx(0.0));
    CHECK(d.sigmaQ2 == doctest::Approx(1.0));

    d = sigma_decomposition(*gaussian_pm1());
    CHECK(d.sigmaA2 == doctest::Approx(1.0));
    CHECK(d.sigmaQ2 == doctest::Approx(1.0));

    d = sigma_decomposition(*models::epsilon_model());
    CHECK(d.sigmaA2 == doctest::Approx(1.0));
    CHECK(d.sigmaQ2 == doctest::Approx(1.0));
}

TEST_CASE("sigma decomposition rejects bad models") {
    EnvironmentModel shifted({{StepLaw::gaussian(0.5, 1.0), 1.0}});
    try {
        sigma_decomposition(shifted);
        FAIL("expected NonCentered");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonCentered);
    }
    EnvironmentModel frozen({{StepLaw::gaussian(0.0, 0.0), 1.0}});
    try {
        sigma_decomposition(frozen);
        FAIL("expected ZeroQuenchedVariance");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ZeroQuenchedVariance);
    }
    CHECK_THROWS_AS(EnvironmentModel({{StepLaw::gaussian(0.0, 1.0), 0.7}}), Error);
    CHECK_THROWS_AS(StepLaw::lattice(1.0, {{0, 0.5}, {1, 0.4}}), Error);
    CHECK_THROWS_AS(StepLaw::lattice(1.0, {{0, 1.2}, {1, -0.2}}), Error);
}

TEST_CASE("total variance identity") {
    for (const auto& model : {models::epsilon_model(), models::simple_walk(), gaussian_pm1()}) {
        const auto d = sigma_decomposition(*model);
        CHECK(d.sigmaA2 + d.sigmaQ2 == doctest::Approx(model->annealed_step_variance()).epsilon(1e-12));
    }
}

TEST_CASE("assumption report examples") {
    auto r = check_assumptions(*models::standard_gaussian(), 6.0, 6.0, 6.0, 0.3);
    CHECK(r.moments_finite);
    CHECK(r.h2_as);
    CHECK(r.h3_as);
    CHECK(r.lambda0_as == doctest::Approx(2.0 / 0.3));
    CHECK(r.lambda0_prob == doctest::Approx(1.0 / 0.3));

    r = check_assumptions(*models::epsilon_model(), 20.0, 4.0, 4.0, 0.3);
    CHECK(r.mean_abs_m_lambda1 == doctest::Approx(1.0));
    CHECK(r.h2_as);

    r = check_assumptions(*gaussian_pm1(), 4.0, 4.0, 3.0, 0.3);
    REQUIRE(r.quenched_u_moments.size() == 2);
    CHECK(r.quenched_u_moments[0] == doctest::Approx(3.0));
    CHECK(r.quenched_u_moments[1] == doctest::Approx(3.0));
    CHECK(r.annealed_u_moment == doctest::Approx(27.0));
    CHECK(r.moments_finite);

    CHECK_THROWS_AS(check_assumptions(*gaussian_pm1(), 2.0, 4.0, 3.0, 0.3), Error);
    CHECK_THROWS_AS(check_assumptions(*gaussian_pm1(), 4.0, 4.0, 3.0, 0.5), Error);
}

TEST_CASE("gaussian absolute moments: closed form vs frozen and quadrature oracles") {
    // frozen from tests/oracles/compute_oracles.py (mpmath quadrature)
    CHECK(StepLaw::gaussian(0, 1).abs_moment(2.5) == doctest::Approx(1.23326843799369).epsilon(1e-12));
    CHECK(StepLaw::gaussian(0, 2).abs_moment(3.7) == doctest::Approx(8.82107125604671).epsilon(1e-12));
    CHECK(StepLaw::gaussian(0, 0.5).abs_moment(4.0) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(StepLaw::gaussian(0, 1).abs_moment(0.5) == doctest::Approx(0.822178958662459).epsilon(1e-12));
    for (double lambda : {2.2, 3.0, 5.5}) {
        for (double var : {0.3, 1.0, 2.5}) {
            CHECK(StepLaw::gaussian(3.0, var).central_abs_moment(lambda) ==
                  doctest::Approx(quadrature_abs_moment(var, lambda)).epsilon(1e-8));
        }
    }
}

TEST_CASE("sample_environment examples") {
    auto model = models::epsilon_model();
    CHECK(sample_environment(model, 0, 5).length() == 0);
    const auto e1 = sample_environment(model, 1000, 42);
    const auto e2 = sample_environment(model, 1000, 42);
    CHECK(e1.indices() == e2.indices());
    CHECK(sample_environment(model, 1000, 43).indices() != e1.indices());

    const std::size_t n = 10000;
    const auto big = sample_environment(model, n, 7);
    double zeros = 0;
    for (auto i : big.indices()) zeros += (i == 0);
    CHECK(std::abs(zeros / n - 0.5) <= 3 * 0.5 / std::sqrt(double(n)));
}

TEST_CASE("quenched moments") {
    const auto g = sample_environment(models::standard_gaussian(), 50, 1);
    for (std::size_t k = 0; k <= 50; ++k) {
        CHECK(g.moments(k).first == 0.0);
        CHECK(g.moments(k).second == doctest::Approx(double(k)));
    }
    CHECK_THROWS_AS(g.moments(51), Error);

    // component 0 has mean +1, component 1 mean -1
    const QuenchedEnvironment eps(models::epsilon_model(), {0, 1, 0});
    CHECK(eps.moments(3).first == doctest::Approx(1.0));
    CHECK(eps.moments(3).second == doctest::Approx(3.0));

    const auto e = sample_environment(models::epsilon_model(), 40, 9);
    const auto s = e.shifted(2);
    for (std::size_t j = 0; j <= 40; ++j) {
        for (std::size_t k = j; k <= 40; ++k) {
            const auto sj = e.shifted(j);
            CHECK(e.moments(k).first - e.moments(j).first == sj.moments(k - j).first);
            CHECK(e.moments(k).second - e.moments(j).second == doctest::Approx(sj.moments(k - j).second));
        }
    }
    CHECK(e.moments(5).first - e.moments(2).first == s.moments(3).first);
    for (std::size_t k = 1; k <= 40; ++k) CHECK(e.moments(k).second >= e.moments(k - 1).second);
}

TEST_CASE("mean of M_1 over many environments") {
    const auto e = sample_environment(models::epsilon_model(), 100000, 11);
    const double mean = e.moments(100000).first / 100000.0;
    CHECK(std::abs(mean) <= 4.0 * 1.0 / std::sqrt(100000.0));
}

TEST_CASE("lattice step sampling matches the pmf") {
    const auto law = StepLaw::lattice(0.5, {{-1, 0.2}, {0, 0.3}, {3, 0.5}});
    CHECK(law.mean() == doctest::Approx(0.5 * (-0.2 + 1.5)));
    auto rng = make_stream(3, "test", 0);
    const int n = 200000;
    int threes = 0;
    for (int i = 0; i < n; ++i) threes += law.sample(rng) == 1.5;
    CHECK(std::abs(threes / double(n) - 0.5) <= 4 * std::sqrt(0.25 / n));
}
