#include <doctest.h>

#include <cmath>
#include <numeric>

#include "smalldev/error.hpp"
#include "smalldev/lattice_dp.hpp"
#include "smalldev/mc_engine.hpp"

using namespace smalldev;

namespace {

BoundarySpec flat(std::size_t n, double lo, double hi) {
    BoundarySpec spec;
    spec.mode = ExplicitWindow{std::vector<double>(n + 1, lo), std::vector<double>(n + 1, hi)};
    return spec;
}

}  // namespace

TEST_CASE("near-certain event") {
    const auto envr = sample_environment(models::standard_gaussian(), 10, 1);
    const auto est = mc_survival(envr, flat(10, -1e6, 1e6), 10, 0.0, 1000, 3);
    CHECK(est.status == McStatus::Ok);
    CHECK(est.log_prob == 0.0);
    CHECK(est.probability() == 1.0);
}

TEST_CASE("+-1 walk in [-1, 1], n = 2: naive MC within 3 SE of 1/2") {
    const auto envr = sample_environment(models::simple_walk(), 2, 1);
    const auto est = mc_survival(envr, flat(2, -1, 1), 2, 0.0, 100000, 4);
    CHECK(std::abs(est.probability() - 0.5) <= 3.0 * est.probability_std_error());
    CHECK(est.replications == 100000);
    CHECK_THROWS_AS(mc_survival(envr, flat(2, -1, 1), 2, 0.0, 99, 4), Error);
}

TEST_CASE("determinism across worker counts") {
    const auto envr = sample_environment(models::epsilon_model(), 500, 2);
    const auto spec = BoundarySpec::constant(0.3, -1, 1);
    const auto a = mc_survival(envr, spec, 500, 0.0, 5000, 9, 1);
    const auto b = mc_survival(envr, spec, 500, 0.0, 5000, 9, 3);
    CHECK(a.log_prob == b.log_prob);
    CHECK(a.std_error == b.std_error);
    SplitConfig config;
    config.D = 1;
    config.particles = 500;
    const auto c = split_survival(envr, spec, 500, 0.0, config, 9, 1);
    const auto d = split_survival(envr, spec, 500, 0.0, config, 9, 4);
    CHECK(c.log_prob == d.log_prob);
    CHECK(c.level_log == d.level_log);
}

TEST_CASE("no survivors is a status, not an exception") {
    BoundarySpec spec;
    spec.mode = ExplicitWindow{{-1, 0.2, -1}, {1, 0.8, 1}};
    const auto envr = sample_environment(models::simple_walk(), 2, 1);
    const auto est = mc_survival(envr, spec, 2, 0.0, 200, 1);
    CHECK(est.status == McStatus::ZeroSuccesses);
    SplitConfig config;
    config.D = 1;
    config.particles = 50;
    const auto sp = split_survival(envr, spec, 2, 0.0, config, 1);
    CHECK(sp.status == McStatus::LevelExtinction);
    CHECK(sp.extinct_level >= 0);
}

TEST_CASE("split config block structure") {
    SplitConfig c;
    c.D = 1;
    CHECK(c.block_length(2000, 0.45) == 935);
    CHECK(c.blocks(2000, 0.45) == 2);
    CHECK(c.level_ends(2000, 0.45) == std::vector<std::size_t>{935, 1870, 2000});
    c.D = 4;
    CHECK(c.block_length(2000, 0.45) == 2000);  // clamped so that K >= 1
    CHECK(c.blocks(2000, 0.45) == 1);
    CHECK(c.level_ends(10, 0.3).back() == 10);
}

TEST_CASE("single level splitting agrees with naive MC") {
    const auto envr = sample_environment(models::simple_walk(), 2, 1);
    SplitConfig config;
    config.D = 100;
    config.particles = 100000;
    const auto sp = split_survival(envr, flat(2, -1, 1), 2, 0.0, config, 5);
    CHECK(sp.level_log.size() == 1);
    const auto naive = mc_survival(envr, flat(2, -1, 1), 2, 0.0, 100000, 6);
    const double diff = std::abs(sp.probability() - naive.probability());
    CHECK(diff <= 3.0 * std::hypot(sp.probability_std_error(), naive.probability_std_error()));
}

TEST_CASE("per-level logs sum to the total") {
    const auto envr = sample_environment(models::epsilon_model(), 1000, 4);
    SplitConfig config;
    config.D = 1;
    config.particles = 400;
    const auto sp = split_survival(envr, BoundarySpec::constant(0.3, -1, 1), 1000, 0.0, config, 2);
    REQUIRE(sp.level_log.size() > 2);
    CHECK(std::accumulate(sp.level_log.begin(), sp.level_log.end(), 0.0) == sp.log_prob);
}

TEST_CASE("splitting is unbiased at probability scale") {
    const std::size_t n = 30;
    const auto envr = sample_environment(models::epsilon_model(), n, 12);
    const auto spec = BoundarySpec::constant(0.3, -1, 1);
    const double truth = std::exp(exact_survival(envr, spec, n, 0.0).log_prob);
    SplitConfig config;
    config.D = 1;
    config.particles = 200;
    REQUIRE(config.level_ends(n, 0.3).size() >= 4);
    const int seeds = 1000;
    double s = 0, s2 = 0;
    for (int k = 0; k < seeds; ++k) {
        const double p = split_survival(envr, spec, n, 0.0, config, 100 + k).probability();
        s += p;
        s2 += p * p;
    }
    const double mean = s / seeds;
    const double se = std::sqrt((s2 / seeds - mean * mean) / (seeds - 1));
    CHECK(std::abs(mean - truth) <= 3.0 * se);
}

TEST_CASE("splitting vs fine-lattice surrogate, and variance reduction") {
    const std::size_t n = 2000;
    const auto spec = BoundarySpec::constant(0.45, -1, 1);
    const auto envr = sample_environment(models::standard_gaussian(), n, 3);
    SplitConfig config;
    config.D = 1;
    config.particles = 1000;
    const auto sp = split_survival(envr, spec, n, 0.0, config, 8);
    auto lattice = std::make_shared<const EnvironmentModel>(
        std::vector<MixtureComponent>{{discretize_gaussian(0.0, 1.0, 0.05), 1.0}});
    const double truth = exact_survival(sample_environment(lattice, n, 3), spec, n, 0.0).log_prob;
    CHECK(std::abs(sp.log_prob - truth) <= 3.0 * sp.std_error);

    // equal budget: particles * n trajectory steps for both
    const auto naive = mc_survival(envr, spec, n, 0.0, config.particles, 8);
    CHECK((naive.status == McStatus::ZeroSuccesses || sp.std_error < naive.std_error));
}

TEST_CASE("bootstrap standard error is available") {
    const auto envr = sample_environment(models::epsilon_model(), 300, 4);
    SplitConfig config;
    config.D = 1;
    config.particles = 300;
    config.bootstrap = true;
    const auto sp = split_survival(envr, BoundarySpec::constant(0.3, -1, 1), 300, 0.0, config, 2);
    CHECK(sp.std_error > 0.0);
    config.bootstrap = false;
    const auto plain = split_survival(envr, BoundarySpec::constant(0.3, -1, 1), 300, 0.0, config, 2);
    CHECK(plain.log_prob == sp.log_prob);
    CHECK(sp.std_error == doctest::Approx(plain.std_error).epsilon(0.5));
}
