#include "smalldev/mc_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smalldev/error.hpp"
#include "smalldev/parallel.hpp"
#include "smalldev/rng.hpp"

namespace smalldev {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool inside(const Interval& w, double x) { return w.lo <= x && x <= w.hi; }

// Advances x through steps [from, to) (relative to t_n); false on absorption.
bool walk(const QuenchedEnvironment& envr, std::size_t shift, const std::vector<Interval>& windows, std::size_t from,
          std::size_t to, double& x, Philox4x32& rng) {
    for (std::size_t i = from; i < to; ++i) {
        x += envr.step_law(shift + i).sample(rng);
        if (!inside(windows[i + 1], x)) {
            return false;
        }
    }
    return true;
}

void check_inputs(const QuenchedEnvironment& envr, const BoundarySpec& boundary, std::size_t n) {
    if (boundary.start_shift + n > envr.length()) {
        throw Error(ErrorCode::OutOfRange, "environment shorter than t_n + n");
    }
}

}  // namespace

double McEstimate::probability() const { return std::exp(log_prob); }

double McEstimate::probability_std_error() const { return probability() * std_error; }

std::size_t SplitConfig::block_length(std::size_t n, double alpha) const {
    if (D < 1) {
        throw Error(ErrorCode::InvalidArgument, "splitting needs D >= 1");
    }
    const double t = std::floor(static_cast<double>(D) * std::pow(static_cast<double>(n), 2.0 * alpha));
    return std::clamp<std::size_t>(static_cast<std::size_t>(t), 1, std::max<std::size_t>(n, 1));
}

std::size_t SplitConfig::blocks(std::size_t n, double alpha) const { return n / block_length(n, alpha); }

std::vector<std::size_t> SplitConfig::level_ends(std::size_t n, double alpha) const {
    const std::size_t T = block_length(n, alpha);
    const std::size_t K = n / T;
    std::vector<std::size_t> ends;
    for (std::size_t k = 1; k <= K; ++k) {
        ends.push_back(k * T);
    }
    if (K * T < n) {
        ends.push_back(n);
    }
    return ends;
}

McEstimate mc_survival(const QuenchedEnvironment& envr, const BoundarySpec& boundary, std::size_t n, double x0,
                       std::size_t reps, std::uint64_t seed, unsigned workers) {
    if (reps < 100) {
        throw Error(ErrorCode::InvalidArgument, "naive Monte Carlo needs at least 100 replications");
    }
    check_inputs(envr, boundary, n);
    const std::vector<Interval> windows = window_bounds(boundary, &envr, n);
    std::vector<unsigned char> survived(reps, 0);
    if (inside(windows[0], x0)) {
        parallel_for(reps, workers, [&](std::size_t r) {
            auto rng = make_stream(seed, "mc-naive", r);
            double x = x0;
            survived[r] = walk(envr, boundary.start_shift, windows, 0, n, x, rng) ? 1 : 0;
        });
    }
    std::size_t successes = 0;
    for (unsigned char s : survived) {
        successes += s;
    }
    McEstimate est;
    est.method = McMethod::Naive;
    est.replications = reps;
    if (successes == 0) {
        est.status = McStatus::ZeroSuccesses;
        est.log_prob = -kInf;
        est.std_error = kInf;
        return est;
    }
    const double p = static_cast<double>(successes) / static_cast<double>(reps);
    est.log_prob = std::log(p);
    est.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(reps)) / p;
    return est;
}

McEstimate split_survival(const QuenchedEnvironment& envr, const BoundarySpec& boundary, std::size_t n, double x0,
                          const SplitConfig& config, std::uint64_t seed, unsigned workers) {
    if (config.particles < 2) {
        throw Error(ErrorCode::InvalidArgument, "splitting needs at least 2 particles per level");
    }
    if (n == 0) {
        throw Error(ErrorCode::InvalidArgument, "splitting needs n >= 1");
    }
    check_inputs(envr, boundary, n);
    const std::vector<Interval> windows = window_bounds(boundary, &envr, n);
    const std::vector<std::size_t> ends = config.level_ends(n, boundary.alpha);
    const std::size_t N = config.particles;

    McEstimate est;
    est.method = McMethod::Split;
    est.replications = N;
    const auto extinct = [&](int level) {
        est.status = McStatus::LevelExtinction;
        est.extinct_level = level;
        est.log_prob = -kInf;
        est.std_error = kInf;
        return est;
    };
    if (!inside(windows[0], x0)) {
        return extinct(0);
    }

    std::vector<double> starts(N, x0);
    std::vector<double> finals(N);
    std::vector<unsigned char> alive(N);
    std::vector<double> fractions;
    std::size_t from = 0;
    for (std::size_t level = 0; level < ends.size(); ++level) {
        const std::size_t to = ends[level];
        parallel_for(N, workers, [&](std::size_t i) {
            auto rng = make_stream(seed, "mc-split", (static_cast<std::uint64_t>(level) << 40) | i);
            double x = starts[i];
            alive[i] = walk(envr, boundary.start_shift, windows, from, to, x, rng) ? 1 : 0;
            finals[i] = x;
        });
        std::vector<double> survivors;
        for (std::size_t i = 0; i < N; ++i) {
            if (alive[i]) {
                survivors.push_back(finals[i]);
            }
        }
        if (survivors.empty()) {
            return extinct(static_cast<int>(level));
        }
        const double frac = static_cast<double>(survivors.size()) / static_cast<double>(N);
        fractions.push_back(frac);
        est.level_log.push_back(std::log(frac));
        if (level + 1 < ends.size()) {
            auto rng = make_stream(seed, "mc-split-resample", level);
            for (std::size_t i = 0; i < N; ++i) {
                starts[i] = survivors[rng.below(survivors.size())];
            }
        }
        from = to;
    }

    est.log_prob = 0.0;
    double var = 0.0;
    for (std::size_t l = 0; l < fractions.size(); ++l) {
        est.log_prob += est.level_log[l];
        var += (1.0 - fractions[l]) / (static_cast<double>(N) * fractions[l]);
    }
    est.std_error = std::sqrt(var);

    if (config.bootstrap) {
        // Resample each level's survival indicators; resamples with an empty
        // level are dropped.
        auto rng = make_stream(seed, "mc-split-boot", 0);
        std::vector<double> logs;
        for (std::size_t b = 0; b < config.bootstrap_resamples; ++b) {
            double total = 0.0;
            bool ok = true;
            for (double frac : fractions) {
                std::size_t count = 0;
                for (std::size_t i = 0; i < N; ++i) {
                    count += rng.uniform() < frac ? 1 : 0;
                }
                if (count == 0) {
                    ok = false;
                    break;
                }
                total += std::log(static_cast<double>(count) / static_cast<double>(N));
            }
            if (ok) {
                logs.push_back(total);
            }
        }
        if (logs.size() >= 2) {
            double mean = 0.0;
            for (double v : logs) {
                mean += v;
            }
            mean /= static_cast<double>(logs.size());
            double ss = 0.0;
            for (double v : logs) {
                ss += (v - mean) * (v - mean);
            }
            est.std_error = std::sqrt(ss / static_cast<double>(logs.size() - 1));
        }
    }
    return est;
}

}  // namespace smalldev
