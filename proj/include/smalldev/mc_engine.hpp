#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "smalldev/boundary.hpp"
#include "smalldev/env.hpp"

namespace smalldev {

enum class McMethod { Naive, Split };
enum class McStatus { Ok, ZeroSuccesses, LevelExtinction };

struct McEstimate {
    double log_prob = 0.0;
    double std_error = 0.0;       // of log_prob, delta method (or bootstrap when requested)
    std::size_t replications = 0;  // trajectories (naive) or particles per level (split)
    McMethod method = McMethod::Naive;
    McStatus status = McStatus::Ok;
    int extinct_level = -1;
    std::vector<double> level_log;  // split only: log survival fraction of each level

    double probability() const;
    /// Standard error of the probability estimate itself.
    double probability_std_error() const;
};

/// Fixed-effort splitting configuration. Levels sit at block ends t_n + kT,
/// T = floor(D n^{2 alpha}) clamped to [1, n], K = floor(n / T), followed by a
/// final partial block when K T < n.
struct SplitConfig {
    int D = 4;
    std::size_t particles = 1000;
    bool bootstrap = false;
    std::size_t bootstrap_resamples = 200;

    std::size_t block_length(std::size_t n, double alpha) const;
    std::size_t blocks(std::size_t n, double alpha) const;
    /// Level end points relative to t_n (last one is n).
    std::vector<std::size_t> level_ends(std::size_t n, double alpha) const;
};

/// Plain Monte Carlo: fraction of `reps` trajectories that stay in the window.
/// A run with no survivor comes back with status ZeroSuccesses.
McEstimate mc_survival(const QuenchedEnvironment& envr, const BoundarySpec& boundary, std::size_t n, double x0,
                       std::size_t reps, std::uint64_t seed, unsigned workers = 1);

/// Multilevel splitting estimate of the same probability. A level without
/// survivors ends the run with status LevelExtinction and its index.
McEstimate split_survival(const QuenchedEnvironment& envr, const BoundarySpec& boundary, std::size_t n, double x0,
                          const SplitConfig& config, std::uint64_t seed, unsigned workers = 1);

}  // namespace smalldev
