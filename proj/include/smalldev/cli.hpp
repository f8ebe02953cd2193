#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "smalldev/boundary.hpp"
#include "smalldev/env.hpp"
#include "smalldev/rates.hpp"

namespace smalldev {

inline constexpr const char* kVersion = "0.1.0";

namespace cli {

/// Runs the command line tool. `args` excludes the program name. Returns 0 on
/// success, 2 on validation errors and 1 on runtime failures.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Error codes that count as bad input (exit 2) rather than runtime failures.
bool is_validation_error(const std::exception& e);

}  // namespace cli

struct ConvergenceRow {
    std::uint64_t seed = 0;
    std::size_t n = 0;
    std::string method;  // "dp" or "split"
    double log_prob = 0.0;
    double exponent = 0.0;
    double std_error = 0.0;  // 0 for the exact DP
    std::string formula;
    double predicted = 0.0;
    double rel_gap = 0.0;  // (exponent - predicted) / |predicted|
};

struct ConvergenceOptions {
    std::vector<std::size_t> n_list;
    std::size_t seeds = 1;
    std::uint64_t seed = 1;
    std::optional<double> recenter;  // window c n^alpha around the quenched mean
    const GammaTable* table = nullptr;  // needed when sigma_A > 0 without recentering
    std::size_t particles = 1000;        // split MC for non-lattice models
    int D = 4;
    unsigned workers = 1;
};

/// Measured exponent per (n, seed) next to the predicted limit. Lattice models
/// use the exact DP (sup start), others the splitting estimator from 0.
/// Environment seeds are seed, seed + 1, ..., seed + seeds - 1.
std::vector<ConvergenceRow> convergence_table(std::shared_ptr<const EnvironmentModel> model,
                                              const BoundarySpec& boundary, const ConvergenceOptions& options);

}  // namespace smalldev
