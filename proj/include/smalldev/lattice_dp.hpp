#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "smalldev/boundary.hpp"
#include "smalldev/env.hpp"

namespace smalldev {

enum class StartVariant {
    SupStart,           // sup over start points
    InfEntryWithExit,   // inf over the entry window, terminal point in the exit window
    PointStart,         // fixed start x0
};

struct SurvivalResult {
    double log_prob = 0.0;  // natural log, <= 0; -inf when the event is impossible
    std::size_t n = 0;
    double exponent = 0.0;  // log_prob / n^{1 - 2 alpha}
    StartVariant variant = StartVariant::PointStart;
    double x0 = 0.0;        // start achieving the sup/inf, or the given point
    bool zero_probability = false;
    bool empty_window = false;
};

/// Transition kernel of one lattice step: probs[k] is the mass of offset min_offset + k.
struct LatticeKernel {
    int min_offset = 0;
    std::vector<double> probs;
};

LatticeKernel make_kernel(const StepLaw& law, double spacing);

/// A fully specified absorbed walk on spacing * Z: step i+1 uses
/// kernels[kernel_of_step[i]], and the walk must lie in windows[i] after i steps.
struct LatticeProblem {
    double spacing = 1.0;
    std::vector<LatticeKernel> kernels;
    std::vector<std::uint32_t> kernel_of_step;
    std::vector<Interval> windows;

    std::size_t steps() const noexcept { return kernel_of_step.size(); }
};

/// Integer lattice indices j with lo <= j * spacing <= hi, compared as reals.
struct IndexRange {
    long first;
    long last;  // inclusive; empty when last < first
    bool empty() const noexcept { return last < first; }
    std::size_t size() const noexcept { return empty() ? 0 : static_cast<std::size_t>(last - first + 1); }
};
IndexRange lattice_range(const Interval& window, double spacing);

/// Log survival probability from lattice index `start` by forward propagation.
double forward_log_survival(const LatticeProblem& problem, long start);

/// Log survival probability for every index of the step-0 window by backward
/// recursion. `terminal` restricts the final position (intersected with the
/// last window). Entries are -inf where survival is impossible.
struct BackwardResult {
    IndexRange starts;
    std::vector<double> log_prob;
};
BackwardResult backward_log_survival(const LatticeProblem& problem, const Interval* terminal = nullptr);

/// Builds the lattice problem for an environment and boundary. Throws
/// SpacingMismatch unless every step law is lattice with a common spacing.
LatticeProblem build_problem(const QuenchedEnvironment& envr, const BoundarySpec& boundary, std::size_t n);

/// Point-start quenched survival probability by forward DP.
SurvivalResult exact_survival(const QuenchedEnvironment& envr, const BoundarySpec& boundary, std::size_t n,
                              double x0);

/// sup-start, inf-entry-with-exit, or point-start exponent by backward DP.
SurvivalResult exact_exponent(const QuenchedEnvironment& envr, const BoundarySpec& boundary, std::size_t n,
                              StartVariant variant = StartVariant::SupStart, double x0 = 0.0);

/// Walk x + hatV_i inside [a n^alpha + V_i, b n^alpha + V_i], i <= n, with V a
/// given path (length n + 1, V_0 = start of the window shift) and hatV i.i.d.
/// steps of `hatv_law`. The boundary must be a constant window.
SurvivalResult two_walk_exponent(std::span<const double> v_path, const StepLaw& hatv_law,
                                 const BoundarySpec& boundary, std::size_t n,
                                 StartVariant variant = StartVariant::SupStart, double x0 = 0.0);

/// Same as above for an explicit lattice problem (any window arrays).
SurvivalResult solve_problem(const LatticeProblem& problem, double alpha, StartVariant variant, double x0,
                             const std::optional<Interval>& entry = std::nullopt,
                             const std::optional<Interval>& exit = std::nullopt);

/// Exhaustive path enumeration (test oracle): n <= 14, at most 4 support points
/// per step law. Throws TooLarge otherwise.
double enumerate_small(const QuenchedEnvironment& envr, const BoundarySpec& boundary, std::size_t n, double x0);

/// N(mean, variance) discretized on spacing * Z, truncated at `tail_sd`
/// standard deviations, with probabilities proportional to the density.
StepLaw discretize_gaussian(double mean, double variance, double spacing, double tail_sd = 8.0);

}  // namespace smalldev
