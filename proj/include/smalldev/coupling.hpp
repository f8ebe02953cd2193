#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smalldev/rng.hpp"

namespace smalldev {

/// Centered two-point step law: -u with probability p, +v otherwise.
struct TwoPointLaw {
    double u = 1.0;
    double p = 0.5;
    double v = 1.0;

    /// Validates u, v > 0, p in (0, 1) and p u = (1 - p) v.
    static TwoPointLaw make(double u, double p, double v);
    /// Parses "u,p,v".
    static TwoPointLaw parse(const std::string& text);

    double second_moment() const { return u * v; }
    double abs_moment(double lambda) const;
};

/// One walk embedded in a Brownian path by successive exits from
/// (S_{k-1} - u, S_{k-1} + v). This is a Skorokhod embedding, not
/// Sakhanenko's coupling; its distances only illustrate the mechanism.
struct CouplingRun {
    std::size_t n = 0;
    TwoPointLaw law;
    std::vector<double> walk;     // S_0..S_n
    std::vector<double> tau;      // embedding times, tau[0] = 0
    std::vector<double> clock_w;  // W at D_k = k E(step^2)
    double max_dist = 0.0;        // max_k |S_k - W(D_k)|
};

/// Fine step used for the exit search, min(u, v)^2 / 400.
double coupling_time_step(const TwoPointLaw& law);

CouplingRun skorokhod_couple(const TwoPointLaw& law, std::size_t n, std::uint64_t seed, std::uint64_t replica = 0);

struct CouplingTailRow {
    double x = 0.0;
    double empirical_tail = 0.0;  // P(max_dist >= x)
    double envelope_l2 = 0.0;     // 2 x^-2 n E|step|^2
    double envelope_l4 = 0.0;     // 2 x^-4 n E|step|^4
};

struct CouplingTailReport {
    TwoPointLaw law;
    std::size_t n = 0;
    std::size_t reps = 0;
    std::vector<double> max_dists;  // sorted
    double median = 0.0;
    std::vector<CouplingTailRow> rows;
    // The envelopes bound Sakhanenko's coupling up to an unknown absolute
    // constant; they are printed for shape comparison only.
    static constexpr const char* envelope_note = "envelopes: shape comparison only, unknown constant";
};

/// reps >= 1000. Replica r uses stream (seed, "couple", r).
CouplingTailReport coupling_tail_report(const TwoPointLaw& law, std::size_t n, std::size_t reps,
                                        const std::vector<double>& x_grid, std::uint64_t seed,
                                        unsigned workers = 1);

/// Median of max_dist over reps replicas; no lower bound on reps.
double coupling_median(const TwoPointLaw& law, std::size_t n, std::size_t reps, std::uint64_t seed,
                       unsigned workers = 1);

}  // namespace smalldev
