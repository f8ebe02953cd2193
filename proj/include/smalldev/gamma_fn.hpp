#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "smalldev/boundary.hpp"
#include "smalldev/heat_solver.hpp"

namespace smalldev {

/// P(B stays in [a, b] up to time t | B_0 = x) for standard Brownian motion,
/// from the sine eigenfunction series. Throws OutOfInterval outside [a, b].
double tube_survival_fixed(double a, double b, double x, double t);

struct PointStart {
    double x;
};
/// Infimum over grid points of the start window.
struct LowestStart {
    Interval window;
};

/// Survival of B + beta W in [a, b] given the path W.
struct TubeProblem {
    double a = 0.0;
    double b = 1.0;
    double beta = 0.0;
    WPath w;
    std::variant<PointStart, LowestStart> start = PointStart{0.5};
    std::optional<Interval> terminal;
};

struct TubeSolution {
    double log_prob = 0.0;
    double x = 0.0;  // start point (the minimizer for LowestStart)

    double probability() const;
    /// -log of the probability, the X-bar_t contribution.
    double xbar() const { return -log_prob; }
};

TubeSolution tube_survival_quenched(const TubeProblem& problem, const HeatGrid& grid);

/// Default start and terminal windows for a tube [a, b]:
/// [a + 0.3 L, b - 0.3 L] and [a + 0.1 L, b - 0.1 L].
Interval default_entry_window(double a, double b);
Interval default_exit_window(double a, double b);

struct GammaConfig {
    double beta = 0.0;
    std::vector<double> t_list{2.0, 3.0, 4.0, 5.0, 6.0};
    std::size_t n_w = 50;
    double a = 0.0;
    double b = 1.0;
    std::optional<Interval> entry;  // defaults applied when empty
    std::optional<Interval> exit;
    HeatGrid grid{0.005, 0.005 * 0.005};
    double w_ds = 2.5e-4;           // resolution of the sampled W paths
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

struct GammaEstimate {
    double beta = 0.0;
    std::vector<double> t_list;
    std::vector<std::vector<double>> xbar;  // [t index][W sample]
    std::vector<double> mean_xbar;
    std::vector<double> var_xbar;
    double slope = 0.0;
    double intercept = 0.0;
    double gamma_hat = 0.0;  // slope * (b - a)^2
    double ci = 0.0;         // 95% half-width of gamma_hat
    std::size_t n_w = 0;
};

/// gamma(beta) from the slope of mean X-bar_t against t. With beta = 0 the
/// W path plays no role and a single solve per horizon is replicated.
GammaEstimate gamma_estimate(const GammaConfig& config);

struct GammaPropertyReport {
    bool positivity = true;
    bool evenness = true;
    bool convexity = true;
    bool lower_bound = true;
    std::vector<std::string> notes;

    bool all() const { return positivity && evenness && convexity && lower_bound; }
};

/// Checks positivity, evenness, midpoint convexity and the bound
/// gamma(beta) >= pi^2 (1 + beta^2) / 2 within the estimates' CIs. `rel_tol`
/// absorbs the deterministic discretization error of the solver.
GammaPropertyReport gamma_properties_check(const std::vector<GammaEstimate>& estimates, double rel_tol = 1e-3);

struct MgfRow {
    double d = 0.0;
    double log_mgf = 0.0;       // log of the empirical mean of exp(d X)
    double log_mgf_half = 0.0;  // same over the first half of the samples
    bool stable = false;        // the two agree within a factor 2
};

struct TailReport {
    double beta = 0.0;
    double t = 0.0;
    std::vector<double> samples;
    std::vector<MgfRow> mgf;
    std::vector<double> thresholds;
    std::vector<double> log_frequency;
    double tail_slope = 0.0;
    double r_squared = 0.0;
};

struct TailConfig {
    double beta = 1.0;
    double t = 5.0;
    std::size_t n_w = 1000;
    std::vector<double> d_list{0.0, 0.5, 1.0};
    double a = 0.0;
    double b = 1.0;
    HeatGrid grid{0.005, 0.005 * 0.005};
    double w_ds = 2.5e-4;
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

/// Empirical exponential moments and tail of X-bar_t over W draws.
TailReport xbar_tail_diagnostic(const TailConfig& config);

}  // namespace smalldev
