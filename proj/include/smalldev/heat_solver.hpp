#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace smalldev {

/// Brownian path W sampled on a uniform grid of `horizon / ds` steps, W_0 = 0.
struct WPath {
    double horizon = 0.0;
    double ds = 0.0;
    std::vector<double> values;
    std::uint64_t seed = 0;

    std::size_t segments() const noexcept { return values.empty() ? 0 : values.size() - 1; }
    /// Linear interpolation between grid points.
    double at(double s) const;
};

/// `index` selects an independent stream under `seed`.
WPath sample_wpath(double horizon, double ds, std::uint64_t seed, std::uint64_t index = 0);
WPath zero_wpath(double horizon, double ds);

struct HeatGrid {
    double dx = 0.005;
    double ds = 0.005 * 0.005;
};

enum class SideCondition { Absorbing, Reflecting };

/// Values of u(0, x) on the nodes x_i = a + i dx, i = 0..N, stored as
/// exp(log_scale) * values[i].
struct HeatSolution {
    double a = 0.0;
    double dx = 0.0;
    std::vector<double> values;
    double log_scale = 0.0;
};

/// Backward Kolmogorov equation of Z = B + beta W on [a, b] with W the
/// piecewise-linear interpolation of `w`:
///   du/ds + beta W'(s) du/dx + 1/2 d2u/dx2 = 0,   u(horizon, x) = terminal(x),
/// stepped from s = horizon down to 0 by Crank-Nicolson (two implicit Euler
/// half steps at the start to damp the terminal discontinuity). Inside each
/// W segment the drift is constant; segments whose cell Peclet number exceeds
/// 2 switch to upwind differences with implicit Euler steps.
/// Throws GridTooCoarse when dx > (b - a) / 200 or ds > dx^2, NegativeDensity
/// if the solution loses positivity.
HeatSolution solve_backward(double a, double b, double beta, const WPath& w, const HeatGrid& grid,
                            const std::vector<double>& terminal, SideCondition side = SideCondition::Absorbing);

/// Number of spatial intervals used for [a, b] at spacing dx.
std::size_t heat_intervals(double a, double b, double dx);

}  // namespace smalldev
