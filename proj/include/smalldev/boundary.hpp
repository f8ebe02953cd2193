#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

namespace smalldev {

class QuenchedEnvironment;

struct Interval {
    double lo;
    double hi;
};

/// [a n^alpha, b n^alpha] at every step.
struct ConstantWindow {
    double a;
    double b;
};

/// [g(i/n) n^alpha, h(i/n) n^alpha] for g < h continuous on [0, 1].
struct FunctionalWindow {
    std::function<double(double)> g;
    std::function<double(double)> h;
};

/// [M_i - c n^alpha, M_i + c n^alpha] around the quenched mean path, where M_i
/// is the quenched mean increment accumulated since the start time t_n.
struct RecenteredWindow {
    double c;
};

/// Absolute bounds for steps 0..n, used as given (no n^alpha scaling).
struct ExplicitWindow {
    std::vector<double> lower;
    std::vector<double> upper;
};

using WindowMode = std::variant<ConstantWindow, FunctionalWindow, RecenteredWindow, ExplicitWindow>;

/// Window geometry of a small-deviation event observed on steps t_n..t_n + n.
/// Entry and exit windows are in units of n^alpha.
struct BoundarySpec {
    double alpha = 0.3;
    WindowMode mode = ConstantWindow{-1.0, 1.0};
    std::optional<Interval> entry;
    std::optional<Interval> exit;
    std::size_t start_shift = 0;

    static BoundarySpec constant(double alpha, double a, double b) {
        BoundarySpec spec;
        spec.alpha = alpha;
        spec.mode = ConstantWindow{a, b};
        return spec;
    }

    /// Checks the nesting constraints a < a0 <= b0 < b and a <= a' < b' <= b
    /// (with g(0), h(0), g(1), h(1) for functional windows). Throws BadWindow.
    void validate(std::size_t n) const;
};

/// Real window [lower_i, upper_i] for i = 0..n. `envr` is needed only for
/// recentered windows (it may be null otherwise).
std::vector<Interval> window_bounds(const BoundarySpec& boundary, const QuenchedEnvironment* envr, std::size_t n);

/// n^alpha as a real number (no flooring).
double window_scale(double alpha, std::size_t n);

/// n^{1 - 2 alpha}, the normalization of the log-probability.
double exponent_scale(double alpha, std::size_t n);

}  // namespace smalldev
