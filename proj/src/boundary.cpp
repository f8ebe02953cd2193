#include "smalldev/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "smalldev/env.hpp"
#include "smalldev/error.hpp"

namespace smalldev {

double window_scale(double alpha, std::size_t n) { return std::pow(static_cast<double>(n), alpha); }

double exponent_scale(double alpha, std::size_t n) { return std::pow(static_cast<double>(n), 1.0 - 2.0 * alpha); }

namespace {

void check_nesting(const BoundarySpec& bs, double start_lo, double start_hi, double end_lo, double end_hi) {
    if (bs.entry) {
        if (!(start_lo < bs.entry->lo && bs.entry->lo <= bs.entry->hi && bs.entry->hi < start_hi)) {
            throw Error(ErrorCode::BadWindow, "entry window must satisfy a < a0 <= b0 < b");
        }
    }
    if (bs.exit) {
        if (!(end_lo <= bs.exit->lo && bs.exit->lo < bs.exit->hi && bs.exit->hi <= end_hi)) {
            throw Error(ErrorCode::BadWindow, "exit window must satisfy a <= a' < b' <= b");
        }
    }
}

}  // namespace

void BoundarySpec::validate(std::size_t n) const {
    if (!(alpha > 0.0 && alpha < 0.5)) {
        throw Error(ErrorCode::BadWindow, "alpha must lie in (0, 1/2)");
    }
    if (const auto* w = std::get_if<ConstantWindow>(&mode)) {
        if (!(w->a < 0.0 && 0.0 < w->b)) {
            throw Error(ErrorCode::BadWindow, "constant window needs a < 0 < b");
        }
        check_nesting(*this, w->a, w->b, w->a, w->b);
    } else if (const auto* w = std::get_if<FunctionalWindow>(&mode)) {
        if (!w->g || !w->h) {
            throw Error(ErrorCode::BadWindow, "functional window needs g and h");
        }
        const std::size_t grid = std::max<std::size_t>(n, 1);
        for (std::size_t i = 0; i <= grid; ++i) {
            const double s = static_cast<double>(i) / static_cast<double>(grid);
            if (!(w->g(s) < w->h(s))) {
                std::ostringstream msg;
                msg << "g(s) >= h(s) at s = " << s;
                throw Error(ErrorCode::BadWindow, msg.str());
            }
        }
        check_nesting(*this, w->g(0.0), w->h(0.0), w->g(1.0), w->h(1.0));
    } else if (const auto* w = std::get_if<RecenteredWindow>(&mode)) {
        if (!(w->c > 0.0)) {
            throw Error(ErrorCode::BadWindow, "recentered half-width c must be positive");
        }
    } else if (const auto* w = std::get_if<ExplicitWindow>(&mode)) {
        if (w->lower.size() != n + 1 || w->upper.size() != n + 1) {
            throw Error(ErrorCode::BadWindow, "explicit window arrays must have n + 1 entries");
        }
    }
}

std::vector<Interval> window_bounds(const BoundarySpec& boundary, const QuenchedEnvironment* envr, std::size_t n) {
    boundary.validate(n);
    const double scale = window_scale(boundary.alpha, n);
    std::vector<Interval> out(n + 1);
    if (const auto* w = std::get_if<ConstantWindow>(&boundary.mode)) {
        for (auto& iv : out) {
            iv = {w->a * scale, w->b * scale};
        }
    } else if (const auto* w = std::get_if<FunctionalWindow>(&boundary.mode)) {
        for (std::size_t i = 0; i <= n; ++i) {
            const double s = n == 0 ? 0.0 : static_cast<double>(i) / static_cast<double>(n);
            out[i] = {w->g(s) * scale, w->h(s) * scale};
        }
    } else if (const auto* w = std::get_if<RecenteredWindow>(&boundary.mode)) {
        if (envr == nullptr) {
            throw Error(ErrorCode::InvalidArgument, "recentered window needs an environment");
        }
        if (boundary.start_shift + n > envr->length()) {
            throw Error(ErrorCode::OutOfRange, "environment shorter than t_n + n");
        }
        const double m0 = envr->moments(boundary.start_shift).first;
        for (std::size_t i = 0; i <= n; ++i) {
            const double m = envr->moments(boundary.start_shift + i).first - m0;
            out[i] = {m - w->c * scale, m + w->c * scale};
        }
    } else {
        const auto& arrays = std::get<ExplicitWindow>(boundary.mode);
        for (std::size_t i = 0; i <= n; ++i) {
            out[i] = {arrays.lower[i], arrays.upper[i]};
        }
    }
    return out;
}

}  // namespace smalldev
