#include "smalldev/heat_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "smalldev/error.hpp"
#include "smalldev/rng.hpp"

namespace smalldev {

double WPath::at(double s) const {
    if (values.size() < 2) {
        return values.empty() ? 0.0 : values.front();
    }
    const double pos = std::clamp(s / ds, 0.0, static_cast<double>(segments()));
    const auto j = std::min<std::size_t>(static_cast<std::size_t>(pos), segments() - 1);
    const double f = pos - static_cast<double>(j);
    return values[j] + f * (values[j + 1] - values[j]);
}

WPath sample_wpath(double horizon, double ds, std::uint64_t seed, std::uint64_t index) {
    WPath w = zero_wpath(horizon, ds);
    w.seed = seed;
    auto rng = make_stream(seed, "wpath", index);
    const double sd = std::sqrt(w.ds);
    for (std::size_t j = 1; j < w.values.size(); ++j) {
        w.values[j] = w.values[j - 1] + sd * rng.normal();
    }
    return w;
}

WPath zero_wpath(double horizon, double ds) {
    if (!(horizon >= 0.0) || !(ds > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "W path needs horizon >= 0 and ds > 0");
    }
    WPath w;
    const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(horizon / ds - 1e-9)));
    w.horizon = horizon;
    w.ds = horizon > 0.0 ? horizon / static_cast<double>(m) : ds;
    w.values.assign(m + 1, 0.0);
    return w;
}

std::size_t heat_intervals(double a, double b, double dx) {
    return std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil((b - a) / dx - 1e-9)));
}

namespace {

// Tridiagonal system (I - theta*dt*A) u_new = (I + (1-theta)*dt*A) u_old for
// a fixed drift, factored once and reused for every substep of a segment.
class Stepper {
public:
    Stepper(std::size_t first, std::size_t last, std::size_t nodes, double dx, double drift, double theta, double dt,
            SideCondition side)
        : first_(first), last_(last), size_(last - first + 1) {
        lo_.assign(size_, 0.0);
        di_.assign(size_, 0.0);
        up_.assign(size_, 0.0);
        const double diff = 0.5 / (dx * dx);
        const bool upwind = std::abs(drift) * dx > 1.0;
        for (std::size_t k = 0; k < size_; ++k) {
            const std::size_t i = first + k;
            double l, d, u;
            if (side == SideCondition::Reflecting && (i == 0 || i == nodes - 1)) {
                // Ghost node mirrors the neighbour: zero flux, no drift.
                l = i == 0 ? 0.0 : 2.0 * diff;
                u = i == 0 ? 2.0 * diff : 0.0;
                d = -2.0 * diff;
            } else if (!upwind) {
                l = diff - drift / (2.0 * dx);
                u = diff + drift / (2.0 * dx);
                d = -2.0 * diff;
            } else if (drift > 0.0) {
                l = diff;
                u = diff + drift / dx;
                d = -2.0 * diff - drift / dx;
            } else {
                l = diff - drift / dx;
                u = diff;
                d = -2.0 * diff + drift / dx;
            }
            lo_[k] = l;
            di_[k] = d;
            up_[k] = u;
        }
        // Explicit part coefficients.
        const double e = (1.0 - theta) * dt;
        elo_.resize(size_);
        edi_.resize(size_);
        eup_.resize(size_);
        for (std::size_t k = 0; k < size_; ++k) {
            elo_[k] = e * lo_[k];
            edi_[k] = 1.0 + e * di_[k];
            eup_[k] = e * up_[k];
        }
        // Implicit part, Thomas factorization.
        const double m = theta * dt;
        cp_.resize(size_);
        inv_.resize(size_);
        ilo_.resize(size_);
        double prev_c = 0.0;
        for (std::size_t k = 0; k < size_; ++k) {
            const double a = -m * lo_[k];
            const double bdiag = 1.0 - m * di_[k];
            const double c = -m * up_[k];
            const double denom = bdiag - (k > 0 ? a * prev_c : 0.0);
            inv_[k] = 1.0 / denom;
            cp_[k] = c * inv_[k];
            ilo_[k] = a;
            prev_c = cp_[k];
        }
        rhs_.resize(size_);
    }

    // u holds all nodes; only [first, last] are unknowns, the rest stay zero.
    void step(std::vector<double>& u) {
        const double* x = u.data() + first_;
        const std::size_t last = size_ - 1;
        double* r = rhs_.data();
        r[0] = edi_[0] * x[0] + eup_[0] * x[1];
        for (std::size_t k = 1; k < last; ++k) {
            r[k] = elo_[k] * x[k - 1] + edi_[k] * x[k] + eup_[k] * x[k + 1];
        }
        r[last] = elo_[last] * x[last - 1] + edi_[last] * x[last];
        r[0] *= inv_[0];
        for (std::size_t k = 1; k <= last; ++k) {
            r[k] = (r[k] - ilo_[k] * r[k - 1]) * inv_[k];
        }
        double* y = u.data() + first_;
        y[last] = r[last];
        for (std::size_t k = last; k-- > 0;) {
            y[k] = r[k] - cp_[k] * y[k + 1];
        }
    }

private:
    std::size_t first_, last_, size_;
    std::vector<double> lo_, di_, up_;
    std::vector<double> elo_, edi_, eup_;
    std::vector<double> cp_, inv_, ilo_;
    std::vector<double> rhs_;
};

void renormalize(std::vector<double>& u, double& log_scale) {
    double peak = 0.0;
    double low = 0.0;
    for (double v : u) {
        peak = std::max(peak, v);
        low = std::min(low, v);
    }
    if (low < -1e-10 * peak) {
        std::ostringstream msg;
        msg << "solution reached " << low << " against peak " << peak;
        throw Error(ErrorCode::NegativeDensity, msg.str());
    }
    if (!(peak > 0.0)) {
        return;
    }
    const double inv = 1.0 / peak;
    for (double& v : u) {
        v *= inv;
    }
    log_scale += std::log(peak);
}

}  // namespace

HeatSolution solve_backward(double a, double b, double beta, const WPath& w, const HeatGrid& grid,
                            const std::vector<double>& terminal, SideCondition side) {
    if (!(a < b)) {
        throw Error(ErrorCode::InvalidArgument, "heat solver needs a < b");
    }
    const double width = b - a;
    if (!(grid.dx > 0.0) || grid.dx > width / 200.0 * (1.0 + 1e-12) || !(grid.ds > 0.0) ||
        grid.ds > grid.dx * grid.dx * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "need dx <= (b - a) / 200 and ds <= dx^2, got dx = " << grid.dx << ", ds = " << grid.ds;
        throw Error(ErrorCode::GridTooCoarse, msg.str());
    }
    const std::size_t intervals = heat_intervals(a, b, grid.dx);
    const std::size_t nodes = intervals + 1;
    const double dx = width / static_cast<double>(intervals);
    if (terminal.size() != nodes) {
        throw Error(ErrorCode::InvalidArgument, "terminal data must cover every grid node");
    }
    const std::size_t first = side == SideCondition::Absorbing ? 1 : 0;
    const std::size_t last = side == SideCondition::Absorbing ? nodes - 2 : nodes - 1;

    HeatSolution sol;
    sol.a = a;
    sol.dx = dx;
    sol.values = terminal;
    if (side == SideCondition::Absorbing) {
        sol.values.front() = 0.0;
        sol.values.back() = 0.0;
    }
    if (w.horizon <= 0.0 || w.segments() == 0) {
        return sol;
    }
    const std::size_t sub = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(w.ds / grid.ds - 1e-9)));
    const double dt = w.ds / static_cast<double>(sub);

    bool started = false;
    std::size_t since_norm = 0;
    for (std::size_t seg = w.segments(); seg-- > 0;) {
        const double drift = beta * (w.values[seg + 1] - w.values[seg]) / w.ds;
        std::size_t remaining = sub;
        if (!started) {
            // Rannacher start: the first substep becomes two implicit Euler half steps.
            Stepper euler(first, last, nodes, dx, drift, 1.0, 0.5 * dt, side);
            euler.step(sol.values);
            euler.step(sol.values);
            --remaining;
            started = true;
        }
        if (remaining == 0) {
            continue;
        }
        // Upwinded segments are stepped fully implicitly: the explicit half of
        // Crank-Nicolson is not monotone once |drift| dx > 1.
        const double theta = std::abs(drift) * dx > 1.0 ? 1.0 : 0.5;
        Stepper cn(first, last, nodes, dx, drift, theta, dt, side);
        for (std::size_t k = 0; k < remaining; ++k) {
            cn.step(sol.values);
            if (++since_norm == 32) {
                renormalize(sol.values, sol.log_scale);
                since_norm = 0;
            }
        }
    }
    renormalize(sol.values, sol.log_scale);
    return sol;
}

}  // namespace smalldev
