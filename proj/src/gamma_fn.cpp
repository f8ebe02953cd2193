#include "smalldev/gamma_fn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "smalldev/error.hpp"
#include "smalldev/parallel.hpp"
#include "smalldev/rng.hpp"

namespace smalldev {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kZ95 = 1.959963984540054;

std::uint64_t beta_seed(std::uint64_t seed, double beta) {
    return splitmix64(seed ^ splitmix64(std::bit_cast<std::uint64_t>(beta)));
}

double log_mean_exp(const std::vector<double>& xs, std::size_t count, double d) {
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < count; ++i) {
        peak = std::max(peak, d * xs[i]);
    }
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        s += std::exp(d * xs[i] - peak);
    }
    return peak + std::log(s / static_cast<double>(count));
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

}  // namespace

double tube_survival_fixed(double a, double b, double x, double t) {
    if (!(a < b)) {
        throw Error(ErrorCode::InvalidArgument, "tube needs a < b");
    }
    if (!(t >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "time must be nonnegative");
    }
    if (x < a || x > b) {
        std::ostringstream msg;
        msg << "start " << x << " outside [" << a << ", " << b << "]";
        throw Error(ErrorCode::OutOfInterval, msg.str());
    }
    if (x == a || x == b) {
        return 0.0;
    }
    if (t == 0.0) {
        return 1.0;
    }
    const double width = b - a;
    const double rate = kPi * kPi * t / (2.0 * width * width);
    double sum = 0.0;
    for (long k = 1;; k += 2) {
        const double kk = static_cast<double>(k);
        const double envelope = 4.0 / (kk * kPi) * std::exp(-kk * kk * rate);
        if (envelope < 1e-16) {
            break;
        }
        sum += envelope * std::sin(kk * kPi * (x - a) / width);
    }
    return std::clamp(sum, 0.0, 1.0);
}

double TubeSolution::probability() const { return std::exp(log_prob); }

Interval default_entry_window(double a, double b) { return {a + 0.3 * (b - a), b - 0.3 * (b - a)}; }

Interval default_exit_window(double a, double b) { return {a + 0.1 * (b - a), b - 0.1 * (b - a)}; }

TubeSolution tube_survival_quenched(const TubeProblem& problem, const HeatGrid& grid) {
    const double a = problem.a;
    const double b = problem.b;
    if (!(a < b)) {
        throw Error(ErrorCode::InvalidArgument, "tube needs a < b");
    }
    const std::size_t intervals = heat_intervals(a, b, grid.dx);
    const double dx = (b - a) / static_cast<double>(intervals);
    std::vector<double> terminal(intervals + 1, 1.0);
    if (problem.terminal) {
        for (std::size_t i = 0; i <= intervals; ++i) {
            const double x = a + static_cast<double>(i) * dx;
            terminal[i] = (problem.terminal->lo <= x + 1e-12 && x - 1e-12 <= problem.terminal->hi) ? 1.0 : 0.0;
        }
    }
    const HeatSolution sol = solve_backward(a, b, problem.beta, problem.w, grid, terminal);

    TubeSolution out;
    const auto log_of = [&](double v) {
        return v > 0.0 ? sol.log_scale + std::log(v) : -std::numeric_limits<double>::infinity();
    };
    if (const auto* p = std::get_if<PointStart>(&problem.start)) {
        if (p->x < a || p->x > b) {
            throw Error(ErrorCode::OutOfInterval, "start point outside the tube");
        }
        const double pos = (p->x - a) / dx;
        const auto j = std::min<std::size_t>(static_cast<std::size_t>(pos), intervals - 1);
        const double f = pos - static_cast<double>(j);
        out.x = p->x;
        out.log_prob = log_of((1.0 - f) * sol.values[j] + f * sol.values[j + 1]);
        return out;
    }
    const Interval window = std::get<LowestStart>(problem.start).window;
    double lowest = std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t i = 0; i <= intervals; ++i) {
        const double x = a + static_cast<double>(i) * dx;
        if (window.lo <= x + 1e-12 && x - 1e-12 <= window.hi) {
            any = true;
            if (sol.values[i] < lowest) {
                lowest = sol.values[i];
                out.x = x;
            }
        }
    }
    if (!any) {
        throw Error(ErrorCode::GridTooCoarse, "start window contains no grid point");
    }
    out.log_prob = log_of(lowest);
    return out;
}

GammaEstimate gamma_estimate(const GammaConfig& config) {
    const auto& ts = config.t_list;
    if (ts.size() < 3) {
        throw Error(ErrorCode::InvalidArgument, "gamma estimation needs at least 3 horizons");
    }
    for (std::size_t j = 0; j < ts.size(); ++j) {
        if (!(ts[j] > 0.0) || (j > 0 && !(ts[j] > ts[j - 1]))) {
            throw Error(ErrorCode::InvalidArgument, "horizons must be positive and increasing");
        }
    }
    const bool trivial = config.beta == 0.0;
    if (config.n_w < (trivial ? 1u : 50u)) {
        throw Error(ErrorCode::InvalidArgument, "gamma estimation needs n_w >= 50 W samples (1 when beta = 0)");
    }
    const double a = config.a;
    const double b = config.b;
    const Interval entry = config.entry.value_or(default_entry_window(a, b));
    const Interval exit = config.exit.value_or(default_exit_window(a, b));
    if (!(a < entry.lo && entry.lo <= entry.hi && entry.hi < b && a <= exit.lo && exit.lo < exit.hi && exit.hi <= b)) {
        throw Error(ErrorCode::BadWindow, "windows must satisfy a < a0 <= b0 < b and a <= a' < b' <= b");
    }

    GammaEstimate est;
    est.beta = config.beta;
    est.t_list = ts;
    est.n_w = config.n_w;
    est.xbar.assign(ts.size(), std::vector<double>(config.n_w, 0.0));

    const std::size_t per_t = trivial ? 1 : config.n_w;
    const std::uint64_t seed = beta_seed(config.seed, config.beta);
    parallel_for(ts.size() * per_t, config.workers, [&](std::size_t task) {
        const std::size_t j = task / per_t;
        const std::size_t k = task % per_t;
        TubeProblem problem;
        problem.a = a;
        problem.b = b;
        problem.beta = config.beta;
        problem.w = trivial ? zero_wpath(ts[j], config.w_ds)
                            : sample_wpath(ts[j], config.w_ds, seed, (static_cast<std::uint64_t>(j) << 32) | k);
        problem.start = LowestStart{entry};
        problem.terminal = exit;
        est.xbar[j][k] = tube_survival_quenched(problem, config.grid).xbar();
    });
    if (trivial) {
        for (auto& row : est.xbar) {
            std::fill(row.begin(), row.end(), row.front());
        }
    }

    for (const auto& row : est.xbar) {
        double m = 0.0;
        for (double v : row) {
            m += v;
        }
        m /= static_cast<double>(row.size());
        double ss = 0.0;
        for (double v : row) {
            ss += (v - m) * (v - m);
        }
        est.mean_xbar.push_back(m);
        est.var_xbar.push_back(row.size() > 1 ? ss / static_cast<double>(row.size() - 1) : 0.0);
    }
    const LineFit fit = fit_line(ts, est.mean_xbar);
    est.slope = fit.slope;
    est.intercept = fit.intercept;

    double tbar = 0.0;
    for (double t : ts) {
        tbar += t;
    }
    tbar /= static_cast<double>(ts.size());
    double sxx = 0.0;
    for (double t : ts) {
        sxx += (t - tbar) * (t - tbar);
    }
    double var_slope = 0.0;
    for (std::size_t j = 0; j < ts.size(); ++j) {
        const double c = (ts[j] - tbar) / sxx;
        var_slope += c * c * est.var_xbar[j] / static_cast<double>(config.n_w);
    }
    const double width2 = (b - a) * (b - a);
    est.gamma_hat = fit.slope * width2;
    est.ci = kZ95 * std::sqrt(var_slope) * width2;
    return est;
}

GammaPropertyReport gamma_properties_check(const std::vector<GammaEstimate>& estimates, double rel_tol) {
    GammaPropertyReport report;
    const auto find = [&](double beta) -> const GammaEstimate* {
        for (const auto& e : estimates) {
            if (std::abs(e.beta - beta) <= 1e-9) {
                return &e;
            }
        }
        return nullptr;
    };
    const auto note = [&](const std::string& text) { report.notes.push_back(text); };

    for (const auto& e : estimates) {
        if (!(e.gamma_hat > 0.0)) {
            report.positivity = false;
            std::ostringstream msg;
            msg << "positivity: gamma(" << e.beta << ") = " << e.gamma_hat;
            note(msg.str());
        }
        const double bound = kPi * kPi * (1.0 + e.beta * e.beta) / 2.0;
        const double slack = e.ci + rel_tol * bound;
        if (e.gamma_hat < bound - slack) {
            report.lower_bound = false;
            std::ostringstream msg;
            msg << "lower bound: gamma(" << e.beta << ") = " << e.gamma_hat << " < " << bound << " - " << slack;
            note(msg.str());
        }
        if (e.beta > 0.0) {
            if (const GammaEstimate* mirror = find(-e.beta)) {
                const double residual = e.gamma_hat - mirror->gamma_hat;
                const double tol = std::hypot(e.ci, mirror->ci) +
                                   rel_tol * std::max(std::abs(e.gamma_hat), std::abs(mirror->gamma_hat));
                if (std::abs(residual) > tol) {
                    report.evenness = false;
                    std::ostringstream msg;
                    msg << "evenness: gamma(" << e.beta << ") - gamma(" << -e.beta << ") = " << residual
                        << " exceeds " << tol;
                    note(msg.str());
                }
            }
        }
    }
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        for (std::size_t k = i + 1; k < estimates.size(); ++k) {
            const GammaEstimate& lo = estimates[i];
            const GammaEstimate& hi = estimates[k];
            const GammaEstimate* mid = find(0.5 * (lo.beta + hi.beta));
            if (mid == nullptr || mid == &lo || mid == &hi) {
                continue;
            }
            const double gap = lo.gamma_hat + hi.gamma_hat - 2.0 * mid->gamma_hat;
            const double tol = std::sqrt(lo.ci * lo.ci + hi.ci * hi.ci + 4.0 * mid->ci * mid->ci) +
                               rel_tol * 2.0 * std::abs(mid->gamma_hat);
            if (gap < -tol) {
                report.convexity = false;
                std::ostringstream msg;
                msg << "convexity: gamma(" << lo.beta << ") + gamma(" << hi.beta << ") - 2 gamma(" << mid->beta
                    << ") = " << gap << " below -" << tol;
                note(msg.str());
            }
        }
    }
    return report;
}

TailReport xbar_tail_diagnostic(const TailConfig& config) {
    if (config.n_w < 500) {
        throw Error(ErrorCode::InvalidArgument, "tail diagnostic needs n_w >= 500");
    }
    TailReport report;
    report.beta = config.beta;
    report.t = config.t;
    report.samples.assign(config.n_w, 0.0);
    const Interval entry = default_entry_window(config.a, config.b);
    const Interval exit = default_exit_window(config.a, config.b);
    const std::uint64_t seed = splitmix64(beta_seed(config.seed, config.beta) ^ fnv1a("tail"));
    parallel_for(config.n_w, config.workers, [&](std::size_t k) {
        TubeProblem problem;
        problem.a = config.a;
        problem.b = config.b;
        problem.beta = config.beta;
        problem.w = sample_wpath(config.t, config.w_ds, seed, k);
        problem.start = LowestStart{entry};
        problem.terminal = exit;
        report.samples[k] = tube_survival_quenched(problem, config.grid).xbar();
    });

    for (double d : config.d_list) {
        MgfRow row;
        row.d = d;
        row.log_mgf = log_mean_exp(report.samples, report.samples.size(), d);
        row.log_mgf_half = log_mean_exp(report.samples, report.samples.size() / 2, d);
        row.stable = std::abs(row.log_mgf - row.log_mgf_half) <= std::log(2.0);
        report.mgf.push_back(row);
    }

    std::vector<double> sorted = report.samples;
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    for (int q = 0; q <= 12; ++q) {
        const double level = 0.50 + 0.04 * q;
        const double threshold = sorted[static_cast<std::size_t>(level * n)];
        const auto above = static_cast<double>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), threshold));
        if (above <= 0.0) {
            continue;
        }
        report.thresholds.push_back(threshold);
        report.log_frequency.push_back(std::log(above / n));
    }
    if (report.thresholds.size() >= 3) {
        const LineFit fit = fit_line(report.thresholds, report.log_frequency);
        report.tail_slope = fit.slope;
        report.r_squared = fit.r_squared;
    }
    return report;
}

}  // namespace smalldev
