#include "smalldev/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "smalldev/csv.hpp"
#include "smalldev/error.hpp"
#include "smalldev/parallel.hpp"

namespace smalldev {

TwoPointLaw TwoPointLaw::make(double u, double p, double v) {
    if (!(u > 0.0) || !(v > 0.0) || !(p > 0.0 && p < 1.0)) {
        throw Error(ErrorCode::UnsupportedLaw, "two-point law needs u > 0, v > 0 and 0 < p < 1");
    }
    const double drift = (1.0 - p) * v - p * u;
    if (std::abs(drift) > 1e-12 * std::max(u, v)) {
        throw Error(ErrorCode::NonCentered, "two-point law has mean " + format_double(drift));
    }
    return {u, p, v};
}

TwoPointLaw TwoPointLaw::parse(const std::string& text) {
    std::istringstream ss(text);
    std::string field;
    std::vector<double> parts;
    while (std::getline(ss, field, ',')) parts.push_back(parse_double(field));
    if (parts.size() != 3) {
        throw Error(ErrorCode::ParseError, "expected u,p,v but got '" + text + "'");
    }
    return make(parts[0], parts[1], parts[2]);
}

double TwoPointLaw::abs_moment(double lambda) const {
    return p * std::pow(u, lambda) + (1.0 - p) * std::pow(v, lambda);
}

double coupling_time_step(const TwoPointLaw& law) {
    const double m = std::min(law.u, law.v);
    return m * m / 400.0;
}

namespace {

CouplingRun embed(const TwoPointLaw& law, std::size_t n, Philox4x32& rng) {
    CouplingRun run;
    run.n = n;
    run.law = law;
    run.walk.assign(n + 1, 0.0);
    run.tau.assign(n + 1, 0.0);
    run.clock_w.assign(n + 1, 0.0);

    const double dt = coupling_time_step(law);
    const double sd = std::sqrt(dt);
    const double var_step = law.second_moment();

    std::size_t k = 0;       // embedded steps so far
    std::size_t next_d = 1;  // next clock index to fill
    std::uint64_t m = 0;     // fine steps taken
    double w = 0.0;
    double lo = -law.u;
    double hi = law.v;
    double t0 = 0.0;
    while (k < n || next_d <= n) {
        ++m;
        const double t1 = static_cast<double>(m) * dt;
        double w1 = w + sd * rng.normal();
        bool exited = false;
        if (k < n) {
            if (w1 <= lo || w1 >= hi) {
                w1 = w1 <= lo ? lo : hi;
                exited = true;
            } else {
                // bridge crossing probabilities for each side
                const double p_lo = std::exp(-2.0 * (w - lo) * (w1 - lo) / dt);
                const double p_hi = std::exp(-2.0 * (hi - w) * (hi - w1) / dt);
                const double p_any = p_lo + p_hi - p_lo * p_hi;
                if (rng.uniform() < p_any) {
                    w1 = rng.uniform() * (p_lo + p_hi) < p_lo ? lo : hi;
                    exited = true;
                }
            }
        }
        while (next_d <= n && static_cast<double>(next_d) * var_step <= t1) {
            const double d = static_cast<double>(next_d) * var_step;
            const double frac = (d - t0) / dt;
            const double mean = w + frac * (w1 - w);
            const double var = std::max(0.0, (d - t0) * (t1 - d) / dt);
            run.clock_w[next_d] = mean + std::sqrt(var) * rng.normal();
            ++next_d;
        }
        if (exited) {
            ++k;
            run.walk[k] = w1;
            run.tau[k] = t1;
            lo = w1 - law.u;
            hi = w1 + law.v;
        }
        w = w1;
        t0 = t1;
    }
    double worst = 0.0;
    for (std::size_t j = 1; j <= n; ++j) {
        worst = std::max(worst, std::abs(run.walk[j] - run.clock_w[j]));
    }
    run.max_dist = worst;
    return run;
}

std::vector<double> sorted_max_dists(const TwoPointLaw& law, std::size_t n, std::size_t reps, std::uint64_t seed,
                                     unsigned workers) {
    std::vector<double> out(reps);
    parallel_for(reps, workers, [&](std::size_t r) {
        auto rng = make_stream(seed, "couple", r);
        out[r] = embed(law, n, rng).max_dist;
    });
    std::sort(out.begin(), out.end());
    return out;
}

double median_of_sorted(const std::vector<double>& xs) {
    const std::size_t s = xs.size();
    if (s == 0) return std::numeric_limits<double>::quiet_NaN();
    return s % 2 ? xs[s / 2] : 0.5 * (xs[s / 2 - 1] + xs[s / 2]);
}

}  // namespace

CouplingRun skorokhod_couple(const TwoPointLaw& law, std::size_t n, std::uint64_t seed, std::uint64_t replica) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "coupling needs n >= 1");
    auto rng = make_stream(seed, "couple", replica);
    return embed(law, n, rng);
}

CouplingTailReport coupling_tail_report(const TwoPointLaw& law, std::size_t n, std::size_t reps,
                                        const std::vector<double>& x_grid, std::uint64_t seed, unsigned workers) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "coupling needs n >= 1");
    if (reps < 1000) throw Error(ErrorCode::InvalidArgument, "coupling tail report needs reps >= 1000");
    CouplingTailReport report;
    report.law = law;
    report.n = n;
    report.reps = reps;
    report.max_dists = sorted_max_dists(law, n, reps, seed, workers);
    report.median = median_of_sorted(report.max_dists);
    const double nn = static_cast<double>(n);
    const double m2 = law.abs_moment(2.0);
    const double m4 = law.abs_moment(4.0);
    for (double x : x_grid) {
        if (!(x >= 0.0)) throw Error(ErrorCode::InvalidArgument, "tail grid points must be >= 0");
        CouplingTailRow row;
        row.x = x;
        const auto first = std::lower_bound(report.max_dists.begin(), report.max_dists.end(), x);
        row.empirical_tail =
            static_cast<double>(report.max_dists.end() - first) / static_cast<double>(reps);
        const double inf = std::numeric_limits<double>::infinity();
        row.envelope_l2 = x > 0.0 ? 2.0 * nn * m2 / (x * x) : inf;
        row.envelope_l4 = x > 0.0 ? 2.0 * nn * m4 / (x * x * x * x) : inf;
        report.rows.push_back(row);
    }
    return report;
}

double coupling_median(const TwoPointLaw& law, std::size_t n, std::size_t reps, std::uint64_t seed,
                       unsigned workers) {
    if (n < 1 || reps < 1) throw Error(ErrorCode::InvalidArgument, "coupling median needs n, reps >= 1");
    return median_of_sorted(sorted_max_dists(law, n, reps, seed, workers));
}

}  // namespace smalldev
