#include "smalldev/lattice_dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "smalldev/error.hpp"

namespace smalldev {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool same_spacing(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

// Lattice position of x; throws unless x lies on spacing * Z.
long lattice_index(double x, double spacing) {
    const double r = std::round(x / spacing);
    if (std::abs(r * spacing - x) > 1e-9 * std::max(1.0, std::abs(x))) {
        std::ostringstream msg;
        msg << "start " << x << " is not on the lattice of spacing " << spacing;
        throw Error(ErrorCode::SpacingMismatch, msg.str());
    }
    return static_cast<long>(r);
}

SurvivalResult finish(double log_prob, std::size_t n, double alpha, StartVariant variant, double x0) {
    SurvivalResult r;
    r.log_prob = log_prob;
    r.n = n;
    r.variant = variant;
    r.x0 = x0;
    r.zero_probability = !(log_prob > kNegInf);
    r.exponent = n == 0 ? std::numeric_limits<double>::quiet_NaN() : log_prob / exponent_scale(alpha, n);
    return r;
}

}  // namespace

LatticeKernel make_kernel(const StepLaw& law, double spacing) {
    const LatticeLaw& lat = law.as_lattice();
    if (!same_spacing(lat.spacing, spacing)) {
        std::ostringstream msg;
        msg << "step spacing " << lat.spacing << " differs from lattice spacing " << spacing;
        throw Error(ErrorCode::SpacingMismatch, msg.str());
    }
    LatticeKernel k;
    k.min_offset = lat.pmf.front().first;
    k.probs.assign(static_cast<std::size_t>(lat.pmf.back().first - k.min_offset + 1), 0.0);
    for (const auto& [off, p] : lat.pmf) {
        k.probs[static_cast<std::size_t>(off - k.min_offset)] = p;
    }
    return k;
}

IndexRange lattice_range(const Interval& window, double spacing) {
    if (!(window.lo <= window.hi)) {
        return {0, -1};
    }
    long first = static_cast<long>(std::ceil(window.lo / spacing));
    while (static_cast<double>(first - 1) * spacing >= window.lo) {
        --first;
    }
    while (static_cast<double>(first) * spacing < window.lo) {
        ++first;
    }
    long last = static_cast<long>(std::floor(window.hi / spacing));
    while (static_cast<double>(last + 1) * spacing <= window.hi) {
        ++last;
    }
    while (static_cast<double>(last) * spacing > window.hi) {
        --last;
    }
    return {first, last};
}

double forward_log_survival(const LatticeProblem& problem, long start) {
    IndexRange range = lattice_range(problem.windows.at(0), problem.spacing);
    if (start < range.first || start > range.last) {
        return kNegInf;
    }
    std::vector<double> mass(range.size(), 0.0);
    mass[static_cast<std::size_t>(start - range.first)] = 1.0;
    double log_acc = 0.0;
    std::vector<double> next;
    for (std::size_t i = 0; i < problem.steps(); ++i) {
        const LatticeKernel& kernel = problem.kernels[problem.kernel_of_step[i]];
        const IndexRange to = lattice_range(problem.windows[i + 1], problem.spacing);
        if (to.empty()) {
            return kNegInf;
        }
        next.assign(to.size(), 0.0);
        for (std::size_t k = 0; k < kernel.probs.size(); ++k) {
            const double p = kernel.probs[k];
            if (p == 0.0) {
                continue;
            }
            const long off = kernel.min_offset + static_cast<long>(k);
            // next[j] += p * mass[j - off]
            const long lo = std::max(to.first, range.first + off);
            const long hi = std::min(to.last, range.last + off);
            for (long j = lo; j <= hi; ++j) {
                next[static_cast<std::size_t>(j - to.first)] += p * mass[static_cast<std::size_t>(j - off - range.first)];
            }
        }
        double total = 0.0;
        for (double v : next) {
            total += v;
        }
        if (!(total > 0.0)) {
            return kNegInf;
        }
        log_acc += std::log(total);
        const double inv = 1.0 / total;
        for (double& v : next) {
            v *= inv;
        }
        mass.swap(next);
        range = to;
    }
    return log_acc;
}

BackwardResult backward_log_survival(const LatticeProblem& problem, const Interval* terminal) {
    const std::size_t n = problem.steps();
    Interval last_window = problem.windows.at(n);
    if (terminal != nullptr) {
        last_window = {std::max(last_window.lo, terminal->lo), std::min(last_window.hi, terminal->hi)};
    }
    IndexRange range = lattice_range(last_window, problem.spacing);
    std::vector<double> value(range.size(), 1.0);
    double log_acc = 0.0;
    std::vector<double> prev;
    bool dead = range.empty();
    for (std::size_t step = n; step-- > 0 && !dead;) {
        const LatticeKernel& kernel = problem.kernels[problem.kernel_of_step[step]];
        const IndexRange from = lattice_range(problem.windows[step], problem.spacing);
        if (from.empty()) {
            dead = true;
            range = from;
            break;
        }
        prev.assign(from.size(), 0.0);
        for (std::size_t k = 0; k < kernel.probs.size(); ++k) {
            const double p = kernel.probs[k];
            if (p == 0.0) {
                continue;
            }
            const long off = kernel.min_offset + static_cast<long>(k);
            // prev[j] += p * value[j + off]
            const long lo = std::max(from.first, range.first - off);
            const long hi = std::min(from.last, range.last - off);
            for (long j = lo; j <= hi; ++j) {
                prev[static_cast<std::size_t>(j - from.first)] += p * value[static_cast<std::size_t>(j + off - range.first)];
            }
        }
        const double peak = *std::max_element(prev.begin(), prev.end());
        range = from;
        if (!(peak > 0.0)) {
            dead = true;
            break;
        }
        log_acc += std::log(peak);
        const double inv = 1.0 / peak;
        for (double& v : prev) {
            v *= inv;
        }
        value.swap(prev);
    }
    BackwardResult out;
    if (dead) {
        out.starts = lattice_range(problem.windows.at(0), problem.spacing);
        out.log_prob.assign(out.starts.size(), kNegInf);
        return out;
    }
    out.starts = range;
    out.log_prob.resize(value.size());
    for (std::size_t j = 0; j < value.size(); ++j) {
        out.log_prob[j] = value[j] > 0.0 ? log_acc + std::log(value[j]) : kNegInf;
    }
    return out;
}

LatticeProblem build_problem(const QuenchedEnvironment& envr, const BoundarySpec& boundary, std::size_t n) {
    if (boundary.start_shift + n > envr.length()) {
        std::ostringstream msg;
        msg << "n = " << n << " with t_n = " << boundary.start_shift << " exceeds environment length "
            << envr.length();
        throw Error(ErrorCode::OutOfRange, msg.str());
    }
    const EnvironmentModel& model = envr.model();
    LatticeProblem problem;
    problem.spacing = model.law(0).as_lattice().spacing;
    for (const auto& c : model.components()) {
        problem.kernels.push_back(make_kernel(c.law, problem.spacing));
    }
    problem.kernel_of_step.assign(envr.indices().begin() + static_cast<std::ptrdiff_t>(boundary.start_shift),
                                  envr.indices().begin() + static_cast<std::ptrdiff_t>(boundary.start_shift + n));
    problem.windows = window_bounds(boundary, &envr, n);
    return problem;
}

SurvivalResult solve_problem(const LatticeProblem& problem, double alpha, StartVariant variant, double x0,
                             const std::optional<Interval>& entry, const std::optional<Interval>& exit) {
    const std::size_t n = problem.steps();
    const bool empty = std::any_of(problem.windows.begin(), problem.windows.end(), [&](const Interval& w) {
        return lattice_range(w, problem.spacing).empty();
    });
    if (empty) {
        SurvivalResult r = finish(kNegInf, n, alpha, variant, x0);
        r.empty_window = true;
        return r;
    }
    if (variant == StartVariant::PointStart) {
        return finish(forward_log_survival(problem, lattice_index(x0, problem.spacing)), n, alpha, variant, x0);
    }
    const Interval* terminal = nullptr;
    if (variant == StartVariant::InfEntryWithExit && exit) {
        terminal = &*exit;
    }
    const BackwardResult back = backward_log_survival(problem, terminal);
    if (variant == StartVariant::SupStart) {
        double best = kNegInf;
        long arg = back.starts.first;
        for (std::size_t j = 0; j < back.log_prob.size(); ++j) {
            if (back.log_prob[j] > best) {
                best = back.log_prob[j];
                arg = back.starts.first + static_cast<long>(j);
            }
        }
        return finish(best, n, alpha, variant, static_cast<double>(arg) * problem.spacing);
    }
    if (!entry) {
        throw Error(ErrorCode::InvalidArgument, "inf-entry-with-exit needs an entry window");
    }
    const IndexRange starts = lattice_range(*entry, problem.spacing);
    if (starts.empty()) {
        SurvivalResult r = finish(kNegInf, n, alpha, variant, x0);
        r.empty_window = true;
        return r;
    }
    double worst = std::numeric_limits<double>::infinity();
    long arg = starts.first;
    for (long j = starts.first; j <= starts.last; ++j) {
        double v = kNegInf;
        if (j >= back.starts.first && j <= back.starts.last) {
            v = back.log_prob[static_cast<std::size_t>(j - back.starts.first)];
        }
        if (v < worst) {
            worst = v;
            arg = j;
        }
    }
    return finish(worst, n, alpha, variant, static_cast<double>(arg) * problem.spacing);
}

SurvivalResult exact_survival(const QuenchedEnvironment& envr, const BoundarySpec& boundary, std::size_t n,
                              double x0) {
    return exact_exponent(envr, boundary, n, StartVariant::PointStart, x0);
}

SurvivalResult exact_exponent(const QuenchedEnvironment& envr, const BoundarySpec& boundary, std::size_t n,
                              StartVariant variant, double x0) {
    const LatticeProblem problem = build_problem(envr, boundary, n);
    const double scale = window_scale(boundary.alpha, n);
    std::optional<Interval> entry, exit;
    if (boundary.entry) {
        entry = Interval{boundary.entry->lo * scale, boundary.entry->hi * scale};
    }
    if (boundary.exit) {
        exit = Interval{boundary.exit->lo * scale, boundary.exit->hi * scale};
    }
    return solve_problem(problem, boundary.alpha, variant, x0, entry, exit);
}

SurvivalResult two_walk_exponent(std::span<const double> v_path, const StepLaw& hatv_law,
                                 const BoundarySpec& boundary, std::size_t n, StartVariant variant, double x0) {
    const auto* window = std::get_if<ConstantWindow>(&boundary.mode);
    if (window == nullptr) {
        throw Error(ErrorCode::BadWindow, "two-walk windows are built from a constant [a, b]");
    }
    if (v_path.size() != n + 1) {
        throw Error(ErrorCode::InvalidArgument, "V path must have n + 1 points");
    }
    boundary.validate(n);
    const double scale = window_scale(boundary.alpha, n);
    LatticeProblem problem;
    problem.spacing = hatv_law.as_lattice().spacing;
    problem.kernels.push_back(make_kernel(hatv_law, problem.spacing));
    problem.kernel_of_step.assign(n, 0);
    problem.windows.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        problem.windows[i] = {window->a * scale + v_path[i], window->b * scale + v_path[i]};
    }
    std::optional<Interval> entry, exit;
    if (boundary.entry) {
        entry = Interval{boundary.entry->lo * scale + v_path[0], boundary.entry->hi * scale + v_path[0]};
    }
    if (boundary.exit) {
        exit = Interval{boundary.exit->lo * scale + v_path[n], boundary.exit->hi * scale + v_path[n]};
    }
    return solve_problem(problem, boundary.alpha, variant, x0, entry, exit);
}

double enumerate_small(const QuenchedEnvironment& envr, const BoundarySpec& boundary, std::size_t n, double x0) {
    if (n > 14) {
        throw Error(ErrorCode::TooLarge, "path enumeration is limited to n <= 14");
    }
    if (boundary.start_shift + n > envr.length()) {
        throw Error(ErrorCode::OutOfRange, "environment shorter than t_n + n");
    }
    for (std::size_t i = 0; i < n; ++i) {
        const StepLaw& law = envr.step_law(boundary.start_shift + i);
        if (!law.is_lattice() || law.as_lattice().pmf.size() > 4) {
            throw Error(ErrorCode::TooLarge, "path enumeration needs lattice laws with at most 4 support points");
        }
    }
    const std::vector<Interval> windows = window_bounds(boundary, &envr, n);

    // Depth-first over all paths; positions kept as exact integer multiples.
    struct Frame {
        std::size_t step;
        long index;
        long double weight;
    };
    const double spacing = n == 0 ? 1.0 : envr.step_law(boundary.start_shift).as_lattice().spacing;
    const auto inside = [&](std::size_t i, long idx) {
        const double x = x0 + static_cast<double>(idx) * spacing;
        return windows[i].lo <= x && x <= windows[i].hi;
    };
    if (!inside(0, 0)) {
        return 0.0;
    }
    long double total = 0.0L;
    std::vector<Frame> stack{{0, 0, 1.0L}};
    while (!stack.empty()) {
        const Frame f = stack.back();
        stack.pop_back();
        if (f.step == n) {
            total += f.weight;
            continue;
        }
        const LatticeLaw& lat = envr.step_law(boundary.start_shift + f.step).as_lattice();
        if (!same_spacing(lat.spacing, spacing)) {
            throw Error(ErrorCode::SpacingMismatch, "step laws do not share a spacing");
        }
        for (const auto& [off, p] : lat.pmf) {
            const long next = f.index + off;
            if (p > 0.0 && inside(f.step + 1, next)) {
                stack.push_back({f.step + 1, next, f.weight * static_cast<long double>(p)});
            }
        }
    }
    return static_cast<double>(total);
}

StepLaw discretize_gaussian(double mean, double variance, double spacing, double tail_sd) {
    if (!(variance > 0.0) || !(spacing > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "discretized gaussian needs variance > 0 and spacing > 0");
    }
    const double sd = std::sqrt(variance);
    const long lo = static_cast<long>(std::floor((mean - tail_sd * sd) / spacing));
    const long hi = static_cast<long>(std::ceil((mean + tail_sd * sd) / spacing));
    std::vector<std::pair<int, double>> pmf;
    double total = 0.0;
    for (long k = lo; k <= hi; ++k) {
        const double z = (static_cast<double>(k) * spacing - mean) / sd;
        const double w = std::exp(-0.5 * z * z);
        pmf.emplace_back(static_cast<int>(k), w);
        total += w;
    }
    for (auto& [k, p] : pmf) {
        p /= total;
    }
    // Fold the rounding residue into the central atom so the pmf sums to one.
    double sum = 0.0;
    for (const auto& [k, p] : pmf) {
        sum += p;
    }
    auto centre = std::max_element(pmf.begin(), pmf.end(), [](const auto& x, const auto& y) { return x.second < y.second; });
    centre->second += 1.0 - sum;
    return StepLaw::lattice(spacing, std::move(pmf));
}

}  // namespace smalldev
