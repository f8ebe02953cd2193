#include "smalldev/rates.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "smalldev/csv.hpp"
#include "smalldev/error.hpp"

namespace smalldev {

namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

double simpson(std::span<const double> f) {
    const std::size_t n = f.size();
    const double h = 1.0 / static_cast<double>(n - 1);
    double s = 0.0;
    std::size_t end = n;
    if ((n - 1) % 2 == 1) {
        // Odd number of intervals: Simpson 3/8 on the last three.
        end = n - 3;
        s += 3.0 * h / 8.0 * (f[n - 4] + 3.0 * f[n - 3] + 3.0 * f[n - 2] + f[n - 1]);
    }
    if (end >= 3) {
        double odd = 0.0, even = 0.0;
        for (std::size_t i = 1; i + 1 < end; ++i) {
            (i % 2 == 1 ? odd : even) += f[i];
        }
        s += h / 3.0 * (f[0] + 4.0 * odd + 2.0 * even + f[end - 1]);
    }
    return s;
}

}  // namespace

double mogulskii_rate(double sigma2, double a, double b) {
    if (!(a < 0.0 && 0.0 < b)) {
        throw Error(ErrorCode::BadWindow, "need a < 0 < b");
    }
    if (!(sigma2 > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "need sigma^2 > 0");
    }
    return -kPi2 * sigma2 / (2.0 * (b - a) * (b - a));
}

double shao_rate(double sigmaQ2, double c) {
    if (!(c > 0.0)) {
        throw Error(ErrorCode::BadWindow, "need c > 0");
    }
    return -kPi2 * sigmaQ2 / (8.0 * c * c);
}

GammaTable::GammaTable(std::vector<GammaTableEntry> entries) : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(), [](const auto& x, const auto& y) { return x.beta < y.beta; });
    for (std::size_t i = 1; i < entries_.size(); ++i) {
        if (entries_[i].beta == entries_[i - 1].beta) {
            throw Error(ErrorCode::InvalidArgument, "duplicate beta in gamma table");
        }
    }
}

GammaTable GammaTable::from_estimates(const std::vector<GammaEstimate>& estimates) {
    std::vector<GammaTableEntry> entries;
    for (const auto& e : estimates) {
        entries.push_back({e.beta, e.gamma_hat, e.ci});
    }
    return GammaTable(std::move(entries));
}

GammaTable GammaTable::read_csv(std::istream& in) {
    const CsvTable csv = read_csv_table(in);
    const std::size_t beta_col = csv.column("beta");
    const std::size_t gamma_col = csv.column("gamma_hat");
    const std::size_t ci_col = csv.column("ci");
    std::map<double, GammaTableEntry> by_beta;
    for (const auto& row : csv.rows) {
        const double beta = parse_double(row.at(beta_col));
        by_beta[beta] = {beta, parse_double(row.at(gamma_col)), parse_double(row.at(ci_col))};
    }
    std::vector<GammaTableEntry> entries;
    for (const auto& [beta, e] : by_beta) {
        entries.push_back(e);
    }
    return GammaTable(std::move(entries));
}

GammaTable GammaTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::InvalidArgument, "cannot open gamma table " + path);
    }
    return read_csv(in);
}

GammaTableEntry GammaTable::lookup(double beta) const {
    if (entries_.empty() || beta < entries_.front().beta - 1e-12 || beta > entries_.back().beta + 1e-12) {
        std::ostringstream msg;
        msg << "beta = " << beta << " outside the gamma table";
        throw Error(ErrorCode::TableGap, msg.str());
    }
    for (const auto& e : entries_) {
        if (std::abs(e.beta - beta) <= 1e-12) {
            return e;
        }
    }
    const auto right = std::upper_bound(entries_.begin(), entries_.end(), beta,
                                        [](double b, const GammaTableEntry& e) { return b < e.beta; });
    const auto left = right - 1;
    const double theta = (beta - left->beta) / (right->beta - left->beta);
    GammaTableEntry out;
    out.beta = beta;
    out.gamma = (1.0 - theta) * left->gamma + theta * right->gamma;
    out.ci = (1.0 - theta) * left->ci + theta * right->ci + theta * (1.0 - theta) * std::abs(right->gamma - left->gamma);
    return out;
}

RatePrediction rwre_rate(double sigmaA2, double sigmaQ2, double a, double b, const GammaTable& table) {
    if (!(sigmaQ2 > 0.0)) {
        throw Error(ErrorCode::ZeroQuenchedVariance, "need sigma_Q^2 > 0");
    }
    if (!(sigmaA2 >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "need sigma_A^2 >= 0");
    }
    if (!(a < 0.0 && 0.0 < b)) {
        throw Error(ErrorCode::BadWindow, "need a < 0 < b");
    }
    const GammaTableEntry g = table.lookup(std::sqrt(sigmaA2 / sigmaQ2));
    RatePrediction p;
    p.formula = "rwre";
    p.sigmaA2 = sigmaA2;
    p.sigmaQ2 = sigmaQ2;
    p.a = a;
    p.b = b;
    p.gamma = g.gamma;
    p.gamma_ci = g.ci;
    const double width2 = (b - a) * (b - a);
    p.predicted = -sigmaQ2 * g.gamma / width2;
    p.ci = sigmaQ2 * g.ci / width2;
    return p;
}

double c_gh(std::span<const double> g_grid, std::span<const double> h_grid) {
    if (g_grid.size() != h_grid.size() || g_grid.size() < 101) {
        throw Error(ErrorCode::InvalidArgument, "c_gh needs matching grids of at least 101 points");
    }
    std::vector<double> f(g_grid.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double width = h_grid[i] - g_grid[i];
        if (!(width > 0.0)) {
            std::ostringstream msg;
            msg << "g >= h at grid point " << i;
            throw Error(ErrorCode::CrossingBoundaries, msg.str());
        }
        f[i] = 1.0 / (width * width);
    }
    return simpson(f);
}

double c_gh(const std::function<double(double)>& g, const std::function<double(double)>& h, double tol) {
    const auto on_grid = [&](std::size_t points) {
        std::vector<double> gv(points), hv(points);
        for (std::size_t i = 0; i < points; ++i) {
            const double s = static_cast<double>(i) / static_cast<double>(points - 1);
            gv[i] = g(s);
            hv[i] = h(s);
        }
        return c_gh(gv, hv);
    };
    std::size_t points = 101;
    double prev = on_grid(points);
    for (int iter = 0; iter < 20; ++iter) {
        points = 2 * points - 1;
        const double next = on_grid(points);
        if (std::abs(next - prev) < tol) {
            return next;
        }
        prev = next;
    }
    return prev;
}

QuenchedAnnealedGap quenched_vs_annealed_gap(double sigmaA2, double sigmaQ2, double c, const GammaTable& table) {
    QuenchedAnnealedGap out;
    out.recentered = shao_rate(sigmaQ2, c);
    out.centered = rwre_rate(sigmaA2, sigmaQ2, -c, c, table).predicted;
    out.gap = out.centered - out.recentered;
    return out;
}

}  // namespace smalldev
