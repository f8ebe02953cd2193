#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "smalldev/gamma_fn.hpp"

namespace smalldev {

/// i.i.d. walk limit: -pi^2 sigma^2 / (2 (b - a)^2). Throws BadWindow unless a < 0 < b.
double mogulskii_rate(double sigma2, double a, double b);

/// Shao's limit for the window of half-width c around the quenched mean:
/// -pi^2 sigma_Q^2 / (8 c^2).
double shao_rate(double sigmaQ2, double c);

struct GammaTableEntry {
    double beta;
    double gamma;
    double ci;
};

/// gamma(beta) estimates on a grid of beta values, interpolated linearly.
class GammaTable {
public:
    GammaTable() = default;
    explicit GammaTable(std::vector<GammaTableEntry> entries);

    static GammaTable from_estimates(const std::vector<GammaEstimate>& estimates);
    /// Reads the CSV written by `gamma` / `gamma-table` (lines starting with '#' are skipped).
    static GammaTable read_csv(std::istream& in);
    static GammaTable load(const std::string& path);

    const std::vector<GammaTableEntry>& entries() const noexcept { return entries_; }
    bool empty() const noexcept { return entries_.empty(); }

    /// Interpolated (gamma, ci). Between nodes the CI is widened by
    /// theta (1 - theta) |gamma_right - gamma_left|. Throws TableGap outside the grid.
    GammaTableEntry lookup(double beta) const;

private:
    std::vector<GammaTableEntry> entries_;  // sorted by beta
};

struct RatePrediction {
    std::string formula;
    double sigmaA2 = 0.0;
    double sigmaQ2 = 0.0;
    double a = 0.0;
    double b = 0.0;
    double predicted = 0.0;  // exponent, < 0
    double ci = 0.0;         // half-width propagated from the gamma table
    double gamma = 0.0;
    double gamma_ci = 0.0;
};

/// Quenched exponent -sigma_Q^2 gamma(sigma_A / sigma_Q) / (b - a)^2.
RatePrediction rwre_rate(double sigmaA2, double sigmaQ2, double a, double b, const GammaTable& table);

/// Integral of (h - g)^-2 over [0, 1] from values on a uniform grid
/// (>= 101 points) by composite Simpson. Throws CrossingBoundaries if g >= h.
double c_gh(std::span<const double> g_grid, std::span<const double> h_grid);

/// Same for continuous g, h: the grid is doubled from 101 points until two
/// successive results differ by less than `tol`.
double c_gh(const std::function<double(double)>& g, const std::function<double(double)>& h, double tol = 1e-8);

struct QuenchedAnnealedGap {
    double recentered;  // window around the quenched mean
    double centered;    // window around 0
    double gap;         // centered - recentered, <= 0
};

QuenchedAnnealedGap quenched_vs_annealed_gap(double sigmaA2, double sigmaQ2, double c, const GammaTable& table);

}  // namespace smalldev
