#include "smalldev/env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "smalldev/error.hpp"

namespace smalldev {

namespace {

double gaussian_central_abs_moment(double variance, double lambda) {
    if (variance == 0.0) {
        return lambda == 0.0 ? 1.0 : 0.0;
    }
    // E|Z|^l = 2^{l/2} Gamma((l+1)/2) / sqrt(pi)
    const double log_m = 0.5 * lambda * std::log(2.0 * variance) + std::lgamma(0.5 * (lambda + 1.0)) -
                         0.5 * std::log(std::numbers::pi);
    return std::exp(log_m);
}

std::size_t pick(const std::vector<double>& cdf, double u) {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

}  // namespace

StepLaw::StepLaw(std::variant<LatticeLaw, GaussianLaw> law) : law_(std::move(law)) {}

StepLaw StepLaw::lattice(double spacing, std::vector<std::pair<int, double>> pmf) {
    if (!(spacing > 0.0) || !std::isfinite(spacing)) {
        throw Error(ErrorCode::InvalidArgument, "lattice spacing must be positive");
    }
    if (pmf.empty()) {
        throw Error(ErrorCode::InvalidArgument, "lattice pmf is empty");
    }
    std::sort(pmf.begin(), pmf.end());
    double total = 0.0;
    for (std::size_t i = 0; i < pmf.size(); ++i) {
        if (!(pmf[i].second >= 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "lattice probabilities must be nonnegative");
        }
        if (i > 0 && pmf[i].first == pmf[i - 1].first) {
            throw Error(ErrorCode::InvalidArgument, "duplicate lattice offset");
        }
        total += pmf[i].second;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg << "lattice probabilities sum to " << total;
        throw Error(ErrorCode::InvalidArgument, msg.str());
    }
    StepLaw out(LatticeLaw{spacing, std::move(pmf)});
    const auto& lat = std::get<LatticeLaw>(out.law_);
    double m = 0.0, m2 = 0.0, acc = 0.0;
    for (const auto& [k, p] : lat.pmf) {
        m += p * k * spacing;
        m2 += p * (k * spacing) * (k * spacing);
        acc += p;
        out.cdf_.push_back(acc);
    }
    out.mean_ = m;
    out.variance_ = std::max(0.0, m2 - m * m);
    return out;
}

StepLaw StepLaw::gaussian(double mean, double variance) {
    if (!std::isfinite(mean) || !(variance >= 0.0) || !std::isfinite(variance)) {
        throw Error(ErrorCode::InvalidArgument, "gaussian law needs finite mean and variance >= 0");
    }
    StepLaw out(GaussianLaw{mean, variance});
    out.mean_ = mean;
    out.variance_ = variance;
    return out;
}

const LatticeLaw& StepLaw::as_lattice() const {
    if (!is_lattice()) {
        throw Error(ErrorCode::SpacingMismatch, "step law is not lattice-supported");
    }
    return std::get<LatticeLaw>(law_);
}

const GaussianLaw& StepLaw::as_gaussian() const {
    if (is_lattice()) {
        throw Error(ErrorCode::InvalidArgument, "step law is not gaussian");
    }
    return std::get<GaussianLaw>(law_);
}

double StepLaw::central_abs_moment(double lambda) const {
    if (!(lambda > -1.0)) {
        throw Error(ErrorCode::UnsupportedLaw, "absolute moment order must exceed -1");
    }
    if (const auto* lat = std::get_if<LatticeLaw>(&law_)) {
        double s = 0.0;
        for (const auto& [k, p] : lat->pmf) {
            const double d = std::abs(k * lat->spacing - mean_);
            if (p > 0.0) {
                s += p * (d == 0.0 ? (lambda == 0.0 ? 1.0 : 0.0) : std::pow(d, lambda));
            }
        }
        return s;
    }
    return gaussian_central_abs_moment(variance_, lambda);
}

double StepLaw::abs_moment(double lambda) const {
    if (const auto* lat = std::get_if<LatticeLaw>(&law_)) {
        double s = 0.0;
        for (const auto& [k, p] : lat->pmf) {
            const double d = std::abs(k * lat->spacing);
            if (p > 0.0) {
                s += p * (d == 0.0 ? (lambda == 0.0 ? 1.0 : 0.0) : std::pow(d, lambda));
            }
        }
        return s;
    }
    if (mean_ == 0.0) {
        return gaussian_central_abs_moment(variance_, lambda);
    }
    throw Error(ErrorCode::UnsupportedLaw, "raw absolute moment of a non-centered gaussian");
}

double StepLaw::sample(Philox4x32& rng) const {
    if (const auto* lat = std::get_if<LatticeLaw>(&law_)) {
        return lat->pmf[pick(cdf_, rng.uniform())].first * lat->spacing;
    }
    return mean_ + std::sqrt(variance_) * rng.normal();
}

EnvironmentModel::EnvironmentModel(std::vector<MixtureComponent> components) : components_(std::move(components)) {
    if (components_.empty()) {
        throw Error(ErrorCode::InvalidArgument, "environment model has no components");
    }
    double total = 0.0;
    for (const auto& c : components_) {
        if (!(c.weight >= 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "mixture weights must be nonnegative");
        }
        total += c.weight;
        cdf_.push_back(total);
        mean_of_means_ += c.weight * c.law.mean();
    }
    if (std::abs(total - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg << "mixture weights sum to " << total;
        throw Error(ErrorCode::InvalidArgument, msg.str());
    }
}

bool EnvironmentModel::centered() const noexcept { return std::abs(mean_of_means_) <= kCenteringTolerance; }

bool EnvironmentModel::all_lattice() const noexcept {
    return std::all_of(components_.begin(), components_.end(), [](const auto& c) { return c.law.is_lattice(); });
}

double EnvironmentModel::annealed_step_variance() const noexcept {
    double second = 0.0;
    for (const auto& c : components_) {
        second += c.weight * (c.law.variance() + c.law.mean() * c.law.mean());
    }
    return second - mean_of_means_ * mean_of_means_;
}

std::uint32_t EnvironmentModel::sample_component(Philox4x32& rng) const {
    return static_cast<std::uint32_t>(pick(cdf_, rng.uniform()));
}

SigmaDecomposition sigma_decomposition(const EnvironmentModel& model) {
    if (!model.centered()) {
        std::ostringstream msg;
        msg << "E M_1 = " << model.mean_of_means();
        throw Error(ErrorCode::NonCentered, msg.str());
    }
    SigmaDecomposition out{0.0, 0.0};
    for (const auto& c : model.components()) {
        out.sigmaA2 += c.weight * c.law.mean() * c.law.mean();
        out.sigmaQ2 += c.weight * c.law.variance();
    }
    if (out.sigmaQ2 <= 0.0) {
        throw Error(ErrorCode::ZeroQuenchedVariance, "sigma_Q^2 = 0");
    }
    return out;
}

AssumptionReport check_assumptions(const EnvironmentModel& model, double lambda1, double lambda2, double lambda3,
                                   double alpha) {
    if (!(lambda1 > 2.0) || !(lambda2 > 2.0) || !(lambda3 > 2.0)) {
        throw Error(ErrorCode::InvalidArgument, "lambda1, lambda2, lambda3 must exceed 2");
    }
    if (!(alpha > 0.0 && alpha < 0.5)) {
        throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1/2)");
    }
    sigma_decomposition(model);

    AssumptionReport r;
    r.lambda1 = lambda1;
    r.lambda2 = lambda2;
    r.lambda3 = lambda3;
    r.alpha = alpha;
    r.lambda0_as = 2.0 / alpha;
    r.lambda0_prob = 1.0 / alpha;
    for (const auto& c : model.components()) {
        const double m = std::abs(c.law.mean());
        r.mean_abs_m_lambda1 += c.weight * (m == 0.0 ? 0.0 : std::pow(m, lambda1));
        const double u = c.law.central_abs_moment(lambda2);
        r.quenched_u_moments.push_back(u);
        r.annealed_u_moment += c.weight * std::pow(u, lambda3);
    }
    r.moments_finite = std::isfinite(r.mean_abs_m_lambda1) && std::isfinite(r.annealed_u_moment);
    // The flags record the inequalities for the lambdas as given, except where
    // the moment does not depend on lambda: M_1 = 0 a.s. makes any lambda1
    // admissible, and a single-law environment any lambda3.
    bool zero_means = true;
    for (const auto& c : model.components()) zero_means = zero_means && c.law.mean() == 0.0;
    const bool single_law = model.components().size() == 1;
    const auto h2 = [&](double lambda0) {
        return r.moments_finite && lambda0 > 2.0 && (zero_means || lambda1 > lambda0);
    };
    const auto h3 = [&](double lambda0) {
        return r.moments_finite && lambda2 > 2.0 && (single_law || lambda3 > std::max(lambda0 / 2.0, 2.0));
    };
    r.h2_as = h2(r.lambda0_as);
    r.h3_as = h3(r.lambda0_as);
    r.h2_prob = h2(r.lambda0_prob);
    r.h3_prob = h3(r.lambda0_prob);
    return r;
}

QuenchedEnvironment::QuenchedEnvironment(std::shared_ptr<const EnvironmentModel> model,
                                         std::vector<std::uint32_t> indices, std::uint64_t seed)
    : model_(std::move(model)), indices_(std::move(indices)), seed_(seed) {
    if (!model_) {
        throw Error(ErrorCode::InvalidArgument, "environment needs a model");
    }
    mean_prefix_.assign(indices_.size() + 1, 0.0);
    var_prefix_.assign(indices_.size() + 1, 0.0);
    for (std::size_t i = 0; i < indices_.size(); ++i) {
        if (indices_[i] >= model_->size()) {
            throw Error(ErrorCode::OutOfRange, "component index outside the model");
        }
        const StepLaw& law = model_->law(indices_[i]);
        mean_prefix_[i + 1] = mean_prefix_[i] + law.mean();
        var_prefix_[i + 1] = var_prefix_[i] + law.variance();
    }
}

std::pair<double, double> QuenchedEnvironment::moments(std::size_t k) const {
    if (k > indices_.size()) {
        std::ostringstream msg;
        msg << "k = " << k << " exceeds environment length " << indices_.size();
        throw Error(ErrorCode::OutOfRange, msg.str());
    }
    return {mean_prefix_[k], var_prefix_[k]};
}

QuenchedEnvironment QuenchedEnvironment::shifted(std::size_t offset) const {
    if (offset > indices_.size()) {
        throw Error(ErrorCode::OutOfRange, "shift beyond environment length");
    }
    return QuenchedEnvironment(model_, std::vector<std::uint32_t>(indices_.begin() + offset, indices_.end()), seed_);
}

QuenchedEnvironment sample_environment(std::shared_ptr<const EnvironmentModel> model, std::size_t n,
                                       std::uint64_t seed) {
    if (!model) {
        throw Error(ErrorCode::InvalidArgument, "environment needs a model");
    }
    auto rng = make_stream(seed, "env", 0);
    std::vector<std::uint32_t> indices(n);
    for (auto& idx : indices) {
        idx = model->sample_component(rng);
    }
    return QuenchedEnvironment(std::move(model), std::move(indices), seed);
}

namespace models {

std::shared_ptr<const EnvironmentModel> simple_walk() {
    return std::make_shared<const EnvironmentModel>(
        std::vector<MixtureComponent>{{StepLaw::lattice(1.0, {{-1, 0.5}, {1, 0.5}}), 1.0}});
}

std::shared_ptr<const EnvironmentModel> epsilon_model() {
    return std::make_shared<const EnvironmentModel>(
        std::vector<MixtureComponent>{{StepLaw::lattice(1.0, {{0, 0.5}, {2, 0.5}}), 0.5},
                                      {StepLaw::lattice(1.0, {{-2, 0.5}, {0, 0.5}}), 0.5}});
}

std::shared_ptr<const EnvironmentModel> standard_gaussian() {
    return std::make_shared<const EnvironmentModel>(
        std::vector<MixtureComponent>{{StepLaw::gaussian(0.0, 1.0), 1.0}});
}

}  // namespace models

}  // namespace smalldev
