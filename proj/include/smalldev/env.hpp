#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <variant>
#include <vector>

#include "smalldev/rng.hpp"

namespace smalldev {

/// Step distribution supported on the lattice spacing * Z.
struct LatticeLaw {
    double spacing = 1.0;
    std::vector<std::pair<int, double>> pmf;  // (offset, probability)
};

struct GaussianLaw {
    double mean = 0.0;
    double variance = 1.0;
};

/// One realization of mu_n: the law of a single increment.
class StepLaw {
public:
    static StepLaw lattice(double spacing, std::vector<std::pair<int, double>> pmf);
    static StepLaw gaussian(double mean, double variance);

    bool is_lattice() const noexcept { return std::holds_alternative<LatticeLaw>(law_); }
    const LatticeLaw& as_lattice() const;
    const GaussianLaw& as_gaussian() const;

    double mean() const noexcept { return mean_; }
    double variance() const noexcept { return variance_; }

    /// E|X - E X|^lambda, closed form for both kinds (any real lambda > -1).
    double central_abs_moment(double lambda) const;
    /// E|X|^lambda.
    double abs_moment(double lambda) const;

    double sample(Philox4x32& rng) const;

private:
    explicit StepLaw(std::variant<LatticeLaw, GaussianLaw> law);

    std::variant<LatticeLaw, GaussianLaw> law_;
    std::vector<double> cdf_;  // lattice only
    double mean_ = 0.0;
    double variance_ = 0.0;
};

struct MixtureComponent {
    StepLaw law;
    double weight;
};

struct SigmaDecomposition {
    double sigmaA2;  // E(M_1^2), variance of the quenched mean
    double sigmaQ2;  // E(U_1^2), mean quenched variance
};

/// Law of mu_1 as a finite mixture of step laws. Weights must sum to one;
/// centering (E M_1 = 0) is recorded but enforced only by the operations
/// that rely on it.
class EnvironmentModel {
public:
    explicit EnvironmentModel(std::vector<MixtureComponent> components);

    const std::vector<MixtureComponent>& components() const noexcept { return components_; }
    std::size_t size() const noexcept { return components_.size(); }
    const StepLaw& law(std::size_t i) const { return components_.at(i).law; }

    double mean_of_means() const noexcept { return mean_of_means_; }
    bool centered() const noexcept;
    bool all_lattice() const noexcept;

    /// Annealed variance of one step, E(X_1^2) - (E X_1)^2.
    double annealed_step_variance() const noexcept;

    std::uint32_t sample_component(Philox4x32& rng) const;

private:
    std::vector<MixtureComponent> components_;
    std::vector<double> cdf_;
    double mean_of_means_ = 0.0;
};

inline constexpr double kCenteringTolerance = 1e-12;

/// (sigma_A^2, sigma_Q^2). Throws NonCentered or ZeroQuenchedVariance.
SigmaDecomposition sigma_decomposition(const EnvironmentModel& model);

struct AssumptionReport {
    double lambda1 = 0, lambda2 = 0, lambda3 = 0, alpha = 0;
    double mean_abs_m_lambda1 = 0;             // E|M_1|^lambda1
    std::vector<double> quenched_u_moments;    // E_mu|U_1|^lambda2 per component
    double annealed_u_moment = 0;              // E[(E_mu|U_1|^lambda2)^lambda3]
    double lambda0_as = 0;                     // 2 / alpha
    double lambda0_prob = 0;                   // 1 / alpha
    bool moments_finite = false;
    bool h2_as = false, h3_as = false;
    bool h2_prob = false, h3_prob = false;
};

AssumptionReport check_assumptions(const EnvironmentModel& model, double lambda1, double lambda2, double lambda3,
                                   double alpha);

/// A realized environment mu_1..mu_N, stored as component indices, with
/// prefix quenched moments M_k = E_mu S_k - S_0 and Gamma_k = Var_mu S_k.
class QuenchedEnvironment {
public:
    QuenchedEnvironment(std::shared_ptr<const EnvironmentModel> model, std::vector<std::uint32_t> indices,
                        std::uint64_t seed = 0);

    std::size_t length() const noexcept { return indices_.size(); }
    std::uint64_t seed() const noexcept { return seed_; }
    const EnvironmentModel& model() const noexcept { return *model_; }
    const std::shared_ptr<const EnvironmentModel>& model_ptr() const noexcept { return model_; }
    const std::vector<std::uint32_t>& indices() const noexcept { return indices_; }

    /// Law of step i+1 (0-based storage).
    const StepLaw& step_law(std::size_t i) const { return model_->law(indices_.at(i)); }

    /// (M_k, Gamma_k); throws OutOfRange unless 0 <= k <= length().
    std::pair<double, double> moments(std::size_t k) const;

    /// Environment of steps offset+1, offset+2, ...
    QuenchedEnvironment shifted(std::size_t offset) const;

private:
    std::shared_ptr<const EnvironmentModel> model_;
    std::vector<std::uint32_t> indices_;
    std::uint64_t seed_;
    std::vector<double> mean_prefix_;
    std::vector<double> var_prefix_;
};

QuenchedEnvironment sample_environment(std::shared_ptr<const EnvironmentModel> model, std::size_t n,
                                       std::uint64_t seed);

inline std::pair<double, double> quenched_moments(const QuenchedEnvironment& envr, std::size_t k) {
    return envr.moments(k);
}

namespace models {

/// Simple symmetric walk, steps +-1.
std::shared_ptr<const EnvironmentModel> simple_walk();
/// Two-point environment: steps uniform on {0, 2} or on {-2, 0}, each with weight 1/2.
std::shared_ptr<const EnvironmentModel> epsilon_model();
/// Degenerate N(0, 1) steps.
std::shared_ptr<const EnvironmentModel> standard_gaussian();

}  // namespace models

}  // namespace smalldev
