#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "portfolio_cam/model.hpp"

namespace pcam {

/// Camera selection vector; every component lies in [0, 1].
class SelectionVector {
public:
    SelectionVector() = default;
    /// Throws ModelError if any component is outside [0, 1] or not finite.
    explicit SelectionVector(Eigen::VectorXd alpha);

    const Eigen::VectorXd& alpha() const noexcept { return alpha_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(alpha_.size()); }
    double operator[](std::size_t i) const { return alpha_(static_cast<Eigen::Index>(i)); }

private:
    Eigen::VectorXd alpha_;
};

enum class Solver { GA, GridOracle, BaselineTopExpected, UniformRandom };

std::string_view to_string(Solver s) noexcept;

struct GaConfig {
    std::size_t population_size = 100;
    std::size_t max_generations = 300;
    double crossover_rate = 0.9;
    double mutation_rate = 0.1;
    double mutation_scale = 0.1;
    std::size_t elite_count = 4;
    /// Unset means 1e4 * max(diag(cov)), resolved per instance.
    std::optional<double> penalty_weight;
    std::uint64_t rng_seed = 0x5eed;

    /// Throws ModelError naming the first bad field.
    void validate() const;
    double resolved_penalty_weight(const PortfolioInputs& inputs) const;
};

struct Solution {
    SelectionVector selection;
    double objective = 0.0;
    double quality = 0.0;
    double budget = 0.0;
    bool feasible = false;
    std::size_t generations_run = 0;
    /// Objective evaluations performed (grid points for the oracle).
    std::size_t evaluations = 0;
    Solver solver = Solver::GA;
    std::vector<std::string> diagnostics;
    /// GA only: best penalized fitness after each generation.
    std::vector<double> best_fitness_history;
};

/// alpha' cov alpha. Throws ModelError on dimension mismatch.
double objective_value(const PortfolioInputs& inputs, const Eigen::VectorXd& alpha);
double quality_value(const PortfolioInputs& inputs, const Eigen::VectorXd& alpha);

/// Total amount by which alpha violates the quality, budget and box constraints.
double constraint_violation(const PortfolioInputs& inputs, const Eigen::VectorXd& alpha);

/// 1e-6 * theta, or 1e-9 when theta is zero.
double quality_tolerance(double theta) noexcept;
inline constexpr double kBudgetTolerance = 1e-9;

bool is_feasible(const PortfolioInputs& inputs, const Eigen::VectorXd& alpha);

/// Fills objective/quality/budget/feasible for a finished selection.
Solution evaluate_selection(const PortfolioInputs& inputs, SelectionVector selection, Solver solver);

/// Penalized-fitness genetic algorithm over real-valued chromosomes.
/// Deterministic for a fixed cfg.rng_seed. An unattainable Θ yields the best
/// effort with feasible == false and a diagnostic instead of an error.
Solution ga_solve(const PortfolioInputs& inputs, const GaConfig& cfg = {});

inline constexpr std::size_t kGridOracleMaxCameras = 8;

/// Exhaustive search over {0, 1/(s-1), ..., 1}^N. Throws ModelError when
/// N > kGridOracleMaxCameras or steps_per_axis < 2.
Solution grid_oracle_solve(const PortfolioInputs& inputs, int steps_per_axis);

/// alpha_i = 1 for the floor(psi) cameras with largest E[R_i], lower index wins ties.
Solution baseline_top_expected(const PortfolioInputs& inputs);

/// floor(psi) distinct cameras chosen uniformly at random.
Solution uniform_random_baseline(const PortfolioInputs& inputs, std::uint64_t seed);

}  // namespace pcam
