#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "portfolio_cam/disruption.hpp"
#include "portfolio_cam/model.hpp"
#include "portfolio_cam/optimizer.hpp"

namespace pcam {

enum class SelectionMode { ProbabilisticAlpha, DeterministicTopAlpha };

// Declaration order is the alphabetical order of the names, which fixes table order.
enum class Strategy { BaselineTopExpected, Portfolio, UniformRandom };

std::string_view to_string(Strategy s) noexcept;
std::string_view to_string(SelectionMode m) noexcept;
std::optional<Strategy> parse_strategy(std::string_view name) noexcept;
std::optional<SelectionMode> parse_selection_mode(std::string_view name) noexcept;

/// A threshold given either in absolute resolution units or as a fraction of
/// an expected deliverable total.
struct Threshold {
    enum class Basis {
        Absolute,
        /// fraction of the sum of the floor(psi) largest E[R_i]
        Budget,
        /// fraction of sum_i E[R_i] over every camera
        Total,
    };
    Basis basis = Basis::Absolute;
    double value = 0.0;

    double resolve(const Eigen::VectorXd& expected_res, double psi) const;
};

struct ScenarioConfig {
    ScenarioConfig(std::vector<CameraSpec> cameras_, DisruptionProcessConfig disruption_, Threshold theta_,
                   std::vector<double> psi_values_)
        : cameras(std::move(cameras_)),
          disruption(std::move(disruption_)),
          theta(theta_),
          psi_values(std::move(psi_values_)) {}

    std::vector<CameraSpec> cameras;
    DisruptionProcessConfig disruption;
    Threshold theta;
    std::vector<double> psi_values;
    Threshold quality_threshold{Threshold::Basis::Total, 0.6};
    std::size_t epochs = 1000;
    std::size_t replications = 1;
    SelectionMode selection_mode = SelectionMode::ProbabilisticAlpha;
    std::vector<Strategy> strategies{Strategy::Portfolio, Strategy::BaselineTopExpected};
    std::uint64_t master_seed = 0;
    int min_views = 2;
    GaConfig ga;

    /// One line per violated invariant; empty when runnable.
    std::vector<std::string> diagnostics() const;
    /// Throws ModelError with every diagnostic.
    void validate() const;

    std::size_t size() const noexcept { return cameras.size(); }
    PortfolioInputs portfolio_inputs(double psi) const;
    double tau(double psi) const;
};

struct EpochRecord {
    std::uint64_t epoch = 0;
    std::vector<bool> selected;
    std::vector<bool> up;
    double delivered_total = 0.0;
    int views_delivered = 0;
    double quality = 0.0;
    bool success = false;

    friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct RunStats {
    Strategy strategy = Strategy::Portfolio;
    double psi = 0.0;
    double mean_quality = 0.0;
    double std_quality = 0.0;
    double reliability = 0.0;
    std::size_t epochs_total = 0;
    std::size_t successes = 0;
    std::pair<double, double> ci95_reliability{0.0, 1.0};
    double tau = 0.0;
    /// Mean objective of the selections used across replications.
    double mean_objective = 0.0;

    double ci95_half_width() const noexcept {
        return 0.5 * (ci95_reliability.second - ci95_reliability.first);
    }
};

/// Wilson score interval for a binomial proportion at z = 1.96 (95%).
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials);

/// Delivered total over selected-and-up cameras, or 0 below min_views views.
double quality_proxy(const AvailabilityOutcome& delivered, const std::vector<bool>& selected,
                     int min_views);

std::vector<bool> materialize_selection(const SelectionVector& alpha, SelectionMode mode, double psi,
                                        Rng& rng);

/// The selection a strategy commits to for one (psi, replication).
Solution strategy_selection(const ScenarioConfig& cfg, Strategy strategy, double psi,
                            std::size_t replication_index);

std::vector<EpochRecord> run_replication(const ScenarioConfig& cfg, Strategy strategy, double psi,
                                         std::size_t replication_index);

/// Population moments and Wilson interval. Throws ModelError on empty input.
RunStats aggregate(std::span<const EpochRecord> records, Strategy strategy, double psi, double tau);

struct SolutionRecord {
    Strategy strategy;
    double psi;
    std::size_t replication;
    Solution solution;
};

struct ComparisonTable {
    /// Ordered by (psi, strategy).
    std::vector<RunStats> rows;
    std::vector<SolutionRecord> solutions;
    std::vector<std::string> diagnostics;
    /// Pearson correlation of the realized availability probabilities.
    Eigen::MatrixXd realized_p_correlation;
    /// Empirical covariance of delivered resolution R_i * up_i (selection ignored).
    Eigen::MatrixXd delivered_covariance;
};

/// Worker count for replications: PORTFOLIO_CAM_THREADS, 0 or unset = hardware.
std::size_t replication_threads();

ComparisonTable compare_strategies(const ScenarioConfig& cfg);

}  // namespace pcam
