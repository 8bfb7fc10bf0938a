#include "portfolio_cam/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "portfolio_cam/rng.hpp"

namespace pcam {

namespace {

void require_size(const PortfolioInputs& inputs, const Eigen::VectorXd& alpha) {
    if (static_cast<std::size_t>(alpha.size()) != inputs.size()) {
        throw ModelError("selection has " + std::to_string(alpha.size()) + " entries but there are " +
                         std::to_string(inputs.size()) + " cameras");
    }
}

std::size_t camera_budget(double psi) { return static_cast<std::size_t>(std::max(std::floor(psi), 0.0)); }

Solution indicator_solution(const PortfolioInputs& inputs, const std::vector<std::size_t>& chosen,
                            Solver solver) {
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(inputs.size()));
    for (auto i : chosen) alpha(static_cast<Eigen::Index>(i)) = 1.0;
    return evaluate_selection(inputs, SelectionVector(std::move(alpha)), solver);
}

}  // namespace

SelectionVector::SelectionVector(Eigen::VectorXd alpha) : alpha_(std::move(alpha)) {
    for (Eigen::Index i = 0; i < alpha_.size(); ++i) {
        if (!(alpha_(i) >= 0.0 && alpha_(i) <= 1.0)) {
            std::ostringstream msg;
            msg << "selection entry " << i << " = " << alpha_(i) << " is outside [0, 1]";
            throw ModelError(msg.str());
        }
    }
}

std::string_view to_string(Solver s) noexcept {
    switch (s) {
        case Solver::GA: return "ga";
        case Solver::GridOracle: return "grid_oracle";
        case Solver::BaselineTopExpected: return "baseline_top_expected";
        case Solver::UniformRandom: return "uniform_random";
    }
    return "unknown";
}

void GaConfig::validate() const {
    if (population_size < 2) throw ModelError("population_size must be at least 2");
    if (max_generations < 1) throw ModelError("max_generations must be positive");
    if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0))
        throw ModelError("crossover_rate must lie in [0, 1]");
    if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0))
        throw ModelError("mutation_rate must lie in [0, 1]");
    if (!(mutation_scale > 0.0) || !std::isfinite(mutation_scale))
        throw ModelError("mutation_scale must be positive");
    if (elite_count >= population_size)
        throw ModelError("elite_count must be smaller than population_size");
    if (penalty_weight && (!(*penalty_weight > 0.0) || !std::isfinite(*penalty_weight)))
        throw ModelError("penalty_weight must be positive");
}

double GaConfig::resolved_penalty_weight(const PortfolioInputs& inputs) const {
    if (penalty_weight) return *penalty_weight;
    const double diag = inputs.size() == 0 ? 0.0 : inputs.cov.diagonal().maxCoeff();
    // A zero-variance instance still needs a positive weight for feasibility to dominate.
    return 1e4 * std::max(diag, 1.0);
}

double objective_value(const PortfolioInputs& inputs, const Eigen::VectorXd& alpha) {
    require_size(inputs, alpha);
    return alpha.dot(inputs.cov * alpha);
}

double quality_value(const PortfolioInputs& inputs, const Eigen::VectorXd& alpha) {
    require_size(inputs, alpha);
    return alpha.dot(inputs.expected_res);
}

double constraint_violation(const PortfolioInputs& inputs, const Eigen::VectorXd& alpha) {
    const double quality = quality_value(inputs, alpha);
    double v = std::max(0.0, inputs.theta - quality) + std::max(0.0, alpha.sum() - inputs.psi);
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
        v += std::max(0.0, -alpha(i)) + std::max(0.0, alpha(i) - 1.0);
    }
    return v;
}

double quality_tolerance(double theta) noexcept { return theta == 0.0 ? 1e-9 : 1e-6 * theta; }

bool is_feasible(const PortfolioInputs& inputs, const Eigen::VectorXd& alpha) {
    if (quality_value(inputs, alpha) < inputs.theta - quality_tolerance(inputs.theta)) return false;
    if (alpha.sum() > inputs.psi + kBudgetTolerance) return false;
    return (alpha.array() >= 0.0).all() && (alpha.array() <= 1.0).all();
}

Solution evaluate_selection(const PortfolioInputs& inputs, SelectionVector selection, Solver solver) {
    Solution s;
    const auto& alpha = selection.alpha();
    s.objective = objective_value(inputs, alpha);
    s.quality = quality_value(inputs, alpha);
    s.budget = alpha.sum();
    s.feasible = is_feasible(inputs, alpha);
    s.solver = solver;
    s.selection = std::move(selection);
    return s;
}

Solution ga_solve(const PortfolioInputs& inputs, const GaConfig& cfg) {
    cfg.validate();
    const auto n = static_cast<Eigen::Index>(inputs.size());
    const double weight = cfg.resolved_penalty_weight(inputs);
    Rng rng(cfg.rng_seed);

    auto fitness = [&](const Eigen::VectorXd& a) {
        return objective_value(inputs, a) + weight * constraint_violation(inputs, a);
    };

    std::vector<Eigen::VectorXd> population(cfg.population_size, Eigen::VectorXd(n));
    for (auto& individual : population) {
        for (Eigen::Index g = 0; g < n; ++g) individual(g) = rng.uniform();
    }
    std::vector<double> scores(population.size());
    std::transform(population.begin(), population.end(), scores.begin(), fitness);

    auto best_index = static_cast<std::size_t>(
        std::distance(scores.begin(), std::min_element(scores.begin(), scores.end())));
    Eigen::VectorXd best = population[best_index];
    double best_score = scores[best_index];

    auto tournament = [&]() -> const Eigen::VectorXd& {
        const std::size_t a = rng.below(population.size());
        const std::size_t b = rng.below(population.size());
        return scores[b] < scores[a] ? population[b] : population[a];
    };

    std::vector<double> history;
    history.reserve(cfg.max_generations);
    std::vector<std::size_t> order(population.size());
    std::vector<Eigen::VectorXd> next;
    next.reserve(population.size());

    for (std::size_t gen = 0; gen < cfg.max_generations; ++gen) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t l, std::size_t r) { return scores[l] < scores[r]; });

        next.clear();
        for (std::size_t e = 0; e < cfg.elite_count; ++e) next.push_back(population[order[e]]);

        while (next.size() < population.size()) {
            Eigen::VectorXd child = tournament();
            const Eigen::VectorXd& other = tournament();
            if (rng.uniform() < cfg.crossover_rate) {
                for (Eigen::Index g = 0; g < n; ++g) {
                    if (rng.uniform() < 0.5) child(g) = other(g);
                }
            }
            for (Eigen::Index g = 0; g < n; ++g) {
                if (rng.uniform() < cfg.mutation_rate) {
                    child(g) = std::clamp(child(g) + cfg.mutation_scale * rng.normal(), 0.0, 1.0);
                }
            }
            next.push_back(std::move(child));
        }
        population.swap(next);
        std::transform(population.begin(), population.end(), scores.begin(), fitness);

        const auto it = std::min_element(scores.begin(), scores.end());
        if (*it < best_score) {
            best_score = *it;
            best = population[static_cast<std::size_t>(std::distance(scores.begin(), it))];
        }
#ifdef PCAM_CHECK_INVARIANTS
        if (!history.empty() && best_score > history.back()) {
            throw std::logic_error("elitism violated: best fitness increased");
        }
#endif
        history.push_back(best_score);
    }

    Solution s = evaluate_selection(inputs, SelectionVector(best), Solver::GA);
    s.generations_run = cfg.max_generations;
    s.evaluations = cfg.population_size * (cfg.max_generations + 1);
    s.best_fitness_history = std::move(history);
    s.diagnostics = feasibility_warnings(inputs);
    if (!s.feasible) {
        std::ostringstream msg;
        msg << "no feasible selection found; best effort violates constraints by "
            << constraint_violation(inputs, s.selection.alpha());
        s.diagnostics.push_back(msg.str());
    }
    return s;
}

Solution grid_oracle_solve(const PortfolioInputs& inputs, int steps_per_axis) {
    const std::size_t n = inputs.size();
    if (n > kGridOracleMaxCameras) {
        throw ModelError("grid oracle supports at most " + std::to_string(kGridOracleMaxCameras) +
                         " cameras, got " + std::to_string(n));
    }
    if (steps_per_axis < 2) throw ModelError("grid oracle needs at least 2 steps per axis");

    const auto steps = static_cast<std::size_t>(steps_per_axis);
    const double spacing = 1.0 / static_cast<double>(steps - 1);
    std::vector<std::size_t> digits(n, 0);
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));

    Eigen::VectorXd best_feasible, best_infeasible;
    double best_feasible_obj = std::numeric_limits<double>::infinity();
    double best_violation = std::numeric_limits<double>::infinity();
    double best_violation_obj = std::numeric_limits<double>::infinity();
    std::size_t evaluated = 0;

    // Odometer with the first camera as the most significant digit, so points
    // arrive in lexicographic order and strict comparisons keep the earliest tie.
    while (true) {
        ++evaluated;
        const double obj = objective_value(inputs, alpha);
        if (is_feasible(inputs, alpha)) {
            if (obj < best_feasible_obj) {
                best_feasible_obj = obj;
                best_feasible = alpha;
            }
        } else if (best_feasible.size() == 0) {
            const double v = constraint_violation(inputs, alpha);
            if (v < best_violation || (v == best_violation && obj < best_violation_obj)) {
                best_violation = v;
                best_violation_obj = obj;
                best_infeasible = alpha;
            }
        }

        bool wrapped = true;
        for (std::size_t pos = n; pos-- > 0;) {
            if (++digits[pos] < steps) {
                wrapped = false;
                break;
            }
            digits[pos] = 0;
        }
        if (wrapped) break;
        for (std::size_t i = 0; i < n; ++i) {
            alpha(static_cast<Eigen::Index>(i)) =
                digits[i] + 1 == steps ? 1.0 : static_cast<double>(digits[i]) * spacing;
        }
    }

    const bool found = best_feasible.size() != 0 || n == 0;
    Solution s = evaluate_selection(inputs, SelectionVector(found ? best_feasible : best_infeasible),
                                    Solver::GridOracle);
    s.evaluations = evaluated;
    if (!found) s.diagnostics.push_back("no feasible grid point; returning least-violating point");
    return s;
}

Solution baseline_top_expected(const PortfolioInputs& inputs) {
    std::vector<std::size_t> order(inputs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
        return inputs.expected_res(static_cast<Eigen::Index>(l)) >
               inputs.expected_res(static_cast<Eigen::Index>(r));
    });
    order.resize(std::min(order.size(), camera_budget(inputs.psi)));
    return indicator_solution(inputs, order, Solver::BaselineTopExpected);
}

Solution uniform_random_baseline(const PortfolioInputs& inputs, std::uint64_t seed) {
    std::vector<std::size_t> pool(inputs.size());
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    const std::size_t k = std::min(pool.size(), camera_budget(inputs.psi));
    Rng rng(seed);
    for (std::size_t i = 0; i < k; ++i) {
        std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
    }
    pool.resize(k);
    return indicator_solution(inputs, pool, Solver::UniformRandom);
}

}  // namespace pcam
