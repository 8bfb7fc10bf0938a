#include "portfolio_cam/sim.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <thread>

#include "portfolio_cam/rng.hpp"

namespace pcam {

namespace {

enum StreamTag : std::uint64_t { kDisruptionStream = 1, kSelectionStream = 2, kUniformStream = 3 };

std::uint64_t psi_key(double psi) { return std::bit_cast<std::uint64_t>(psi); }

std::uint64_t disruption_seed(const ScenarioConfig& cfg, std::size_t rep) {
    return derive_seed(cfg.master_seed, {kDisruptionStream, cfg.disruption.rng_seed(), rep});
}

std::uint64_t selection_seed(const ScenarioConfig& cfg, Strategy s, double psi, std::size_t rep) {
    return derive_seed(cfg.master_seed,
                       {kSelectionStream, static_cast<std::uint64_t>(s), psi_key(psi), rep});
}

/// Chan et al. pairwise-mergeable running moments.
struct Moments {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t successes = 0;

    void add(double x, bool success) {
        ++n;
        const double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
        successes += success ? 1 : 0;
    }

    void merge(const Moments& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double total = static_cast<double>(n + o.n);
        const double delta = o.mean - mean;
        mean += delta * static_cast<double>(o.n) / total;
        m2 += o.m2 + delta * delta * static_cast<double>(n) * static_cast<double>(o.n) / total;
        n += o.n;
        successes += o.successes;
    }
};

/// Sums for a sample covariance of a random vector.
struct VectorMoments {
    std::size_t n = 0;
    Eigen::VectorXd sum;
    Eigen::MatrixXd outer;

    explicit VectorMoments(Eigen::Index dim)
        : sum(Eigen::VectorXd::Zero(dim)), outer(Eigen::MatrixXd::Zero(dim, dim)) {}

    void add(const Eigen::VectorXd& x) {
        ++n;
        sum += x;
        outer.noalias() += x * x.transpose();
    }

    void merge(const VectorMoments& o) {
        n += o.n;
        sum += o.sum;
        outer += o.outer;
    }

    Eigen::MatrixXd covariance() const {
        if (n == 0) return Eigen::MatrixXd::Zero(sum.size(), sum.size());
        const double k = static_cast<double>(n);
        const Eigen::VectorXd mu = sum / k;
        return outer / k - mu * mu.transpose();
    }

    Eigen::MatrixXd correlation() const {
        const Eigen::MatrixXd c = covariance();
        const Eigen::VectorXd inv = c.diagonal().cwiseSqrt().cwiseInverse();
        return inv.asDiagonal() * c * inv.asDiagonal();
    }
};

struct Lane {
    Strategy strategy;
    double psi;
    double tau;
    Solution solution;
    std::optional<std::vector<bool>> fixed;
    Rng rng;
};

Lane make_lane(const ScenarioConfig& cfg, Strategy s, double psi, std::size_t rep) {
    Lane lane{s, psi, cfg.tau(psi), strategy_selection(cfg, s, psi, rep), std::nullopt,
              Rng(selection_seed(cfg, s, psi, rep))};
    if (cfg.selection_mode == SelectionMode::DeterministicTopAlpha) {
        lane.fixed = materialize_selection(lane.solution.selection, cfg.selection_mode, psi, lane.rng);
    }
    return lane;
}

EpochRecord make_record(const ScenarioConfig& cfg, std::uint64_t epoch, const AvailabilityOutcome& outcome,
                        std::vector<bool> selected, double tau) {
    EpochRecord r;
    r.epoch = epoch;
    for (std::size_t i = 0; i < selected.size(); ++i) {
        if (selected[i] && outcome.up[i]) {
            r.delivered_total += outcome.delivered_res(static_cast<Eigen::Index>(i));
            ++r.views_delivered;
        }
    }
    r.quality = quality_proxy(outcome, selected, cfg.min_views);
    r.success = r.quality >= tau && r.views_delivered >= cfg.min_views;
    r.selected = std::move(selected);
    r.up = outcome.up;
    return r;
}

/// Drives one replication's disruption chain and feeds every lane the same
/// availability outcome each epoch.
template <class OnRecord, class OnOutcome>
void simulate(const ScenarioConfig& cfg, std::size_t rep, std::vector<Lane>& lanes, OnRecord&& on_record,
              OnOutcome&& on_outcome) {
    DisruptionProcess process(cfg.disruption, disruption_seed(cfg, rep));
    for (std::size_t e = 0; e < cfg.epochs; ++e) {
        process.advance();
        const AvailabilityOutcome outcome = process.realize(cfg.cameras);
        on_outcome(outcome);
        for (std::size_t k = 0; k < lanes.size(); ++k) {
            auto& lane = lanes[k];
            auto selected = lane.fixed ? *lane.fixed
                                       : materialize_selection(lane.solution.selection,
                                                               cfg.selection_mode, lane.psi, lane.rng);
            on_record(k, make_record(cfg, process.state().epoch, outcome, std::move(selected), lane.tau));
        }
    }
}

std::string describe(Strategy s, double psi, std::size_t rep) {
    std::ostringstream msg;
    msg << to_string(s) << " psi=" << psi << " replication=" << rep << ": ";
    return msg.str();
}

RunStats finish(const Moments& m, Strategy s, double psi, double tau) {
    RunStats r;
    r.strategy = s;
    r.psi = psi;
    r.tau = tau;
    r.mean_quality = m.mean;
    r.std_quality = std::sqrt(std::max(m.m2 / static_cast<double>(m.n), 0.0));
    r.epochs_total = m.n;
    r.successes = m.successes;
    r.reliability = static_cast<double>(m.successes) / static_cast<double>(m.n);
    r.ci95_reliability = wilson_interval(m.successes, m.n);
    return r;
}

}  // namespace

std::string_view to_string(Strategy s) noexcept {
    switch (s) {
        case Strategy::BaselineTopExpected: return "baseline_top_expected";
        case Strategy::Portfolio: return "portfolio";
        case Strategy::UniformRandom: return "uniform_random";
    }
    return "unknown";
}

std::string_view to_string(SelectionMode m) noexcept {
    return m == SelectionMode::ProbabilisticAlpha ? "prob" : "top";
}

std::optional<Strategy> parse_strategy(std::string_view name) noexcept {
    for (auto s : {Strategy::BaselineTopExpected, Strategy::Portfolio, Strategy::UniformRandom}) {
        if (name == to_string(s)) return s;
    }
    return std::nullopt;
}

std::optional<SelectionMode> parse_selection_mode(std::string_view name) noexcept {
    if (name == "prob") return SelectionMode::ProbabilisticAlpha;
    if (name == "top") return SelectionMode::DeterministicTopAlpha;
    return std::nullopt;
}

double Threshold::resolve(const Eigen::VectorXd& expected_res, double psi) const {
    switch (basis) {
        case Basis::Absolute: return value;
        case Basis::Budget: return value * budget_deliverable(expected_res, psi);
        case Basis::Total: return value * expected_res.sum();
    }
    return value;
}

std::vector<std::string> ScenarioConfig::diagnostics() const {
    std::vector<std::string> out;
    try {
        validate_cameras(cameras);
    } catch (const ModelError& e) {
        out.emplace_back(e.what());
    }
    if (cameras.empty()) out.emplace_back("scenario has no cameras");
    if (disruption.size() != cameras.size()) {
        out.push_back("disruption process has dimension " + std::to_string(disruption.size()) +
                      " but there are " + std::to_string(cameras.size()) + " cameras");
    } else {
        for (std::size_t i = 0; i < cameras.size(); ++i) {
            if (!(disruption.marginals()[i] == cameras[i].avail)) {
                out.push_back("disruption marginal " + std::to_string(i) +
                              " differs from the camera's availability distribution");
            }
        }
    }
    if (epochs < 1) out.emplace_back("epochs must be at least 1");
    if (replications < 1) out.emplace_back("replications must be at least 1");
    if (min_views < 0) out.emplace_back("min_views must be nonnegative");
    if (!(theta.value >= 0.0)) out.emplace_back("theta must be nonnegative");
    if (!(quality_threshold.value >= 0.0)) out.emplace_back("quality_threshold must be nonnegative");
    if (psi_values.empty()) out.emplace_back("psi_values must not be empty");
    for (double psi : psi_values) {
        if (!(psi >= 1.0) || psi > static_cast<double>(cameras.size())) {
            std::ostringstream msg;
            msg << "psi value " << psi << " must lie in [1, " << cameras.size() << "]";
            out.push_back(msg.str());
        }
    }
    if (strategies.empty()) out.emplace_back("at least one strategy is required");
    try {
        ga.validate();
    } catch (const ModelError& e) {
        out.emplace_back(std::string("optimizer: ") + e.what());
    }
    return out;
}

void ScenarioConfig::validate() const {
    const auto problems = diagnostics();
    if (problems.empty()) return;
    std::string joined;
    for (const auto& p : problems) joined += (joined.empty() ? "" : "\n") + p;
    throw ModelError(joined);
}

PortfolioInputs ScenarioConfig::portfolio_inputs(double psi) const {
    Eigen::VectorXd expected(static_cast<Eigen::Index>(cameras.size()));
    for (std::size_t i = 0; i < cameras.size(); ++i) {
        expected(static_cast<Eigen::Index>(i)) = expected_resolution(cameras[i]);
    }
    return build_portfolio_inputs(cameras, disruption.spatial_rho(), theta.resolve(expected, psi), psi);
}

double ScenarioConfig::tau(double psi) const {
    Eigen::VectorXd expected(static_cast<Eigen::Index>(cameras.size()));
    for (std::size_t i = 0; i < cameras.size(); ++i) {
        expected(static_cast<Eigen::Index>(i)) = expected_resolution(cameras[i]);
    }
    return quality_threshold.resolve(expected, psi);
}

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials) {
    if (trials == 0) return {0.0, 1.0};
    constexpr double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double denom = 1.0 + z * z / n;
    const double centre = (p + z * z / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double quality_proxy(const AvailabilityOutcome& delivered, const std::vector<bool>& selected,
                     int min_views) {
    if (selected.size() != delivered.up.size()) {
        throw ModelError("selection and availability outcome differ in length");
    }
    double total = 0.0;
    int views = 0;
    for (std::size_t i = 0; i < selected.size(); ++i) {
        if (selected[i] && delivered.up[i]) {
            total += delivered.delivered_res(static_cast<Eigen::Index>(i));
            ++views;
        }
    }
    return views < min_views ? 0.0 : total;
}

std::vector<bool> materialize_selection(const SelectionVector& alpha, SelectionMode mode, double psi,
                                        Rng& rng) {
    const std::size_t n = alpha.size();
    std::vector<bool> selected(n, false);
    if (mode == SelectionMode::ProbabilisticAlpha) {
        for (std::size_t i = 0; i < n; ++i) selected[i] = rng.bernoulli(alpha[i]);
        return selected;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return alpha[l] > alpha[r]; });
    const auto k = std::min(n, static_cast<std::size_t>(std::max(std::floor(psi), 0.0)));
    for (std::size_t i = 0; i < k; ++i) selected[order[i]] = true;
    return selected;
}

Solution strategy_selection(const ScenarioConfig& cfg, Strategy strategy, double psi,
                            std::size_t replication_index) {
    const PortfolioInputs inputs = cfg.portfolio_inputs(psi);
    switch (strategy) {
        case Strategy::Portfolio: {
            GaConfig ga = cfg.ga;
            ga.rng_seed = derive_seed(cfg.ga.rng_seed, {cfg.master_seed, psi_key(psi), replication_index});
            return ga_solve(inputs, ga);
        }
        case Strategy::BaselineTopExpected: return baseline_top_expected(inputs);
        case Strategy::UniformRandom:
            return uniform_random_baseline(
                inputs, derive_seed(cfg.master_seed, {kUniformStream, psi_key(psi), replication_index}));
    }
    throw ModelError("unknown strategy");
}

std::vector<EpochRecord> run_replication(const ScenarioConfig& cfg, Strategy strategy, double psi,
                                         std::size_t replication_index) {
    cfg.validate();
    std::vector<Lane> lanes;
    lanes.push_back(make_lane(cfg, strategy, psi, replication_index));
    std::vector<EpochRecord> records;
    records.reserve(cfg.epochs);
    simulate(
        cfg, replication_index, lanes, [&](std::size_t, EpochRecord r) { records.push_back(std::move(r)); },
        [](const AvailabilityOutcome&) {});
    return records;
}

RunStats aggregate(std::span<const EpochRecord> records, Strategy strategy, double psi, double tau) {
    if (records.empty()) throw ModelError("cannot aggregate an empty record set");
    Moments m;
    for (const auto& r : records) m.add(r.quality, r.success);
    return finish(m, strategy, psi, tau);
}

std::size_t replication_threads() {
    std::size_t requested = 0;
    if (const char* env = std::getenv("PORTFOLIO_CAM_THREADS")) {
        requested = static_cast<std::size_t>(std::strtoull(env, nullptr, 10));
    }
    if (requested == 0) requested = std::max(1u, std::thread::hardware_concurrency());
    return requested;
}

ComparisonTable compare_strategies(const ScenarioConfig& cfg) {
    cfg.validate();
    std::vector<double> psis = cfg.psi_values;
    std::sort(psis.begin(), psis.end());
    psis.erase(std::unique(psis.begin(), psis.end()), psis.end());
    std::vector<Strategy> strategies = cfg.strategies;
    std::sort(strategies.begin(), strategies.end());
    strategies.erase(std::unique(strategies.begin(), strategies.end()), strategies.end());

    std::vector<std::pair<Strategy, double>> combos;
    for (double psi : psis) {
        for (auto s : strategies) combos.emplace_back(s, psi);
    }

    const auto dim = static_cast<Eigen::Index>(cfg.size());
    struct ReplicationResult {
        std::vector<Moments> moments;
        std::vector<Solution> solutions;
        VectorMoments p{0};
        VectorMoments delivered{0};
    };
    std::vector<ReplicationResult> results(cfg.replications);

    auto run_one = [&](std::size_t rep) {
        std::vector<Lane> lanes;
        lanes.reserve(combos.size());
        for (const auto& [s, psi] : combos) lanes.push_back(make_lane(cfg, s, psi, rep));
        ReplicationResult res{std::vector<Moments>(combos.size()), {}, VectorMoments(dim),
                              VectorMoments(dim)};
        simulate(
            cfg, rep, lanes,
            [&](std::size_t k, const EpochRecord& r) { res.moments[k].add(r.quality, r.success); },
            [&](const AvailabilityOutcome& o) {
                res.p.add(o.p);
                res.delivered.add(o.delivered_res);
            });
        for (auto& lane : lanes) res.solutions.push_back(std::move(lane.solution));
        results[rep] = std::move(res);
    };

    const std::size_t workers = std::min(replication_threads(), cfg.replications);
    if (workers <= 1) {
        for (std::size_t rep = 0; rep < cfg.replications; ++rep) run_one(rep);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t rep = next++; rep < cfg.replications; rep = next++) run_one(rep);
            });
        }
    }

    ComparisonTable table;
    VectorMoments p(dim), delivered(dim);
    std::vector<Moments> totals(combos.size());
    std::vector<double> objective_sums(combos.size(), 0.0);
    for (std::size_t rep = 0; rep < results.size(); ++rep) {
        auto& res = results[rep];
        p.merge(res.p);
        delivered.merge(res.delivered);
        for (std::size_t k = 0; k < combos.size(); ++k) {
            totals[k].merge(res.moments[k]);
            const auto& sol = res.solutions[k];
            objective_sums[k] += sol.objective;
            for (const auto& d : sol.diagnostics) {
                table.diagnostics.push_back(describe(combos[k].first, combos[k].second, rep) + d);
            }
            table.solutions.push_back({combos[k].first, combos[k].second, rep, sol});
        }
    }
    for (std::size_t k = 0; k < combos.size(); ++k) {
        RunStats row = finish(totals[k], combos[k].first, combos[k].second, cfg.tau(combos[k].second));
        row.mean_objective = objective_sums[k] / static_cast<double>(cfg.replications);
        table.rows.push_back(row);
    }
    table.realized_p_correlation = p.correlation();
    table.delivered_covariance = delivered.covariance();
    return table;
}

}  // namespace pcam
