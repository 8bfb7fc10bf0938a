#include <doctest.h>

#include <cstdlib>
#include <numeric>

#include "oracles.hpp"
#include "portfolio_cam/sim.hpp"

using namespace pcam;
using doctest::Approx;

namespace {

ScenarioConfig make_config(std::vector<double> res, Eigen::MatrixXd rho, AvailabilityDist avail,
                           std::vector<double> psi_values) {
    std::vector<CameraSpec> cams;
    for (std::size_t i = 0; i < res.size(); ++i) cams.push_back({int(i), res[i], avail});
    DisruptionProcessConfig disruption(CorrelationMatrix(std::move(rho)), 0.0,
                                       std::vector<AvailabilityDist>(res.size(), avail), 3);
    ScenarioConfig cfg(std::move(cams), std::move(disruption), {Threshold::Basis::Budget, 0.9},
                       std::move(psi_values));
    cfg.epochs = 500;
    cfg.ga.max_generations = 60;
    cfg.master_seed = 42;
    return cfg;
}

Eigen::MatrixXd block_rho(std::size_t n, double within, double across) {
    Eigen::MatrixXd r(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) r(i, j) = i == j ? 1.0 : (i < n / 2) == (j < n / 2) ? within : across;
    }
    return r;
}

AvailabilityOutcome outcome(std::vector<double> res, std::vector<bool> up) {
    AvailabilityOutcome o;
    o.p = Eigen::VectorXd::Constant(Eigen::Index(res.size()), 0.5);
    o.up = up;
    o.delivered_res.resize(Eigen::Index(res.size()));
    for (std::size_t i = 0; i < res.size(); ++i) o.delivered_res(Eigen::Index(i)) = up[i] ? res[i] : 0.0;
    return o;
}

}  // namespace

TEST_CASE("strategy and mode names") {
    CHECK(to_string(Strategy::Portfolio) == "portfolio");
    CHECK(to_string(Strategy::BaselineTopExpected) == "baseline_top_expected");
    CHECK(to_string(Strategy::UniformRandom) == "uniform_random");
    for (auto s : {Strategy::Portfolio, Strategy::BaselineTopExpected, Strategy::UniformRandom}) {
        CHECK(parse_strategy(to_string(s)) == s);
    }
    CHECK_FALSE(parse_strategy("best").has_value());
    CHECK(parse_selection_mode("prob") == SelectionMode::ProbabilisticAlpha);
    CHECK(parse_selection_mode("top") == SelectionMode::DeterministicTopAlpha);
    CHECK_FALSE(parse_selection_mode("random").has_value());
}

TEST_CASE("threshold bases") {
    Eigen::VectorXd e(3);
    e << 100, 50, 80;
    CHECK(Threshold{Threshold::Basis::Absolute, 7}.resolve(e, 2) == 7);
    CHECK(Threshold{Threshold::Basis::Budget, 0.5}.resolve(e, 2) == 90);
    CHECK(Threshold{Threshold::Basis::Total, 0.5}.resolve(e, 2) == 115);
}

TEST_CASE("quality_proxy examples") {
    const std::vector<double> r{100, 200, 300};
    const auto all_up = outcome(r, {true, true, true});
    CHECK(quality_proxy(all_up, {false, false, false}, 2) == 0);
    CHECK(quality_proxy(all_up, {true, true, true}, 2) == 600);
    CHECK(quality_proxy(outcome(r, {false, true, false}), {true, true, true}, 2) == 0);
    CHECK(quality_proxy(outcome(r, {false, true, false}), {true, true, true}, 1) == 200);
    CHECK(quality_proxy(outcome(r, {true, true, false}), {false, true, true}, 1) == 200);
    CHECK_THROWS_AS(quality_proxy(all_up, {true}, 0), ModelError);
}

TEST_CASE("materialize_selection") {
    Rng rng(1);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(4);
    for (auto mode : {SelectionMode::ProbabilisticAlpha, SelectionMode::DeterministicTopAlpha}) {
        CHECK(materialize_selection(SelectionVector(ones), mode, 4, rng) == std::vector<bool>(4, true));
    }
    Eigen::VectorXd first = Eigen::VectorXd::Zero(4);
    first(0) = 1;
    for (int t = 0; t < 100; ++t) {
        CHECK(materialize_selection(SelectionVector(first), SelectionMode::ProbabilisticAlpha, 1, rng) ==
              std::vector<bool>{true, false, false, false});
    }

    Eigen::VectorXd mixed(5);
    mixed << 0.3, 0.9, 0.3, 0.3, 0.1;
    CHECK(materialize_selection(SelectionVector(mixed), SelectionMode::DeterministicTopAlpha, 2.7, rng) ==
          std::vector<bool>{true, true, false, false, false});
    CHECK(materialize_selection(SelectionVector(mixed), SelectionMode::DeterministicTopAlpha, 3, rng) ==
          std::vector<bool>{true, true, true, false, false});

    constexpr int n = 100'000;
    Eigen::VectorXd a(3);
    a << 0.5, 0.2, 0.9;
    std::vector<int> counts(3, 0);
    for (int t = 0; t < n; ++t) {
        const auto s = materialize_selection(SelectionVector(a), SelectionMode::ProbabilisticAlpha, 3, rng);
        for (int i = 0; i < 3; ++i) counts[i] += s[i];
    }
    for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(double(counts[i]) / n - a(i)) < 3 * std::sqrt(a(i) * (1 - a(i)) / n));
    }
}

TEST_CASE("scenario validation") {
    auto cfg = make_config({100, 100, 100}, Eigen::MatrixXd::Identity(3, 3), {}, {2});
    CHECK(cfg.diagnostics().empty());
    cfg.epochs = 0;
    cfg.replications = 0;
    cfg.psi_values = {0.5, 4};
    cfg.quality_threshold.value = -1;
    cfg.strategies.clear();
    const auto d = cfg.diagnostics();
    CHECK(d.size() == 6);
    CHECK_THROWS_AS(cfg.validate(), ModelError);

    auto mismatch = make_config({100, 100}, Eigen::MatrixXd::Identity(2, 2), {}, {1});
    mismatch.cameras[1].avail = AvailabilityDist(3, 1);
    CHECK(mismatch.diagnostics().size() == 1);
}

TEST_CASE("run_replication basics") {
    auto cfg = make_config({100, 120, 140, 160}, block_rho(4, 0.7, 0.1), {}, {2});
    cfg.epochs = 1;
    CHECK(run_replication(cfg, Strategy::Portfolio, 2, 0).size() == 1);

    cfg.epochs = 300;
    for (auto mode : {SelectionMode::ProbabilisticAlpha, SelectionMode::DeterministicTopAlpha}) {
        cfg.selection_mode = mode;
        for (auto s : {Strategy::Portfolio, Strategy::BaselineTopExpected, Strategy::UniformRandom}) {
            const auto a = run_replication(cfg, s, 2, 3);
            CHECK(a == run_replication(cfg, s, 2, 3));
            CHECK(a != run_replication(cfg, s, 2, 4));
            for (const auto& r : a) {
                double expected_total = 0;
                int views = 0;
                for (std::size_t i = 0; i < 4; ++i) {
                    if (r.selected[i] && r.up[i]) {
                        expected_total += cfg.cameras[i].resolution;
                        ++views;
                    }
                }
                CHECK(r.delivered_total == expected_total);
                CHECK(r.views_delivered == views);
                CHECK(r.quality >= 0);
                CHECK(r.quality <= 520);
                CHECK(r.success == (r.quality >= cfg.tau(2) && views >= cfg.min_views));
                if (mode == SelectionMode::DeterministicTopAlpha || s != Strategy::Portfolio) {
                    CHECK(r.views_delivered <= 2);
                }
            }
        }
    }
}

TEST_CASE("near-certain availability succeeds every epoch") {
    auto cfg = make_config({100, 120, 140}, Eigen::MatrixXd::Identity(3, 3), AvailabilityDist(1e6, 1), {3});
    cfg.quality_threshold = {Threshold::Basis::Total, 0.99};
    const auto records = run_replication(cfg, Strategy::BaselineTopExpected, 3, 0);
    const auto stats = aggregate(records, Strategy::BaselineTopExpected, 3, cfg.tau(3));
    CHECK(stats.reliability == Approx(1.0).epsilon(0.01));
    CHECK(stats.mean_quality == Approx(360).epsilon(1e-3));
}

TEST_CASE("aggregate examples") {
    std::vector<EpochRecord> wins(10);
    for (auto& r : wins) {
        r.quality = 5;
        r.success = true;
    }
    CHECK(aggregate(wins, Strategy::Portfolio, 1, 0).reliability == 1.0);

    std::vector<EpochRecord> two(8);
    for (std::size_t i = 0; i < two.size(); ++i) two[i].quality = i % 2 ? 600 : 0;
    const auto s = aggregate(two, Strategy::Portfolio, 1, 0);
    CHECK(s.mean_quality == Approx(300));
    CHECK(s.std_quality == Approx(300));

    std::vector<EpochRecord> many(10'000);
    for (std::size_t i = 0; i < many.size(); ++i) many[i].success = i < 9500;
    const auto m = aggregate(many, Strategy::Portfolio, 1, 0);
    CHECK(m.reliability == 0.95);
    CHECK(m.successes == 9500);
    CHECK(m.ci95_reliability.first >= 0.945);
    CHECK(m.ci95_reliability.second <= 0.955);

    CHECK_THROWS_AS(aggregate(std::vector<EpochRecord>{}, Strategy::Portfolio, 1, 0), ModelError);
}

TEST_CASE("wilson interval matches the textbook formula") {
    for (auto [k, n] : {std::pair<std::size_t, std::size_t>{0, 10}, {3, 10}, {9500, 10000}, {17, 17}, {1, 2}}) {
        const auto [lo, hi] = wilson_interval(k, n);
        const auto [rlo, rhi] = oracle::wilson(double(k), double(n));
        CHECK(lo == Approx(std::max(0.0, rlo)).epsilon(1e-12));
        CHECK(hi == Approx(std::min(1.0, rhi)).epsilon(1e-12));
    }
}

TEST_CASE("reliability is monotone in the threshold") {
    auto cfg = make_config({100, 150, 200, 250}, block_rho(4, 0.8, 0.2), {}, {3});
    cfg.epochs = 2000;
    double prev = 2;
    for (double frac = 0; frac <= 1.2; frac += 0.1) {
        cfg.quality_threshold = {Threshold::Basis::Budget, frac};
        const auto stats = aggregate(run_replication(cfg, Strategy::Portfolio, 3, 0), Strategy::Portfolio, 3,
                                     cfg.tau(3));
        CHECK(stats.reliability <= prev);
        prev = stats.reliability;
    }
}

TEST_CASE("probabilistic mean quality matches the analytic expectation") {
    auto cfg = make_config({100, 150, 200, 250, 300}, block_rho(5, 0.6, 0.1), AvailabilityDist(3, 2), {2.5});
    cfg.min_views = 0;
    cfg.epochs = 40'000;
    const auto records = run_replication(cfg, Strategy::Portfolio, 2.5, 0);
    const auto stats = aggregate(records, Strategy::Portfolio, 2.5, cfg.tau(2.5));
    const auto sol = strategy_selection(cfg, Strategy::Portfolio, 2.5, 0);
    double analytic = 0;
    for (std::size_t i = 0; i < 5; ++i) analytic += sol.selection[i] * cfg.cameras[i].resolution * 0.6;
    CHECK(std::abs(stats.mean_quality - analytic) < 3 * stats.std_quality / std::sqrt(double(cfg.epochs)));
    CHECK(stats.mean_quality <= 1000 * 0.6);
}

TEST_CASE("compare_strategies shape, order and determinism") {
    auto cfg = make_config({100, 120, 140, 160, 180, 200}, block_rho(6, 0.8, 0.1), {}, {4, 2});
    cfg.strategies = {Strategy::UniformRandom, Strategy::Portfolio, Strategy::BaselineTopExpected};
    cfg.replications = 3;
    cfg.epochs = 200;
    const auto t = compare_strategies(cfg);
    REQUIRE(t.rows.size() == 6);
    const std::vector<std::pair<double, Strategy>> order{
        {2, Strategy::BaselineTopExpected}, {2, Strategy::Portfolio}, {2, Strategy::UniformRandom},
        {4, Strategy::BaselineTopExpected}, {4, Strategy::Portfolio}, {4, Strategy::UniformRandom}};
    for (std::size_t k = 0; k < 6; ++k) {
        CHECK(t.rows[k].psi == order[k].first);
        CHECK(t.rows[k].strategy == order[k].second);
        CHECK(t.rows[k].epochs_total == 600);
        CHECK(t.rows[k].std_quality >= 0);
        CHECK(double(t.rows[k].successes) == t.rows[k].reliability * 600);
    }
    CHECK(t.solutions.size() == 18);
    CHECK(t.realized_p_correlation.rows() == 6);
    CHECK(t.delivered_covariance.rows() == 6);

    const auto again = compare_strategies(cfg);
    for (std::size_t k = 0; k < 6; ++k) {
        CHECK(again.rows[k].mean_quality == t.rows[k].mean_quality);
        CHECK(again.rows[k].std_quality == t.rows[k].std_quality);
        CHECK(again.rows[k].successes == t.rows[k].successes);
    }

    cfg.strategies = {Strategy::Portfolio};
    cfg.psi_values = {3};
    CHECK(compare_strategies(cfg).rows.size() == 1);
}

TEST_CASE("compare_strategies agrees with run_replication and aggregate") {
    auto cfg = make_config({100, 120, 140, 160, 180}, block_rho(5, 0.7, 0.0), {}, {3});
    cfg.replications = 4;
    cfg.epochs = 250;
    cfg.selection_mode = SelectionMode::ProbabilisticAlpha;
    const auto table = compare_strategies(cfg);
    for (const auto& row : table.rows) {
        std::vector<EpochRecord> all;
        for (std::size_t rep = 0; rep < cfg.replications; ++rep) {
            auto r = run_replication(cfg, row.strategy, row.psi, rep);
            all.insert(all.end(), r.begin(), r.end());
        }
        const auto ref = aggregate(all, row.strategy, row.psi, cfg.tau(row.psi));
        CHECK(ref.successes == row.successes);
        CHECK(ref.mean_quality == Approx(row.mean_quality).epsilon(1e-12));
        CHECK(ref.std_quality == Approx(row.std_quality).epsilon(1e-9));
    }
}

TEST_CASE("thread count does not change results") {
    auto cfg = make_config({100, 120, 140, 160}, block_rho(4, 0.7, 0.1), {}, {2, 3});
    cfg.replications = 5;
    cfg.epochs = 100;
    ::setenv("PORTFOLIO_CAM_THREADS", "1", 1);
    CHECK(replication_threads() == 1);
    const auto serial = compare_strategies(cfg);
    ::setenv("PORTFOLIO_CAM_THREADS", "4", 1);
    CHECK(replication_threads() == 4);
    const auto parallel = compare_strategies(cfg);
    ::unsetenv("PORTFOLIO_CAM_THREADS");
    for (std::size_t k = 0; k < serial.rows.size(); ++k) {
        CHECK(serial.rows[k].mean_quality == parallel.rows[k].mean_quality);
        CHECK(serial.rows[k].successes == parallel.rows[k].successes);
    }
}

TEST_CASE("without correlation structure the portfolio and the baseline are indistinguishable") {
    auto cfg = make_config(std::vector<double>(6, 200), Eigen::MatrixXd::Identity(6, 6), {}, {3});
    cfg.selection_mode = SelectionMode::DeterministicTopAlpha;
    cfg.quality_threshold = {Threshold::Basis::Budget, 0.6};
    cfg.epochs = 5000;
    cfg.ga.max_generations = 100;
    const auto t = compare_strategies(cfg);
    REQUIRE(t.rows.size() == 2);
    const auto& a = t.rows[0];
    const auto& b = t.rows[1];
    CHECK(a.reliability >= b.ci95_reliability.first);
    CHECK(a.reliability <= b.ci95_reliability.second);
    CHECK(b.reliability >= a.ci95_reliability.first);
    CHECK(b.reliability <= a.ci95_reliability.second);
}
