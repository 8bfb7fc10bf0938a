#include "portfolio_cam/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "portfolio_cam/optimizer.hpp"
#include "portfolio_cam/results_csv.hpp"
#include "portfolio_cam/rng.hpp"
#include "portfolio_cam/scenario_file.hpp"

namespace pcam::cli {

namespace fs = std::filesystem;

namespace {

std::optional<Scenario> load(const fs::path& path, const Overrides& overrides, std::ostream& err) {
    try {
        Scenario s = load_scenario(path);
        if (overrides.seed) s.config.master_seed = *overrides.seed;
        if (overrides.mode) s.config.selection_mode = *overrides.mode;
        if (overrides.quiet) s.output.quiet = true;
        return s;
    } catch (const ScenarioError& e) {
        err << e.what() << '\n';
    }
    return std::nullopt;
}

std::string describe_threshold(const Threshold& t) {
    switch (t.basis) {
        case Threshold::Basis::Absolute: return format_sig6(t.value);
        case Threshold::Basis::Budget: return format_sig6(t.value) + " * budget";
        case Threshold::Basis::Total: return format_sig6(t.value) + " * total";
    }
    return format_sig6(t.value);
}

double mean_off_diagonal(const Eigen::MatrixXd& m) {
    const auto n = m.rows();
    if (n < 2) return 0.0;
    return (m.sum() - m.trace()) / static_cast<double>(n * (n - 1));
}

void print_table(std::ostream& out, const ComparisonTable& table) {
    out << std::left << std::setw(8) << "psi" << std::setw(24) << "strategy" << std::right << std::setw(12)
        << "tau" << std::setw(14) << "mean_quality" << std::setw(13) << "std_quality" << std::setw(13)
        << "reliability" << std::setw(22) << "95% CI" << '\n';
    for (const auto& r : table.rows) {
        std::ostringstream ci;
        ci << '[' << format_sig6(r.ci95_reliability.first) << ", " << format_sig6(r.ci95_reliability.second)
           << ']';
        out << std::left << std::setw(8) << format_sig6(r.psi) << std::setw(24) << to_string(r.strategy)
            << std::right << std::setw(12) << format_sig6(r.tau) << std::setw(14) << format_sig6(r.mean_quality)
            << std::setw(13) << format_sig6(r.std_quality) << std::setw(13) << format_sig6(r.reliability)
            << std::setw(22) << ci.str() << '\n';
    }
}

void print_model_gap(std::ostream& out, const ScenarioConfig& cfg, const ComparisonTable& table) {
    const auto inputs = cfg.portfolio_inputs(cfg.psi_values.front());
    out << "latent rho (mean off-diagonal): " << format_sig6(mean_off_diagonal(cfg.disruption.spatial_rho().matrix()))
        << ", realized corr(p): " << format_sig6(mean_off_diagonal(table.realized_p_correlation)) << '\n';
    out << "delivered-resolution covariance trace / model covariance trace: "
        << format_sig6(table.delivered_covariance.trace() / inputs.cov.trace()) << '\n';
}

std::optional<fs::path> output_target(const std::optional<fs::path>& flag, const OutputOptions& output) {
    if (flag) return flag;
    if (output.csv) return fs::path(*output.csv);
    return std::nullopt;
}

bool write_file(const fs::path& path, const std::string& content, std::ostream& err) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f || !(f << content) || !f.flush()) {
        err << "io error: cannot write '" << path.string() << "'\n";
        return false;
    }
    return true;
}

}  // namespace

int cmd_validate(const fs::path& scenario, std::ostream& out, std::ostream& err) {
    const auto loaded = load(scenario, {}, err);
    if (!loaded) return kConfigError;
    const auto& cfg = loaded->config;
    const auto psd = check_psd(cfg.disruption.spatial_rho().matrix());
    out << "scenario: " << scenario.string() << '\n'
        << "cameras: " << cfg.size() << '\n'
        << "theta: " << describe_threshold(cfg.theta) << '\n'
        << "psi_values:";
    for (double psi : cfg.psi_values) out << ' ' << format_sig6(psi);
    out << '\n' << "quality_threshold: " << describe_threshold(cfg.quality_threshold) << '\n';
    for (double psi : cfg.psi_values) {
        const auto inputs = cfg.portfolio_inputs(psi);
        out << "  psi " << format_sig6(psi) << ": theta " << format_sig6(inputs.theta) << ", tau "
            << format_sig6(cfg.tau(psi)) << '\n';
        for (const auto& w : feasibility_warnings(inputs)) out << "  warning: " << w << '\n';
    }
    out << "correlation: positive semidefinite (eigenvalues in [" << format_sig6(psd.min_eigenvalue) << ", "
        << format_sig6(psd.max_eigenvalue) << "])\n"
        << "ok\n";
    return kSuccess;
}

int cmd_optimize(const fs::path& scenario, double psi, bool oracle, int steps,
                 const std::optional<fs::path>& alpha_csv, const Overrides& overrides, std::ostream& out,
                 std::ostream& err) {
    const auto loaded = load(scenario, overrides, err);
    if (!loaded) return kConfigError;
    const auto& cfg = loaded->config;
    if (!(psi >= 1.0)) {
        err << "usage error: psi must be at least 1\n";
        return kConfigError;
    }
    const PortfolioInputs inputs = cfg.portfolio_inputs(psi);
    const Solution sol = strategy_selection(cfg, Strategy::Portfolio, psi, 0);

    out << "psi: " << format_sig6(psi) << '\n' << "theta: " << format_sig6(inputs.theta) << '\n' << "alpha:";
    for (std::size_t i = 0; i < sol.selection.size(); ++i) out << ' ' << format_sig6(sol.selection[i]);
    out << '\n'
        << "objective: " << format_sig6(sol.objective) << '\n'
        << "quality: " << format_sig6(sol.quality) << '\n'
        << "budget: " << format_sig6(sol.budget) << '\n'
        << "feasible: " << (sol.feasible ? "yes" : "no") << '\n';
    for (const auto& d : sol.diagnostics) err << "warning: " << d << '\n';

    if (oracle) {
        try {
            const Solution grid = grid_oracle_solve(inputs, steps);
            out << "oracle objective (steps=" << steps << "): " << format_sig6(grid.objective)
                << (grid.feasible ? "" : " (infeasible)") << '\n'
                << "gap (ga - oracle): " << format_sig6(sol.objective - grid.objective) << '\n';
        } catch (const ModelError& e) {
            err << "usage error: " << e.what() << '\n';
            return kConfigError;
        }
    }
    if (alpha_csv) {
        std::ostringstream csv;
        csv << "camera,alpha\n";
        for (std::size_t i = 0; i < sol.selection.size(); ++i) {
            csv << i << ',' << format_sig6(sol.selection[i]) << '\n';
        }
        if (!write_file(*alpha_csv, csv.str(), err)) return kConfigError;
    }
    return sol.feasible ? kSuccess : kInfeasible;
}

int cmd_compare(const fs::path& scenario, const std::optional<fs::path>& out_csv, const Overrides& overrides,
                std::ostream& out, std::ostream& err) {
    const auto loaded = load(scenario, overrides, err);
    if (!loaded) return kConfigError;
    const auto& cfg = loaded->config;
    const auto target = output_target(out_csv, loaded->output);
    if (!target) {
        err << "usage error: no output path (pass --out or set [output] csv)\n";
        return kConfigError;
    }

    const ComparisonTable table = compare_strategies(cfg);
    std::ostringstream csv, plot;
    write_results_csv(csv, table.rows, cfg.master_seed);
    write_plot_csv(plot, table.rows);
    if (!write_file(*target, csv.str(), err)) return kConfigError;
    if (!write_file(fs::path(target->string() + ".plot.csv"), plot.str(), err)) return kConfigError;

    for (const auto& d : table.diagnostics) err << "warning: " << d << '\n';
    if (!loaded->output.quiet) {
        print_table(out, table);
        print_model_gap(out, cfg, table);
    }
    return kSuccess;
}

int cmd_sweep(const fs::path& scenario, const std::string& param, const std::vector<double>& values,
              const std::optional<fs::path>& out_csv, const Overrides& overrides, std::ostream& out,
              std::ostream& err) {
    const auto loaded = load(scenario, overrides, err);
    if (!loaded) return kConfigError;
    if (param != "theta" && param != "temporal_phi" && param != "correlation_scale" &&
        param != "quality_threshold") {
        err << "usage error: unknown sweep parameter '" << param
            << "' (expected theta, temporal_phi, correlation_scale or quality_threshold)\n";
        return kConfigError;
    }
    const auto target = output_target(out_csv, loaded->output);
    if (!target) {
        err << "usage error: no output path (pass --out or set [output] csv)\n";
        return kConfigError;
    }

    const ScenarioConfig& base = loaded->config;
    std::vector<SweepBlock> blocks;
    bool skipped = false;
    for (double v : values) {
        try {
            ScenarioConfig cfg = base;
            const auto& d = base.disruption;
            if (param == "theta") {
                cfg.theta.value = v;
            } else if (param == "quality_threshold") {
                cfg.quality_threshold.value = v;
            } else if (param == "temporal_phi") {
                cfg.disruption = DisruptionProcessConfig(d.spatial_rho(), v, d.marginals(), d.rng_seed());
            } else {
                cfg.disruption = DisruptionProcessConfig(d.spatial_rho().scaled_off_diagonal(v), d.temporal_phi(),
                                                         d.marginals(), d.rng_seed());
            }
            cfg.validate();
            ComparisonTable table = compare_strategies(cfg);
            for (const auto& diag : table.diagnostics) err << "warning: " << param << '=' << v << ": " << diag << '\n';
            if (!loaded->output.quiet) {
                out << "== " << param << " = " << format_sig6(v) << '\n';
                print_table(out, table);
                for (const auto& r : table.rows) {
                    if (r.strategy == Strategy::Portfolio) {
                        out << "portfolio objective psi=" << format_sig6(r.psi) << ": "
                            << format_sig6(r.mean_objective) << '\n';
                    }
                }
            }
            blocks.push_back({v, std::move(table.rows)});
        } catch (const ModelError& e) {
            err << "invalid sweep value " << param << '=' << v << ": " << e.what() << '\n';
            skipped = true;
        }
    }

    std::ostringstream csv;
    write_sweep_csv(csv, blocks, base.master_seed);
    if (!write_file(*target, csv.str(), err)) return kConfigError;
    return skipped ? kPartialFailure : kSuccess;
}

Eigen::MatrixXd random_correlation(std::size_t n, std::size_t factors, std::uint64_t seed) {
    Rng rng(seed);
    const auto k = static_cast<Eigen::Index>(std::max<std::size_t>(factors, 1));
    const auto dim = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd w(dim, k);
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) w(i, j) = rng.normal();
    }
    Eigen::MatrixXd cov = w * w.transpose();
    for (Eigen::Index i = 0; i < dim; ++i) cov(i, i) += 0.1 + rng.uniform();
    const Eigen::VectorXd inv = cov.diagonal().cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd rho = inv.asDiagonal() * cov * inv.asDiagonal();
    rho = 0.5 * (rho + rho.transpose()).eval();
    rho.diagonal().setOnes();
    return rho;
}

int cmd_generate(const fs::path& out_path, const GenerateOptions& options, std::ostream& out, std::ostream& err) {
    if (options.cameras < 2) {
        err << "usage error: generate needs at least 2 cameras\n";
        return kConfigError;
    }
    Rng rng(derive_seed(options.seed, {0}));
    std::vector<CameraSpec> cameras;
    std::vector<AvailabilityDist> marginals;
    for (std::size_t i = 0; i < options.cameras; ++i) {
        const double r = options.min_resolution + (options.max_resolution - options.min_resolution) * rng.uniform();
        // Round to keep the generated file readable; the value stays exact in text.
        cameras.push_back({static_cast<int>(i), std::round(r * 100.0) / 100.0, AvailabilityDist(2.0, 2.0)});
        marginals.push_back(cameras.back().avail);
    }
    Eigen::MatrixXd rho = random_correlation(options.cameras, options.factors, derive_seed(options.seed, {1}));
    rho = (rho * 1e4).array().round().matrix() / 1e4;
    rho.diagonal().setOnes();

    std::vector<double> psis;
    for (std::size_t p = 2; p + 1 <= options.cameras && psis.size() < 3; ++p) psis.push_back(static_cast<double>(p));
    try {
        Scenario s{ScenarioConfig(
                       cameras,
                       DisruptionProcessConfig(CorrelationMatrix(rho), 0.0, marginals, options.seed),
                       Threshold{Threshold::Basis::Budget, 0.8},
                       psis),
                   {}};
        s.config.master_seed = options.seed;
        s.config.epochs = 2000;
        s.config.replications = 4;
        s.config.validate();
        if (!write_file(out_path, write_scenario(s), err)) return kConfigError;
    } catch (const ModelError& e) {
        err << "invalid scenario: " << e.what() << '\n';
        return kConfigError;
    }
    out << "wrote " << out_path.string() << '\n';
    return kSuccess;
}

}  // namespace pcam::cli
