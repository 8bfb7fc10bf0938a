#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "portfolio_cam/cli.hpp"

int main(int argc, char** argv) {
    namespace cli = pcam::cli;
    CLI::App app{"Portfolio-theoretic camera selection under correlated disruptions"};
    app.require_subcommand(1);
    app.fallthrough();

    std::optional<std::uint64_t> seed;
    std::string mode;
    bool quiet = false;
    app.add_option("--seed", seed, "Override the scenario's master_seed");
    app.add_option("--mode", mode, "Override selection mode")->check(CLI::IsMember({"prob", "top"}));
    app.add_flag("--quiet", quiet, "Suppress the summary table");

    std::string scenario;
    std::string out;

    auto* validate = app.add_subcommand("validate", "Check a scenario file");
    validate->add_option("scenario", scenario)->required();

    double psi = 0.0;
    bool oracle = false;
    int steps = 5;
    auto* optimize = app.add_subcommand("optimize", "Solve the selection problem for one budget");
    optimize->add_option("scenario", scenario)->required();
    optimize->add_option("--psi", psi, "Camera budget")->required();
    optimize->add_flag("--oracle", oracle, "Also run the exhaustive grid oracle (N <= 8)");
    optimize->add_option("--steps", steps, "Grid points per axis for --oracle")->check(CLI::Range(2, 1000));
    optimize->add_option("--out", out, "Write the selection vector as CSV");

    auto* compare = app.add_subcommand("compare", "Monte Carlo comparison of strategies");
    compare->add_option("scenario", scenario)->required();
    compare->add_option("--out", out, "Results CSV path");

    std::string param;
    std::vector<double> values;
    auto* sweep = app.add_subcommand("sweep", "Repeat the comparison over one parameter");
    sweep->add_option("scenario", scenario)->required();
    sweep->add_option("--param", param, "theta | temporal_phi | correlation_scale | quality_threshold")->required();
    sweep->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');
    sweep->add_option("--out", out, "Results CSV path");

    cli::GenerateOptions gen;
    auto* generate = app.add_subcommand("generate", "Write a random valid scenario file");
    generate->add_option("--cameras", gen.cameras, "Number of cameras")->check(CLI::Range(2, 64));
    generate->add_option("--factors", gen.factors, "Rank of the latent correlation factor");
    generate->add_option("--out", out, "Scenario path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? cli::kSuccess : cli::kConfigError;
    }

    cli::Overrides overrides;
    overrides.seed = seed;
    overrides.quiet = quiet;
    if (mode == "prob") overrides.mode = pcam::SelectionMode::ProbabilisticAlpha;
    if (mode == "top") overrides.mode = pcam::SelectionMode::DeterministicTopAlpha;
    const std::optional<std::filesystem::path> out_path =
        out.empty() ? std::nullopt : std::optional<std::filesystem::path>(out);

    if (*validate) return cli::cmd_validate(scenario, std::cout, std::cerr);
    if (*optimize) return cli::cmd_optimize(scenario, psi, oracle, steps, out_path, overrides, std::cout, std::cerr);
    if (*compare) return cli::cmd_compare(scenario, out_path, overrides, std::cout, std::cerr);
    if (*sweep) return cli::cmd_sweep(scenario, param, values, out_path, overrides, std::cout, std::cerr);
    if (seed) gen.seed = *seed;
    return cli::cmd_generate(out, gen, std::cout, std::cerr);
}
