#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "portfolio_cam/sim.hpp"

namespace pcam::cli {

enum ExitCode : int {
    kSuccess = 0,
    kConfigError = 1,
    kInfeasible = 2,
    kPartialFailure = 3,
};

/// Command-line settings that take precedence over the scenario file.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<SelectionMode> mode;
    bool quiet = false;
};

int cmd_validate(const std::filesystem::path& scenario, std::ostream& out, std::ostream& err);

int cmd_optimize(const std::filesystem::path& scenario, double psi, bool oracle, int steps,
                 const std::optional<std::filesystem::path>& alpha_csv, const Overrides& overrides,
                 std::ostream& out, std::ostream& err);

/// Writes the ResultsCsv to `out_csv` (or the scenario's [output] csv) plus
/// `<out_csv>.plot.csv`.
int cmd_compare(const std::filesystem::path& scenario, const std::optional<std::filesystem::path>& out_csv,
                const Overrides& overrides, std::ostream& out, std::ostream& err);

/// param: theta | temporal_phi | correlation_scale | quality_threshold.
int cmd_sweep(const std::filesystem::path& scenario, const std::string& param, const std::vector<double>& values,
              const std::optional<std::filesystem::path>& out_csv, const Overrides& overrides,
              std::ostream& out, std::ostream& err);

struct GenerateOptions {
    std::size_t cameras = 7;
    std::uint64_t seed = 1;
    double min_resolution = 100.0;
    double max_resolution = 300.0;
    /// Rank of the random factor behind the correlation matrix.
    std::size_t factors = 2;
};

/// Writes a random, valid scenario file.
int cmd_generate(const std::filesystem::path& out_path, const GenerateOptions& options, std::ostream& out,
                 std::ostream& err);

/// Random correlation matrix from a low-rank factor plus diagonal noise.
Eigen::MatrixXd random_correlation(std::size_t n, std::size_t factors, std::uint64_t seed);

}  // namespace pcam::cli
