#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "portfolio_cam/sim.hpp"

namespace pcam {

inline constexpr const char* kResultsHeader =
    "strategy,psi,mean_quality,std_quality,reliability,rel_ci_lo,rel_ci_hi,epochs,seed";

/// One parsed ResultsCsv row. Numeric fields hold the printed (6 significant
/// digit) values.
struct ResultsRow {
    std::optional<double> sweep_value;
    std::string strategy;
    double psi = 0.0;
    double mean_quality = 0.0;
    double std_quality = 0.0;
    double reliability = 0.0;
    double rel_ci_lo = 0.0;
    double rel_ci_hi = 0.0;
    std::size_t epochs = 0;
    std::uint64_t seed = 0;

    friend bool operator==(const ResultsRow&, const ResultsRow&) = default;
};

/// printf("%.6g")
std::string format_sig6(double v);

/// Rows are emitted ordered by (psi, strategy name).
void write_results_csv(std::ostream& out, std::span<const RunStats> rows, std::uint64_t seed);

struct SweepBlock {
    double value;
    std::vector<RunStats> rows;
};
void write_sweep_csv(std::ostream& out, std::span<const SweepBlock> blocks, std::uint64_t seed);

/// psi, then one reliability column per strategy present.
void write_plot_csv(std::ostream& out, std::span<const RunStats> rows);

/// Reads either the plain or the sweep layout. Throws std::runtime_error on a
/// malformed header or row.
std::vector<ResultsRow> read_results_csv(std::istream& in);

/// The values as written (rounded to 6 significant digits).
ResultsRow to_printed_row(const RunStats& stats, std::uint64_t seed);

}  // namespace pcam
