#include "portfolio_cam/results_csv.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>

namespace pcam {

namespace {

std::vector<RunStats> ordered(std::span<const RunStats> rows) {
    std::vector<RunStats> out(rows.begin(), rows.end());
    std::stable_sort(out.begin(), out.end(), [](const RunStats& a, const RunStats& b) {
        if (a.psi != b.psi) return a.psi < b.psi;
        return to_string(a.strategy) < to_string(b.strategy);
    });
    return out;
}

void write_row(std::ostream& out, const RunStats& r, std::uint64_t seed) {
    out << to_string(r.strategy) << ',' << format_sig6(r.psi) << ',' << format_sig6(r.mean_quality) << ','
        << format_sig6(r.std_quality) << ',' << format_sig6(r.reliability) << ','
        << format_sig6(r.ci95_reliability.first) << ',' << format_sig6(r.ci95_reliability.second) << ','
        << r.epochs_total << ',' << seed << '\n';
}

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const auto next = line.find(',', pos);
        out.push_back(line.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return out;
}

}  // namespace

std::string format_sig6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void write_results_csv(std::ostream& out, std::span<const RunStats> rows, std::uint64_t seed) {
    out << kResultsHeader << '\n';
    for (const auto& r : ordered(rows)) write_row(out, r, seed);
}

void write_sweep_csv(std::ostream& out, std::span<const SweepBlock> blocks, std::uint64_t seed) {
    out << "sweep_value," << kResultsHeader << '\n';
    for (const auto& block : blocks) {
        for (const auto& r : ordered(block.rows)) {
            out << format_sig6(block.value) << ',';
            write_row(out, r, seed);
        }
    }
}

void write_plot_csv(std::ostream& out, std::span<const RunStats> rows) {
    std::set<std::string> names;
    std::map<double, std::map<std::string, double>> series;
    for (const auto& r : rows) {
        names.insert(std::string(to_string(r.strategy)));
        series[r.psi][std::string(to_string(r.strategy))] = r.reliability;
    }
    out << "psi";
    for (const auto& n : names) out << ',' << n;
    out << '\n';
    for (const auto& [psi, values] : series) {
        out << format_sig6(psi);
        for (const auto& n : names) {
            out << ',';
            if (const auto it = values.find(n); it != values.end()) out << format_sig6(it->second);
        }
        out << '\n';
    }
}

std::vector<ResultsRow> read_results_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("results CSV is empty");
    bool sweep = false;
    if (line == std::string("sweep_value,") + kResultsHeader) {
        sweep = true;
    } else if (line != kResultsHeader) {
        throw std::runtime_error("unexpected results CSV header: " + line);
    }
    std::vector<ResultsRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_commas(line);
        const std::size_t offset = sweep ? 1 : 0;
        if (f.size() != 9 + offset) {
            throw std::runtime_error("results CSV line " + std::to_string(line_no) + " has " +
                                     std::to_string(f.size()) + " columns");
        }
        try {
            ResultsRow r;
            if (sweep) r.sweep_value = std::stod(f[0]);
            r.strategy = f[offset];
            r.psi = std::stod(f[offset + 1]);
            r.mean_quality = std::stod(f[offset + 2]);
            r.std_quality = std::stod(f[offset + 3]);
            r.reliability = std::stod(f[offset + 4]);
            r.rel_ci_lo = std::stod(f[offset + 5]);
            r.rel_ci_hi = std::stod(f[offset + 6]);
            r.epochs = std::stoull(f[offset + 7]);
            r.seed = std::stoull(f[offset + 8]);
            rows.push_back(std::move(r));
        } catch (const std::logic_error&) {
            throw std::runtime_error("results CSV line " + std::to_string(line_no) + " is malformed");
        }
    }
    return rows;
}

ResultsRow to_printed_row(const RunStats& s, std::uint64_t seed) {
    auto round6 = [](double v) { return std::stod(format_sig6(v)); };
    ResultsRow r;
    r.strategy = std::string(to_string(s.strategy));
    r.psi = round6(s.psi);
    r.mean_quality = round6(s.mean_quality);
    r.std_quality = round6(s.std_quality);
    r.reliability = round6(s.reliability);
    r.rel_ci_lo = round6(s.ci95_reliability.first);
    r.rel_ci_hi = round6(s.ci95_reliability.second);
    r.epochs = s.epochs_total;
    r.seed = seed;
    return r;
}

}  // namespace pcam
