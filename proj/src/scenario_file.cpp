#include "portfolio_cam/scenario_file.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace pcam {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, std::string_view delims) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        const auto next = s.find_first_of(delims, pos);
        const auto piece = trim(s.substr(pos, next == std::string_view::npos ? next : next - pos));
        if (!piece.empty()) out.push_back(piece);
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

std::optional<double> to_double(std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

template <class Int>
std::optional<Int> to_integer(std::string_view s) {
    Int v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Entry {
    std::size_t line;
    std::string value;
};

const std::map<std::string, std::set<std::string>, std::less<>> kAllowedKeys{
    {"disruption", {"temporal_phi", "seed"}},
    {"optimizer",
     {"population_size", "max_generations", "crossover_rate", "mutation_rate", "mutation_scale",
      "elite_count", "penalty_weight", "seed"}},
    {"experiment",
     {"theta", "psi_values", "quality_threshold", "epochs", "replications", "selection_mode",
      "strategies", "master_seed", "min_views"}},
    {"output", {"csv", "quiet"}},
};

class Parser {
public:
    explicit Parser(std::string_view origin) : origin_(origin) {}

    void fail(std::size_t line, const std::string& what) {
        problems_.push_back(std::string(origin_) + ":" + std::to_string(line) + ": " + what);
    }

    void run(std::string_view text) {
        std::string section;
        std::size_t line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const auto end = text.find('\n', pos);
            std::string_view line = text.substr(pos, end == std::string_view::npos ? end : end - pos);
            pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
            ++line_no;
            if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;

            if (line.front() == '[') {
                if (line.back() != ']') {
                    fail(line_no, "malformed section header '" + std::string(line) + "'");
                    continue;
                }
                section = std::string(trim(line.substr(1, line.size() - 2)));
                if (section != "cameras" && section != "correlation" && !kAllowedKeys.contains(section)) {
                    fail(line_no, "unknown section [" + section + "]");
                }
                if (!seen_sections_.insert(section).second) {
                    fail(line_no, "section [" + section + "] appears twice");
                }
                continue;
            }
            if (section == "cameras") {
                camera_rows_.push_back({line_no, std::string(line)});
            } else if (section == "correlation") {
                correlation_rows_.push_back({line_no, std::string(line)});
            } else {
                key_value(section, line, line_no);
            }
        }
    }

    void key_value(const std::string& section, std::string_view line, std::size_t line_no) {
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            fail(line_no, "expected 'key = value'");
            return;
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (section.empty()) {
            if (key != "schema_version") {
                fail(line_no, "unknown top-level key '" + key + "'");
                return;
            }
        } else {
            const auto it = kAllowedKeys.find(section);
            if (it == kAllowedKeys.end()) return;  // already reported as unknown section
            if (!it->second.contains(key)) {
                fail(line_no, "unknown key '" + key + "' in [" + section + "]");
                return;
            }
        }
        auto& slot = values_[section][key];
        if (slot) {
            fail(line_no, "duplicate key '" + key + "'");
            return;
        }
        slot = Entry{line_no, value};
    }

    const Entry* find(const std::string& section, const std::string& key) const {
        const auto s = values_.find(section);
        if (s == values_.end()) return nullptr;
        const auto k = s->second.find(key);
        return k == s->second.end() || !k->second ? nullptr : &*k->second;
    }

    template <class T, class Convert>
    void read(const std::string& section, const std::string& key, T& target, Convert convert,
              const char* expected) {
        if (const auto* e = find(section, key)) {
            if (auto v = convert(e->value)) {
                target = static_cast<T>(*v);
            } else {
                fail(e->line, key + " must be " + expected + ", got '" + e->value + "'");
            }
        }
    }

    std::optional<Threshold> threshold(const std::string& key) {
        const auto* e = find("experiment", key);
        if (!e) return std::nullopt;
        const auto parts = split(e->value, "*");
        Threshold t;
        std::optional<double> v = parts.empty() ? std::nullopt : to_double(parts[0]);
        bool ok = v && parts.size() <= 2;
        if (ok && parts.size() == 2) {
            if (parts[1] == "budget") {
                t.basis = Threshold::Basis::Budget;
            } else if (parts[1] == "total") {
                t.basis = Threshold::Basis::Total;
            } else {
                ok = false;
            }
        }
        if (!ok) {
            fail(e->line, key + " must be a number or '<fraction> * budget|total', got '" + e->value + "'");
            return std::nullopt;
        }
        t.value = *v;
        return t;
    }

    std::string_view origin_;
    std::vector<std::string> problems_;
    std::set<std::string> seen_sections_;
    std::map<std::string, std::map<std::string, std::optional<Entry>>, std::less<>> values_;
    std::vector<Entry> camera_rows_;
    std::vector<Entry> correlation_rows_;
};

}  // namespace

ScenarioError::ScenarioError(Kind kind, std::vector<std::string> problems)
    : std::runtime_error([&] {
          std::string msg;
          for (const auto& p : problems) {
              msg += (msg.empty() ? "" : "\n") + std::string(prefix(kind)) + p;
          }
          return msg;
      }()),
      kind_(kind),
      problems_(std::move(problems)) {}

std::string_view ScenarioError::prefix(Kind kind) noexcept {
    switch (kind) {
        case Kind::Io: return "io error: ";
        case Kind::Parse: return "parse error: ";
        case Kind::Invalid: return "invalid scenario: ";
    }
    return "error: ";
}

Scenario parse_scenario(std::string_view text, std::string_view origin) {
    Parser p(origin);
    p.run(text);

    if (const auto* e = p.find("", "schema_version")) {
        if (to_integer<int>(e->value) != kScenarioSchemaVersion) {
            p.fail(e->line, "unsupported schema_version '" + e->value + "' (expected " +
                                std::to_string(kScenarioSchemaVersion) + ")");
        }
    } else {
        p.fail(0, "missing schema_version");
    }

    std::vector<CameraSpec> cameras;
    for (const auto& row : p.camera_rows_) {
        const auto fields = split(row.value, " \t,");
        if (fields.size() != 2 && fields.size() != 4) {
            p.fail(row.line, "camera rows are 'id resolution [beta_a beta_b]'");
            continue;
        }
        const auto id = to_integer<int>(fields[0]);
        const auto res = to_double(fields[1]);
        std::optional<double> a = 2.0, b = 2.0;
        if (fields.size() == 4) {
            a = to_double(fields[2]);
            b = to_double(fields[3]);
        }
        if (!id || !res || !a || !b) {
            p.fail(row.line, "camera row has a non-numeric field");
            continue;
        }
        try {
            cameras.push_back({*id, *res, AvailabilityDist(*a, *b)});
        } catch (const ModelError& err) {
            p.fail(row.line, "camera " + std::to_string(*id) + ": " + err.what());
        }
    }
    if (p.camera_rows_.empty()) p.fail(0, "no [cameras] rows");

    const auto n = static_cast<Eigen::Index>(cameras.size());
    Eigen::MatrixXd rho = Eigen::MatrixXd::Identity(n, n);
    std::set<std::pair<Eigen::Index, Eigen::Index>> seen_pairs;
    for (const auto& row : p.correlation_rows_) {
        const auto fields = split(row.value, " \t,");
        const auto i = fields.size() == 3 ? to_integer<Eigen::Index>(fields[0]) : std::nullopt;
        const auto j = fields.size() == 3 ? to_integer<Eigen::Index>(fields[1]) : std::nullopt;
        const auto r = fields.size() == 3 ? to_double(fields[2]) : std::nullopt;
        if (!i || !j || !r) {
            p.fail(row.line, "correlation rows are 'i j rho'");
            continue;
        }
        if (!(*i < *j) || *i < 0 || *j >= n) {
            p.fail(row.line, "correlation entry (" + std::to_string(*i) + ", " + std::to_string(*j) +
                                 ") must satisfy 0 <= i < j < " + std::to_string(n));
            continue;
        }
        if (!seen_pairs.insert({*i, *j}).second) {
            p.fail(row.line, "duplicate correlation entry (" + std::to_string(*i) + ", " +
                                 std::to_string(*j) + ")");
            continue;
        }
        rho(*i, *j) = *r;
        rho(*j, *i) = *r;
    }

    double phi = 0.0;
    std::uint64_t disruption_seed = 0;
    p.read("disruption", "temporal_phi", phi, to_double, "a real number");
    p.read("disruption", "seed", disruption_seed, to_integer<std::uint64_t>, "an unsigned integer");

    GaConfig ga;
    p.read("optimizer", "population_size", ga.population_size, to_integer<std::size_t>, "a positive integer");
    p.read("optimizer", "max_generations", ga.max_generations, to_integer<std::size_t>, "a positive integer");
    p.read("optimizer", "crossover_rate", ga.crossover_rate, to_double, "a real number");
    p.read("optimizer", "mutation_rate", ga.mutation_rate, to_double, "a real number");
    p.read("optimizer", "mutation_scale", ga.mutation_scale, to_double, "a real number");
    p.read("optimizer", "elite_count", ga.elite_count, to_integer<std::size_t>, "an integer");
    p.read("optimizer", "seed", ga.rng_seed, to_integer<std::uint64_t>, "an unsigned integer");
    if (p.find("optimizer", "penalty_weight")) {
        double w = 0.0;
        p.read("optimizer", "penalty_weight", w, to_double, "a real number");
        ga.penalty_weight = w;
    }

    auto theta = p.threshold("theta");
    if (!theta && !p.find("experiment", "theta")) p.fail(0, "missing [experiment] theta");
    auto tau = p.threshold("quality_threshold");

    std::vector<double> psi_values;
    if (const auto* e = p.find("experiment", "psi_values")) {
        for (auto piece : split(e->value, ", \t")) {
            if (auto v = to_double(piece)) {
                psi_values.push_back(*v);
            } else {
                p.fail(e->line, "psi_values entry '" + std::string(piece) + "' is not a number");
            }
        }
    } else {
        p.fail(0, "missing [experiment] psi_values");
    }

    std::size_t epochs = 1000, replications = 1;
    std::uint64_t master_seed = 0;
    int min_views = 2;
    p.read("experiment", "epochs", epochs, to_integer<std::size_t>, "a positive integer");
    p.read("experiment", "replications", replications, to_integer<std::size_t>, "a positive integer");
    p.read("experiment", "master_seed", master_seed, to_integer<std::uint64_t>, "an unsigned integer");
    p.read("experiment", "min_views", min_views, to_integer<int>, "an integer");

    SelectionMode mode = SelectionMode::ProbabilisticAlpha;
    p.read("experiment", "selection_mode", mode, parse_selection_mode, "'prob' or 'top'");

    std::vector<Strategy> strategies{Strategy::Portfolio, Strategy::BaselineTopExpected};
    if (const auto* e = p.find("experiment", "strategies")) {
        strategies.clear();
        for (auto piece : split(e->value, ", \t")) {
            if (auto s = parse_strategy(piece)) {
                strategies.push_back(*s);
            } else {
                p.fail(e->line, "unknown strategy '" + std::string(piece) + "'");
            }
        }
    }

    OutputOptions output;
    if (const auto* e = p.find("output", "csv")) output.csv = e->value;
    if (const auto* e = p.find("output", "quiet")) {
        if (e->value == "true" || e->value == "false") {
            output.quiet = e->value == "true";
        } else {
            p.fail(e->line, "quiet must be true or false");
        }
    }

    if (!p.problems_.empty()) throw ScenarioError(ScenarioError::Kind::Parse, p.problems_);

    // Semantic checks: collect everything before constructing validated types.
    std::vector<std::string> invalid;
    try {
        validate_cameras(cameras);
    } catch (const ModelError& e) {
        for (auto line : split(e.what(), "\n")) invalid.emplace_back(line);
    }
    for (const auto& d : correlation_diagnostics(rho)) invalid.push_back(d);
    if (!(phi >= 0.0 && phi < 1.0)) invalid.push_back("temporal_phi must lie in [0, 1)");
    if (!invalid.empty()) throw ScenarioError(ScenarioError::Kind::Invalid, invalid);

    std::vector<AvailabilityDist> marginals;
    for (const auto& c : cameras) marginals.push_back(c.avail);
    Scenario s{ScenarioConfig(
                   cameras,
                   DisruptionProcessConfig(CorrelationMatrix(rho), phi, marginals, disruption_seed),
                   *theta,
                   psi_values),
               output};
    auto& cfg = s.config;
    if (tau) cfg.quality_threshold = *tau;
    cfg.epochs = epochs;
    cfg.replications = replications;
    cfg.selection_mode = mode;
    cfg.strategies = strategies;
    cfg.master_seed = master_seed;
    cfg.min_views = min_views;
    cfg.ga = ga;

    auto problems = cfg.diagnostics();
    if (!problems.empty()) throw ScenarioError(ScenarioError::Kind::Invalid, problems);
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError(ScenarioError::Kind::Io, {"cannot open '" + path.string() + "'"});
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path.string());
}

std::string write_scenario(const Scenario& scenario) {
    const auto& cfg = scenario.config;
    auto threshold = [](const Threshold& t) {
        switch (t.basis) {
            case Threshold::Basis::Absolute: return format_double(t.value);
            case Threshold::Basis::Budget: return format_double(t.value) + " * budget";
            case Threshold::Basis::Total: return format_double(t.value) + " * total";
        }
        return format_double(t.value);
    };
    std::ostringstream out;
    out << "schema_version = " << kScenarioSchemaVersion << "\n\n[cameras]\n# id resolution beta_a beta_b\n";
    for (const auto& c : cfg.cameras) {
        out << c.id << ' ' << format_double(c.resolution) << ' ' << format_double(c.avail.alpha_shape()) << ' '
            << format_double(c.avail.beta_shape()) << '\n';
    }
    out << "\n[correlation]\n# i j rho (upper triangle; omitted pairs are 0)\n";
    const auto& rho = cfg.disruption.spatial_rho();
    for (std::size_t i = 0; i < rho.size(); ++i) {
        for (std::size_t j = i + 1; j < rho.size(); ++j) {
            if (rho(i, j) != 0.0) out << i << ' ' << j << ' ' << format_double(rho(i, j)) << '\n';
        }
    }
    out << "\n[disruption]\ntemporal_phi = " << format_double(cfg.disruption.temporal_phi())
        << "\nseed = " << cfg.disruption.rng_seed() << '\n';
    const auto& ga = cfg.ga;
    out << "\n[optimizer]\npopulation_size = " << ga.population_size << "\nmax_generations = " << ga.max_generations
        << "\ncrossover_rate = " << format_double(ga.crossover_rate)
        << "\nmutation_rate = " << format_double(ga.mutation_rate)
        << "\nmutation_scale = " << format_double(ga.mutation_scale) << "\nelite_count = " << ga.elite_count
        << "\nseed = " << ga.rng_seed << '\n';
    if (ga.penalty_weight) out << "penalty_weight = " << format_double(*ga.penalty_weight) << '\n';
    out << "\n[experiment]\ntheta = " << threshold(cfg.theta) << "\npsi_values = ";
    for (std::size_t i = 0; i < cfg.psi_values.size(); ++i) {
        out << (i ? ", " : "") << format_double(cfg.psi_values[i]);
    }
    out << "\nquality_threshold = " << threshold(cfg.quality_threshold) << "\nepochs = " << cfg.epochs
        << "\nreplications = " << cfg.replications << "\nselection_mode = " << to_string(cfg.selection_mode)
        << "\nstrategies = ";
    for (std::size_t i = 0; i < cfg.strategies.size(); ++i) {
        out << (i ? ", " : "") << to_string(cfg.strategies[i]);
    }
    out << "\nmaster_seed = " << cfg.master_seed << "\nmin_views = " << cfg.min_views << '\n';
    if (scenario.output.csv || scenario.output.quiet) {
        out << "\n[output]\n";
        if (scenario.output.csv) out << "csv = " << *scenario.output.csv << '\n';
        if (scenario.output.quiet) out << "quiet = true\n";
    }
    return out.str();
}

}  // namespace pcam
