#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "portfolio_cam/sim.hpp"

namespace pcam {

/// Scenario loading failure. `kind` selects the diagnostic prefix.
class ScenarioError : public std::runtime_error {
public:
    enum class Kind { Io, Parse, Invalid };

    ScenarioError(Kind kind, std::vector<std::string> problems);

    Kind kind() const noexcept { return kind_; }
    const std::vector<std::string>& problems() const noexcept { return problems_; }
    static std::string_view prefix(Kind kind) noexcept;

private:
    Kind kind_;
    std::vector<std::string> problems_;
};

inline constexpr int kScenarioSchemaVersion = 1;

struct OutputOptions {
    std::optional<std::string> csv;
    bool quiet = false;
};

struct Scenario {
    ScenarioConfig config;
    OutputOptions output;
};

/// Parses the text form. `origin` names the source in diagnostics.
Scenario parse_scenario(std::string_view text, std::string_view origin = "<scenario>");
Scenario load_scenario(const std::filesystem::path& path);

/// Canonical text form; parse_scenario(write_scenario(s)) reproduces s.
std::string write_scenario(const Scenario& scenario);

}  // namespace pcam
