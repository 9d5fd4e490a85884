#pragma once

// Scenario configuration and the run/compare drivers behind the CLI.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nle/grid_field.hpp"
#include "nle/kernel_velocity.hpp"

namespace nle {

enum class Engine { weak, slepcev, local, counterexample };

struct ScenarioConfig {
    std::string name;
    Engine engine = Engine::weak;
    Grid grid;
    KernelSpec kernel;
    ExternalVelocity c1;
    ShapeSpec initial;
    double horizon = 1.0;

    // solver
    double cfl = 0.5;
    std::vector<double> eps_schedule;  // absolute; empty = default
    int max_picard = 200;
    double tol = 1e-6;
    double relax = 1.0;
    SlepcevMode mode;
    double gamma = 1.0;
    std::optional<double> collar_check_level = -1.0 + 1e-12;

    // outputs
    std::filesystem::path directory;
    int store_every = 1;
    bool images = false;
    bool csv = false;

    std::optional<std::string> reference_json;  // resolved config of the reference run
    std::string resolved_json;                   // compact, for the manifest
};

/// Parses a JSON config. A "scenario" key names a built-in whose JSON is
/// merge-patched by the rest. Throws ConfigError naming the bad field.
ScenarioConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir = {});

/// Reads a .json config or a run manifest (its config= line).
ScenarioConfig load_config(const std::filesystem::path& path);

std::vector<std::string> builtin_scenarios();
std::string builtin_description(const std::string& name);
/// JSON text of a built-in; throws ConfigError for unknown names.
std::string builtin_json(const std::string& name);

struct RunOutcome {
    int exit_code = 0;  // 0 ok, 1 config, 2 numerical, 3 no convergence
    std::string message;
    std::filesystem::path directory;
};

/// Runs the scenario and writes its directory. Never throws for config or
/// numerical failures; they map to exit codes.
RunOutcome run_scenario(const ScenarioConfig& cfg);

/// Loads and runs in one go, mapping parse errors to exit code 1.
RunOutcome run_config_file(const std::filesystem::path& path);

/// Writes the comparison CSV of two run directories to `out`. Returns 0, or 1
/// on grid/time mismatch (message in `error`).
int compare_runs(const std::filesystem::path& a, const std::filesystem::path& b, std::ostream& out,
                 std::string& error);

}  // namespace nle
