#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "nle/errors.hpp"
#include "nle/scenario.hpp"

namespace {

int run_command(const std::string& target) {
    nle::RunOutcome out;
    const auto names = nle::builtin_scenarios();
    if (!std::filesystem::exists(target) && std::find(names.begin(), names.end(), target) != names.end()) {
        // A bare built-in name runs that scenario as shipped.
        try {
            out = nle::run_scenario(nle::parse_config(nle::builtin_json(target)));
        } catch (const nle::ConfigError& e) {
            out.exit_code = 1;
            out.message = e.what();
        }
    } else if (!std::filesystem::exists(target)) {
        out.exit_code = 1;
        out.message = "config file not found: " + target;
    } else {
        out = nle::run_config_file(target);
    }
    if (out.exit_code == 0) {
        std::cout << "wrote " << out.directory.string() << '\n';
    } else {
        std::cerr << "nle run: " << out.message << '\n';
        if (out.exit_code == 3) std::cerr << "results written to " << out.directory.string() << '\n';
    }
    return out.exit_code;
}

int compare_command(const std::string& a, const std::string& b, const std::string& csv_path) {
    std::string error;
    int code;
    if (csv_path.empty()) {
        code = nle::compare_runs(a, b, std::cout, error);
    } else {
        std::ofstream os(csv_path);
        if (!os) {
            std::cerr << "nle compare: cannot write " << csv_path << '\n';
            return 1;
        }
        code = nle::compare_runs(a, b, os, error);
    }
    if (code != 0) std::cerr << "nle compare: " << error << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Level-set simulator for nonlocal eikonal equations"};
    app.require_subcommand(1);

    std::string config;
    auto* run = app.add_subcommand("run", "Run a scenario from a JSON config, a manifest.txt or a built-in name");
    run->add_option("config", config, "Config path or built-in scenario name")->required();

    std::string dir_a, dir_b, csv_out;
    auto* cmp = app.add_subcommand("compare", "Compare two run directories at their shared stored times");
    cmp->add_option("run_a", dir_a)->required();
    cmp->add_option("run_b", dir_b)->required();
    cmp->add_option("-o,--output", csv_out, "Write the CSV here instead of stdout");

    auto* list = app.add_subcommand("list-scenarios", "List the built-in scenarios");
    bool show_json = false;
    list->add_flag("--json", show_json, "Print each scenario's config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (*run) return run_command(config);
    if (*cmp) return compare_command(dir_a, dir_b, csv_out);
    if (*list) {
        for (const auto& name : nle::builtin_scenarios()) {
            std::cout << name << "  " << nle::builtin_description(name) << '\n';
            if (show_json) std::cout << nle::builtin_json(name) << "\n\n";
        }
    }
    return 0;
}
