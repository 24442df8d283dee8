// Scenario runner: writes traces, grids and metrics under <out>/<scenario>/.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mfc/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Model-free control scenarios: iPD/PID comparison, iP stability maps"};

    std::string scenario;
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    std::vector<std::string> assignments;

    app.add_option("--scenario", scenario, "One of: ipd-nominal, pid-nominal, ipd-delta, pid-delta, ip-attempt, "
                                           "stabmap-fixed-t, stabmap-all-t, compare");
    app.add_option("--config", config_path, "Plain-text key = value file")->check(CLI::ExistingFile);
    auto* out_opt = app.add_option("--out", out_dir, "Output directory (default: out)");
    auto* seed_opt = app.add_option("--seed", seed, "Noise / sampling seed");
    app.add_option("--set", assignments, "Override a config key, key=value (repeatable)");

    CLI11_PARSE(app, argc, argv);

    try {
        mfc::ConfigOverrides flags;
        if (!scenario.empty())
            flags.scenario = scenario;
        if (*out_opt)
            flags.out_dir = out_dir;
        if (*seed_opt)
            flags.seed = seed;
        flags.assignments = assignments;

        std::optional<std::filesystem::path> file;
        if (!config_path.empty())
            file = config_path;

        const mfc::ScenarioConfig cfg = mfc::parse_config(file, flags);
        const mfc::ScenarioResult result = mfc::run_scenario(cfg);
        for (const auto& f : result.files)
            std::cout << f.string() << '\n';
    } catch (const mfc::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
