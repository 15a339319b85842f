#include <algorithm>
#include <filesystem>
#include <iostream>
#include <vector>

#include <CLI11.hpp>

#include "pnrqkd/errors.hpp"
#include "pnrqkd/experiment.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

std::vector<fs::path> shipped_configs(const fs::path& dir) {
    std::vector<fs::path> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-size decoy-state QKD key rates with an untrusted source"};
    app.require_subcommand(1);

    fs::path config_path;
    fs::path out_dir = "out";
    std::uint64_t seed = 0;
    bool no_svg = false;
    fs::path config_dir = PNRQKD_CONFIG_DIR;

    auto* run = app.add_subcommand("run", "Run an experiment config and write CSV (and SVG) output");
    run->add_option("config", config_path, "Experiment config (JSON)")->required();
    run->add_option("-o,--out", out_dir, "Output directory")->capture_default_str();
    auto* seed_opt = run->add_option("-s,--seed", seed, "Override the config seed");
    run->add_flag("--no-svg", no_svg, "Skip the SVG plot");

    auto* validate = app.add_subcommand("validate", "Check a config without running it");
    validate->add_option("config", config_path, "Experiment config (JSON)")->required();

    auto* list = app.add_subcommand("list-figures", "List the shipped figure configs");
    list->add_option("--dir", config_dir, "Config directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*list) {
            const auto configs = shipped_configs(config_dir);
            if (configs.empty()) {
                std::cerr << "no configs found in " << config_dir << "\n";
                return kExitRuntime;
            }
            for (const auto& path : configs) {
                const auto c = pnrqkd::load_config(path);
                std::cout << path.stem().string() << "\t" << c.title << "\t" << path.string() << "\n";
            }
            return kExitOk;
        }

        auto config = pnrqkd::load_config(config_path);
        if (*validate) {
            std::cout << config_path.string() << ": ok (" << config.series.size() << " series, "
                      << config.distances.size() << " distances, hash " << config.config_hash << ")\n";
            return kExitOk;
        }

        if (*seed_opt) config.seed = seed;
        const auto result = pnrqkd::run_experiment(config);
        for (const auto& path : pnrqkd::write_outputs(result, out_dir, !no_svg)) std::cout << path.string() << "\n";
        return kExitOk;
    } catch (const pnrqkd::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
