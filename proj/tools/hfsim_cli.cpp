#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hfsim/config.hpp"
#include "hfsim/experiments.hpp"

namespace {

int fail(const std::optional<std::filesystem::path>& out, const nlohmann::ordered_json& err, int code) {
    std::cout << err.dump(2) << "\n";
    if (out) {
        try {
            std::filesystem::create_directories(*out);
            hfsim::write_json(*out / "error.json", err);
        } catch (const std::exception&) {
        }
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hartree-Fock experiment runner"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;

    const char* kinds[] = {"simulate", "verify-factorization", "verify-trilinear", "norms", "illposedness-scan",
                           "counterexample"};
    for (const char* name : kinds) {
        auto* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
        sub->add_option("--config", config_path, "config file")->required();
        sub->add_option("--out", out_dir, "output directory (overrides [experiment] output)");
        sub->add_option("--seed", seed, "seed (overrides [experiment] seed)");
    }
    CLI11_PARSE(app, argc, argv);

    const std::string kind_name = app.get_subcommands().front()->get_name();
    std::optional<std::filesystem::path> out;
    if (!out_dir.empty()) out = out_dir;

    hfsim::ExperimentConfig cfg;
    try {
        cfg = hfsim::load_config(config_path, hfsim::parse_experiment_kind(kind_name));
        if (seed) {
            cfg.seed = *seed;
            cfg.estimate.seed = *seed;
        }
        if (out) cfg.output = *out;
    } catch (const hfsim::ConfigError& e) {
        return fail(out, hfsim::error_json("config", e.what(), e.violations), 2);
    } catch (const std::exception& e) {
        return fail(out, hfsim::error_json("config", e.what()), 2);
    }

    try {
        const hfsim::ScanReport rep = hfsim::run_experiment(cfg, cfg.output);
        std::cout << "wrote " << (cfg.output / "report.json").string() << " (config " << rep.config_hash << ")\n";
        return 0;
    } catch (const std::exception& e) {
        return fail(cfg.output, hfsim::error_json("runtime", e.what()), 3);
    }
}
