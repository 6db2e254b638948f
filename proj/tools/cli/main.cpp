#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cqed/runner/config.hpp"
#include "cqed/runner/experiment.hpp"
#include "cqed/version.hpp"

namespace {

enum Exit { ok = 0, failure = 1, invalid = 2, numerical = 3 };

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cavity-QED reservoir and quantum-trajectory experiments"};
    app.set_version_flag("--version", std::string(cqed::kVersion));
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";

    auto* run = app.add_subcommand("run", "Run an experiment and write CSV plus manifest");
    run->add_option("--config", config_path, "INI experiment file")->required();
    run->add_option("--seed", seed, "Override [ensemble] master_seed");
    run->add_option("--out-dir", out_dir, "Directory for the CSV and manifest");

    auto* validate = app.add_subcommand("validate", "Check a config without running it");
    validate->add_option("--config", config_path, "INI experiment file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? Exit::ok : Exit::invalid;
    }

    try {
        auto cfg = cqed::runner::load_config(config_path);
        if (seed) cfg.ensemble.master_seed = *seed;
        if (*validate) {
            cqed::runner::validate_config(cfg);
            std::printf("%s: ok (%s)\n", config_path.c_str(), cqed::runner::to_string(cfg.experiment).c_str());
            return Exit::ok;
        }
        const auto out = cqed::runner::run_experiment(cfg);
        cqed::runner::write_outputs(out, out_dir);
        std::printf("wrote %s/%s and %s/%s\n", out_dir.c_str(), out.csv_name.c_str(), out_dir.c_str(),
                    out.manifest_name.c_str());
        return Exit::ok;
    } catch (const cqed::ValidationError& e) {
        std::fprintf(stderr, "invalid config: %s\n", e.what());
        return Exit::invalid;
    } catch (const cqed::NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return Exit::numerical;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return Exit::failure;
    }
}
