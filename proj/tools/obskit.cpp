#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "obskit/app/commands.hpp"
#include "obskit/errors.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitInfeasible = 4;

int exit_code(const obskit::Error& e) {
    switch (obskit::family_of(e)) {
        case obskit::ErrorFamily::infeasible: return kExitInfeasible;
        case obskit::ErrorFamily::numeric: return kExitNumeric;
        case obskit::ErrorFamily::config: break;
    }
    return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
    namespace app = obskit::app;
    CLI::App cli{"Observability analysis for delayed and neurally encoded measurements"};
    cli.require_subcommand(1);

    std::string config;
    app::CliOverrides overrides;
    std::string out;
    std::uint64_t seed = 0;

    for (const auto& name : app::command_names()) {
        CLI::App* sub = cli.add_subcommand(name);
        sub->add_option("--config", config, "Run configuration (JSON)")->required();
        sub->add_flag("--full", overrides.full, "Use the fine 21 x 51 station grid");
        sub->add_option("--out", out, "Output directory (default: output_dir from the config)");
        sub->add_option("--seed", seed, "Random seed for the placement restarts");
    }

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = cli.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    const std::string command = cli.get_subcommands().front()->get_name();
    CLI::App* sub = cli.get_subcommand(command);
    if (sub->count("--out")) overrides.out = out;
    if (sub->count("--seed")) overrides.seed = seed;

    try {
        const app::RunConfig cfg = app::load_run_config(config, overrides);
        const app::CommandOutput result = app::run_command(command, cfg);
        std::cout << result.summary.dump(2) << "\n";
        for (const auto& f : result.files) std::cerr << "wrote " << f.string() << "\n";
        return 0;
    } catch (const obskit::Error& e) {
        std::cerr << "obskit " << command << ": " << e.what() << "\n";
        return exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "obskit " << command << ": " << e.what() << "\n";
        return kExitConfig;
    }
}
