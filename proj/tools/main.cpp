#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "eeqt/commands.hpp"
#include "eeqt/errors.hpp"

namespace {

struct CliArgs {
    std::string config;
    std::string out;
    std::string scheme;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;
    bool transpose = false;
};

void add_common(CLI::App* cmd, CliArgs& args) {
    cmd->add_option("--config", args.config, "simulation config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", args.out, "output directory (default: $EEQT_OUT_DIR, then config)");
    cmd->add_option("--seed", args.seed, "override run.master_seed")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--workers", args.workers,
                    "worker threads; affects speed only, never results");
    cmd->add_option("--scheme", args.scheme, "override run.scheme")
        ->check(CLI::IsMember({"fixed-dt", "norm-threshold"}));
}

eeqt::CommandOptions to_options(const CliArgs& args) {
    eeqt::CommandOptions opts;
    if (!args.out.empty())
        opts.out_dir = args.out;
    else if (const char* env = std::getenv("EEQT_OUT_DIR"); env && *env)
        opts.out_dir = env;
    opts.workers = args.workers;
    if (args.seed_set) opts.seed_override = args.seed;
    if (!args.scheme.empty()) opts.scheme_override = args.scheme;
    opts.transpose_couplings = args.transpose;
    return opts;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"eeqt: piecewise-deterministic trajectories of a quantum system coupled to a "
                 "classical event recorder, with the exact statistical-state evolution as a "
                 "cross-check"};
    app.require_subcommand(1);

    CliArgs args;
    auto* validate = app.add_subcommand("validate", "check a config and print a model summary");
    auto* trajectory = app.add_subcommand("trajectory", "generate one sample path");
    auto* ensemble = app.add_subcommand("ensemble", "run and average many trajectories");
    auto* master = app.add_subcommand("master", "integrate the statistical-state equation");
    auto* compare =
        app.add_subcommand("compare", "run ensemble and master, verdict on their agreement");
    for (auto* cmd : {validate, trajectory, ensemble, master, compare}) add_common(cmd, args);
    compare->add_flag("--debug-transpose-couplings", args.transpose,
                      "fault injection: transpose coupling indices for trajectories only");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage errors map to exit code 1
    }

    try {
        const eeqt::SimulationSpec spec = eeqt::parse_config_file(args.config);
        const eeqt::CommandOptions opts = to_options(args);
        if (validate->parsed()) return eeqt::cmd_validate(spec, opts, std::cout);
        if (trajectory->parsed()) return eeqt::cmd_trajectory(spec, opts);
        if (ensemble->parsed()) return eeqt::cmd_ensemble(spec, opts);
        if (master->parsed()) return eeqt::cmd_master(spec, opts);
        if (compare->parsed()) return eeqt::cmd_compare(spec, opts);
    } catch (const eeqt::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
