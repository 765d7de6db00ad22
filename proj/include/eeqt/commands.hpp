#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "eeqt/config.hpp"

namespace eeqt {

/// Options shared by the CLI subcommands. Workers only affect speed; every
/// data file is bit-identical for any worker count.
struct CommandOptions {
    std::string out_dir;  // empty: use the spec's output.directory
    int workers = 0;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> scheme_override;  // "fixed-dt" | "norm-threshold"
    /// Fault injection for compare: trajectories run with transposed coupling
    /// indices while the statistical-state oracle keeps the configured model,
    /// so the verdict must come out FAIL.
    bool transpose_couplings = false;
    std::ostream* diagnostics = nullptr;  // defaults to std::cerr
};

int cmd_validate(const SimulationSpec& spec, const CommandOptions& opts, std::ostream& out);
int cmd_trajectory(const SimulationSpec& spec, const CommandOptions& opts);
int cmd_ensemble(const SimulationSpec& spec, const CommandOptions& opts);
int cmd_master(const SimulationSpec& spec, const CommandOptions& opts);
/// Exit code 0 on PASS, 2 on FAIL.
int cmd_compare(const SimulationSpec& spec, const CommandOptions& opts);

}  // namespace eeqt
