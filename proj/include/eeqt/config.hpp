#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "eeqt/model.hpp"
#include "eeqt/pdp.hpp"

namespace eeqt {

struct RunParams {
    std::string scheme = "fixed-dt";  // "fixed-dt" | "norm-threshold"
    double dt = 1e-3;
    double ode_tol = 1e-8;
    double root_tol = 1e-10;
    double t_end = 0.0;
    std::vector<double> sample_times;
    std::uint64_t n_trajectories = 20000;
    std::uint64_t master_seed = 1;
    std::uint64_t max_events = 1'000'000;
    double master_dt = 1e-3;  // step of the statistical-state integrator
};

struct OutputParams {
    std::string directory = ".";
    std::vector<std::string> formats = {"csv"};
};

/// A fully validated simulation definition. `model_json` keeps the original
/// model section verbatim so emitted run metadata round-trips.
struct SimulationSpec {
    nlohmann::json model_json;
    HybridModel model;
    PureHybridState initial;  // normalized; sector stored 0-based
    RunParams run;
    OutputParams output;
    std::vector<std::string> warnings;

    TrajectoryParams trajectory_params() const;
    nlohmann::json to_json() const;
};

/// Parses and validates a config document. Errors carry the path of the
/// offending field (e.g. "model.couplings[0][0]"). The initial state is
/// normalized; a deviation of more than 1e-6 in the squared norm is reported
/// as a warning on the returned spec.
SimulationSpec parse_config(const std::string& text);
SimulationSpec parse_config_file(const std::string& path);

}  // namespace eeqt
