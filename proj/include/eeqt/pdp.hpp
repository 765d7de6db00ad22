#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "eeqt/model.hpp"
#include "eeqt/rng.hpp"

namespace eeqt {

/// Thinning scheme: one uniform draw per step of length dt, jump accepted
/// with probability lambda*dt.
struct FixedDt {
    double dt = 1e-3;
};

/// Waiting-time scheme: evolve the unnormalized state under K_a until its
/// squared norm first crosses a uniform draw r; that crossing is the jump
/// time. ode_tol controls the RK4 step (||K|| h = min(0.1, (12 ode_tol)^1/4)),
/// root_tol the bisection width of the crossing time.
struct NormThreshold {
    double ode_tol = 1e-8;
    double root_tol = 1e-10;
};

using Scheme = std::variant<FixedDt, NormThreshold>;

std::string scheme_name(const Scheme& s);

struct TrajectoryParams {
    Scheme scheme = FixedDt{};
    double t_end = 1.0;
    std::vector<double> sample_times;  // strictly ascending, within [0, t_end]
    std::uint64_t max_events = 1'000'000;
};

/// Per-trajectory stream identity: all randomness derives from this pair.
struct TrajectorySeed {
    std::uint64_t master = 0;
    std::uint64_t index = 0;
};

struct TrajectoryResult {
    std::vector<EventRecord> events;
    std::vector<std::pair<double, PureHybridState>> snapshots;
    TrajectorySeed seed{};
    std::string scheme;
    /// Largest lambda*dt seen (fixed-dt only). The engine throws above 0.5;
    /// callers should warn above 0.1.
    double max_lambda_dt = 0.0;
};

/// Precomputed per-(schedule-interval, sector) operators shared by every
/// trajectory of an ensemble: the effective generators, their step
/// propagators, damping operators and outgoing couplings. Immutable after
/// construction, safe to share across threads.
class PdpKernel {
  public:
    PdpKernel(const HybridModel& model, TrajectoryParams params);

    /// Deterministic function of (model, params, initial, seed). Events are
    /// timestamped at the end of the step that produced them (fixed-dt) or at
    /// the located norm crossing (norm-threshold); a snapshot whose sample
    /// time coincides with a jump records the post-jump state.
    TrajectoryResult run(const PureHybridState& initial, TrajectorySeed seed) const;

    const TrajectoryParams& params() const { return params_; }
    const HybridModel& model() const { return model_; }

  private:
    struct SectorOps {
        ComplexMatrix lambda;
        ComplexMatrix generator;        // K_a = -i H_a - Lambda_a / 2
        ComplexMatrix step;             // fixed-dt: expm(K dt); norm: RK4 step matrix
        double base_step = 0.0;         // norm scheme step length behind `step`
        bool dark = false;              // Lambda_a exactly zero
        std::vector<std::pair<int, const ComplexMatrix*>> out;  // nonzero g_{b,a}
    };

    TrajectoryResult run_fixed(const PureHybridState& initial, TrajectorySeed seed,
                               UniformSource& rng) const;
    TrajectoryResult run_norm(const PureHybridState& initial, TrajectorySeed seed,
                              UniformSource& rng) const;
    const SectorOps& ops(std::size_t interval, int alpha) const {
        return cache_[interval][alpha];
    }
    std::size_t interval_of(double t) const;
    int pick_destination(const SectorOps& sc, const ComplexVector& psi, double t, double u,
                         ComplexVector& work) const;

    HybridModel model_;
    TrajectoryParams params_;
    std::vector<double> interval_starts_;  // {0} + breakpoints inside (0, t_end)
    std::vector<double> boundaries_;       // sample times + breakpoints + t_end
    std::vector<std::vector<SectorOps>> cache_;  // [interval][sector]
    // dark_tail_[iv][a]: sector a stays dark from interval iv onwards, so a
    // trajectory sitting there can never produce another event. Once all
    // snapshots are recorded such a trajectory is finished.
    std::vector<std::vector<bool>> dark_tail_;
};

/// One deterministic no-jump segment: expm(K_a(t0) dt) psi, renormalized.
PureHybridState evolve_no_jump(const PureHybridState& state, const HybridModel& model, double t0,
                               double dt);

/// One thinning step. Draws exactly one uniform for the jump decision and,
/// on a jump, one for the destination, in that order. The returned event is
/// timestamped t + dt.
std::pair<PureHybridState, std::optional<EventRecord>> step_fixed_dt(const PureHybridState& state,
                                                                     const HybridModel& model,
                                                                     double t, double dt,
                                                                     UniformSource& rng);

struct NormJumpSample {
    double t_jump = 0.0;     // +inf when the norm never reaches r before t_end
    ComplexVector psi;       // unnormalized state at t_jump (or at t_end)
};

/// Integrates the unnormalized equation from (t0, state) until ||psi||^2
/// first crosses r (0 < r < 1) and locates the crossing by bisection.
NormJumpSample sample_jump_time_norm_method(const PureHybridState& state,
                                            const HybridModel& model, double t0, double r,
                                            const TrajectoryParams& params);

TrajectoryResult run_trajectory(const HybridModel& model, const PureHybridState& initial,
                                const TrajectoryParams& params, TrajectorySeed seed);

}  // namespace eeqt
