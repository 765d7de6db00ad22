#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "eeqt/master.hpp"
#include "eeqt/pdp.hpp"

namespace eeqt {

struct ChannelEvents {
    std::uint64_t count = 0;          // every event in this channel
    std::vector<double> all_times;    // trajectory-ordered
    std::vector<double> first_times;  // one per trajectory that fired the channel
};

struct EnsembleResult {
    std::uint64_t n_trajectories = 0;
    std::uint64_t master_seed = 0;
    int sectors = 0;
    double t_end = 0.0;
    std::string scheme;
    double max_lambda_dt = 0.0;
    std::vector<double> sample_times;
    /// Empirical hybrid states: at each sample time the average of the
    /// trajectories' |psi><psi| projectors, each placed in its sector.
    std::vector<HybridDensityState> empirical_states;
    /// Trajectory counts per (sample time, sector); rows sum to n.
    std::vector<std::vector<std::uint64_t>> sector_counts;
    /// Event times per ordered sector pair; all m^2 - m channels present.
    std::map<std::pair<int, int>, ChannelEvents> channels;

    /// Raw per-chunk projector sums, kept so error bars can be estimated
    /// from the data (see compare_thresholds). acc is [sample][sector].
    struct ChunkSum {
        std::vector<std::vector<ComplexMatrix>> acc;
        std::uint64_t n = 0;
    };
    std::vector<ChunkSum> chunk_sums;
};

/// Runs n independent trajectories with per-trajectory streams derived from
/// (master_seed, trajectory index) and averages them.
///
/// Summation order is fixed: trajectories are grouped into chunks of 64 by
/// index, each chunk accumulates serially in index order, and chunk sums are
/// combined in chunk order. The result is therefore bit-identical for every
/// worker count, including 1. workers <= 0 uses the OpenMP default.
EnsembleResult run_ensemble(const HybridModel& model, const PureHybridState& initial,
                            const TrajectoryParams& params, std::uint64_t n,
                            std::uint64_t master_seed, int workers = 0);

/// Plain serial loop over the same chunk structure; reference implementation
/// for testing the parallel path. Produces bit-identical results.
EnsembleResult run_ensemble_serial(const HybridModel& model, const PureHybridState& initial,
                                   const TrajectoryParams& params, std::uint64_t n,
                                   std::uint64_t master_seed);

/// Half the trace norm of the blockwise difference: (1/2) sum_a sum |eig|
/// of rho_a - sigma_a. Ranges over [0, 1] for valid states.
double trace_distance(const HybridDensityState& rho, const HybridDensityState& sigma);

/// Self-calibrated comparison thresholds, one per sample time. The chunk
/// sums are regrouped into `blocks` contiguous trajectory blocks; each
/// block's distance to the reference scales like kappa/sqrt(block size), so
/// kappa is estimated as mean_b(d_b sqrt(n_b)) and the threshold is
/// 3 kappa / sqrt(n) + floor_term (floor_term absorbs integrator error).
std::vector<double> compare_thresholds(const EnsembleResult& ensemble,
                                       const std::vector<HybridDensityState>& reference,
                                       int blocks = 20, double floor_term = 1e-5);

struct ChannelStats {
    int from = 0;
    int to = 0;
    std::uint64_t count = 0;
    std::uint64_t n_first = 0;
    double first_mean = 0.0;
    double first_variance = 0.0;
    double bin_width = 0.0;
    std::vector<std::uint64_t> histogram;  // all event times over [0, t_end]
};

std::vector<ChannelStats> event_statistics(const EnsembleResult& ensemble,
                                           int histogram_bins = 50);

}  // namespace eeqt
