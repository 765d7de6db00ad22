#include "eeqt/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "eeqt/errors.hpp"

namespace eeqt {

namespace {

constexpr std::uint64_t kChunk = 64;

struct ChunkData {
    EnsembleResult::ChunkSum sum;
    std::vector<std::vector<std::uint64_t>> counts;          // [sample][sector]
    std::map<std::pair<int, int>, ChannelEvents> channels;
    double max_lambda_dt = 0.0;
    std::optional<std::pair<std::uint64_t, std::string>> error;  // (trajectory, message)
};

// Folds one trajectory into a chunk accumulator, in index order.
void accumulate_trajectory(const TrajectoryResult& tr, ChunkData& chunk) {
    for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
        const auto& [t, st] = tr.snapshots[k];
        const double n2 = st.psi.squaredNorm();
        chunk.sum.acc[k][st.alpha].noalias() += (st.psi * st.psi.adjoint()) / n2;
        chunk.counts[k][st.alpha] += 1;
    }
    for (const auto& ev : tr.events) {
        auto& ch = chunk.channels[{ev.from_alpha, ev.to_alpha}];
        ch.count += 1;
        ch.all_times.push_back(ev.time);
    }
    // first occurrence per channel within this trajectory
    std::map<std::pair<int, int>, double> first;
    for (const auto& ev : tr.events)
        first.try_emplace({ev.from_alpha, ev.to_alpha}, ev.time);
    for (const auto& [key, t0] : first) chunk.channels[key].first_times.push_back(t0);
    chunk.max_lambda_dt = std::max(chunk.max_lambda_dt, tr.max_lambda_dt);
}

ChunkData make_chunk(int sectors, int dim, std::size_t samples) {
    ChunkData c;
    c.sum.acc.assign(samples, std::vector<ComplexMatrix>(sectors, ComplexMatrix::Zero(dim, dim)));
    c.counts.assign(samples, std::vector<std::uint64_t>(sectors, 0));
    return c;
}

void run_chunk(const PdpKernel& kernel, const PureHybridState& initial, std::uint64_t master_seed,
               std::uint64_t begin, std::uint64_t end, ChunkData& chunk) {
    for (std::uint64_t i = begin; i < end; ++i) {
        try {
            const TrajectoryResult tr = kernel.run(initial, {master_seed, i});
            chunk.sum.n += 1;
            accumulate_trajectory(tr, chunk);
        } catch (const std::exception& e) {
            chunk.error = {{i, e.what()}};
            return;
        }
    }
}

EnsembleResult merge_chunks(const PdpKernel& kernel, std::vector<ChunkData>&& chunks,
                            std::uint64_t n, std::uint64_t master_seed) {
    const auto& params = kernel.params();
    const int m = kernel.model().sector_count();
    const int dim = kernel.model().quantum_dim();
    const std::size_t samples = params.sample_times.size();

    for (const auto& c : chunks)
        if (c.error)
            throw Error("trajectory " + std::to_string(c.error->first) + ": " + c.error->second);

    EnsembleResult res;
    res.n_trajectories = n;
    res.master_seed = master_seed;
    res.sectors = m;
    res.t_end = params.t_end;
    res.scheme = scheme_name(params.scheme);
    res.sample_times = params.sample_times;
    res.sector_counts.assign(samples, std::vector<std::uint64_t>(m, 0));

    std::vector<std::vector<ComplexMatrix>> total(
        samples, std::vector<ComplexMatrix>(m, ComplexMatrix::Zero(dim, dim)));
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            if (a != b) res.channels[{a, b}];  // every channel reported, even silent ones

    for (auto& c : chunks) {
        for (std::size_t k = 0; k < samples; ++k)
            for (int a = 0; a < m; ++a) {
                total[k][a] += c.sum.acc[k][a];
                res.sector_counts[k][a] += c.counts[k][a];
            }
        for (auto& [key, ch] : c.channels) {
            auto& dst = res.channels[key];
            dst.count += ch.count;
            dst.all_times.insert(dst.all_times.end(), ch.all_times.begin(), ch.all_times.end());
            dst.first_times.insert(dst.first_times.end(), ch.first_times.begin(),
                                   ch.first_times.end());
        }
        res.max_lambda_dt = std::max(res.max_lambda_dt, c.max_lambda_dt);
        res.chunk_sums.push_back(std::move(c.sum));
    }

    res.empirical_states.reserve(samples);
    for (std::size_t k = 0; k < samples; ++k) {
        HybridDensityState state;
        state.components.reserve(m);
        for (int a = 0; a < m; ++a)
            state.components.push_back(total[k][a] / static_cast<double>(n));
        res.empirical_states.push_back(std::move(state));
    }
    return res;
}

}  // namespace

EnsembleResult run_ensemble(const HybridModel& model, const PureHybridState& initial,
                            const TrajectoryParams& params, std::uint64_t n,
                            std::uint64_t master_seed, int workers) {
    if (n < 1) throw Error("ensemble: n must be >= 1");
    const PdpKernel kernel(model, params);
    const std::size_t n_chunks = static_cast<std::size_t>((n + kChunk - 1) / kChunk);
    std::vector<ChunkData> chunks(n_chunks);

#ifdef _OPENMP
    const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#else
    (void)workers;
#endif
    for (std::int64_t c = 0; c < static_cast<std::int64_t>(n_chunks); ++c) {
        chunks[c] = make_chunk(model.sector_count(), model.quantum_dim(),
                               params.sample_times.size());
        run_chunk(kernel, initial, master_seed, static_cast<std::uint64_t>(c) * kChunk,
                  std::min(n, (static_cast<std::uint64_t>(c) + 1) * kChunk), chunks[c]);
    }
    return merge_chunks(kernel, std::move(chunks), n, master_seed);
}

EnsembleResult run_ensemble_serial(const HybridModel& model, const PureHybridState& initial,
                                   const TrajectoryParams& params, std::uint64_t n,
                                   std::uint64_t master_seed) {
    if (n < 1) throw Error("ensemble: n must be >= 1");
    const PdpKernel kernel(model, params);
    const std::size_t n_chunks = static_cast<std::size_t>((n + kChunk - 1) / kChunk);
    std::vector<ChunkData> chunks;
    chunks.reserve(n_chunks);
    for (std::size_t c = 0; c < n_chunks; ++c) {
        chunks.push_back(
            make_chunk(model.sector_count(), model.quantum_dim(), params.sample_times.size()));
        run_chunk(kernel, initial, master_seed, c * kChunk,
                  std::min<std::uint64_t>(n, (c + 1) * kChunk), chunks.back());
    }
    return merge_chunks(kernel, std::move(chunks), n, master_seed);
}

double trace_distance(const HybridDensityState& rho, const HybridDensityState& sigma) {
    if (rho.components.size() != sigma.components.size())
        throw DimensionMismatch("trace_distance: sector count mismatch");
    double d = 0.0;
    for (std::size_t a = 0; a < rho.components.size(); ++a) {
        if (rho.components[a].rows() != sigma.components[a].rows())
            throw DimensionMismatch("trace_distance: component dimension mismatch");
        const ComplexMatrix diff = rho.components[a] - sigma.components[a];
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (diff + diff.adjoint()),
                                                        Eigen::EigenvaluesOnly);
        d += es.eigenvalues().cwiseAbs().sum();
    }
    return 0.5 * d;
}

std::vector<double> compare_thresholds(const EnsembleResult& ensemble,
                                       const std::vector<HybridDensityState>& reference,
                                       int blocks, double floor_term) {
    if (reference.size() != ensemble.sample_times.size())
        throw DimensionMismatch("compare_thresholds: reference sample count mismatch");
    const std::size_t n_chunks = ensemble.chunk_sums.size();
    const int b_count = static_cast<int>(std::min<std::size_t>(blocks, n_chunks));
    if (b_count < 1) throw Error("compare_thresholds: no chunk data");
    const std::size_t samples = ensemble.sample_times.size();

    std::vector<double> thresholds(samples, 0.0);
    for (std::size_t k = 0; k < samples; ++k) {
        double kappa_sum = 0.0;
        for (int b = 0; b < b_count; ++b) {
            const std::size_t lo = n_chunks * b / b_count;
            const std::size_t hi = n_chunks * (b + 1) / b_count;
            std::uint64_t nb = 0;
            HybridDensityState block;
            block.components.assign(ensemble.sectors,
                                    ComplexMatrix::Zero(reference[k].components[0].rows(),
                                                        reference[k].components[0].cols()));
            for (std::size_t c = lo; c < hi; ++c) {
                nb += ensemble.chunk_sums[c].n;
                for (int a = 0; a < ensemble.sectors; ++a)
                    block.components[a] += ensemble.chunk_sums[c].acc[k][a];
            }
            if (nb == 0) continue;
            for (auto& comp : block.components) comp /= static_cast<double>(nb);
            kappa_sum += trace_distance(block, reference[k]) * std::sqrt(static_cast<double>(nb));
        }
        const double kappa = kappa_sum / b_count;
        thresholds[k] =
            3.0 * kappa / std::sqrt(static_cast<double>(ensemble.n_trajectories)) + floor_term;
    }
    return thresholds;
}

std::vector<ChannelStats> event_statistics(const EnsembleResult& ensemble, int histogram_bins) {
    if (histogram_bins < 1) throw Error("event_statistics: need at least one bin");
    std::vector<ChannelStats> stats;
    stats.reserve(ensemble.channels.size());
    for (const auto& [key, ch] : ensemble.channels) {
        ChannelStats s;
        s.from = key.first;
        s.to = key.second;
        s.count = ch.count;
        s.n_first = ch.first_times.size();
        if (!ch.first_times.empty()) {
            double sum = 0.0;
            for (double t : ch.first_times) sum += t;
            s.first_mean = sum / static_cast<double>(ch.first_times.size());
            if (ch.first_times.size() > 1) {
                double ss = 0.0;
                for (double t : ch.first_times) ss += (t - s.first_mean) * (t - s.first_mean);
                s.first_variance = ss / static_cast<double>(ch.first_times.size() - 1);
            }
        }
        s.bin_width = ensemble.t_end > 0.0 ? ensemble.t_end / histogram_bins : 1.0;
        s.histogram.assign(histogram_bins, 0);
        for (double t : ch.all_times) {
            auto bin = static_cast<std::size_t>(t / s.bin_width);
            if (bin >= s.histogram.size()) bin = s.histogram.size() - 1;
            s.histogram[bin] += 1;
        }
        stats.push_back(std::move(s));
    }
    return stats;
}

}  // namespace eeqt
