#include "eeqt/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "eeqt/ensemble.hpp"
#include "eeqt/errors.hpp"

namespace eeqt {

namespace fs = std::filesystem;

namespace {

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

struct Effective {
    SimulationSpec spec;       // with overrides applied
    std::string out_dir;
    std::ostream* diag;
};

Effective resolve(const SimulationSpec& spec, const CommandOptions& opts) {
    Effective eff{spec, opts.out_dir.empty() ? spec.output.directory : opts.out_dir,
                  opts.diagnostics ? opts.diagnostics : &std::cerr};
    if (opts.seed_override) eff.spec.run.master_seed = *opts.seed_override;
    if (opts.scheme_override) {
        if (*opts.scheme_override != "fixed-dt" && *opts.scheme_override != "norm-threshold")
            throw ConfigError("scheme", "must be 'fixed-dt' or 'norm-threshold'");
        eff.spec.run.scheme = *opts.scheme_override;
    }
    for (const auto& w : eff.spec.warnings) *eff.diag << "warning: " << w << "\n";
    return eff;
}

std::ofstream open_data_file(const std::string& dir, const std::string& name,
                             const RunParams& run, const std::string& header) {
    fs::create_directories(dir);
    std::ofstream out(fs::path(dir) / name, std::ios::trunc);
    if (!out) throw Error("cannot write " + (fs::path(dir) / name).string());
    out << "# seed=" << run.master_seed << " scheme=" << run.scheme
        << " full run parameters in run_meta.json\n";
    out << header << "\n";
    return out;
}

void write_run_meta(const std::string& dir, const SimulationSpec& spec,
                    const std::string& command) {
    fs::create_directories(dir);
    nlohmann::json j = spec.to_json();
    j["command"] = command;
    std::ofstream out(fs::path(dir) / "run_meta.json", std::ios::trunc);
    if (!out) throw Error("cannot write run_meta.json in " + dir);
    out << j.dump(2) << "\n";
}

void write_events(const std::string& dir, const RunParams& run,
                  const std::vector<EventRecord>& events) {
    auto out = open_data_file(dir, "events.csv", run, "t,from_alpha,to_alpha");
    for (const auto& ev : events)
        out << fmt(ev.time) << "," << ev.from_alpha + 1 << "," << ev.to_alpha + 1 << "\n";
}

void write_snapshots(const std::string& dir, const RunParams& run,
                     const std::vector<std::pair<double, PureHybridState>>& snaps) {
    auto out = open_data_file(dir, "snapshots.csv", run, "t,alpha,component,re,im");
    for (const auto& [t, st] : snaps)
        for (Eigen::Index i = 0; i < st.psi.size(); ++i)
            out << fmt(t) << "," << st.alpha + 1 << "," << i << "," << fmt(st.psi(i).real())
                << "," << fmt(st.psi(i).imag()) << "\n";
}

void write_occupation(const std::string& dir, const std::string& name, const RunParams& run,
                      const std::vector<double>& times,
                      const std::vector<std::vector<double>>& p) {
    std::string header = "t";
    for (std::size_t a = 0; a < (p.empty() ? 0 : p[0].size()); ++a)
        header += ",p_" + std::to_string(a + 1);
    auto out = open_data_file(dir, name, run, header);
    for (std::size_t k = 0; k < times.size(); ++k) {
        out << fmt(times[k]);
        for (double v : p[k]) out << "," << fmt(v);
        out << "\n";
    }
}

void write_density(const std::string& dir, const std::string& name, const RunParams& run,
                   const std::vector<double>& times,
                   const std::vector<HybridDensityState>& states) {
    auto out = open_data_file(dir, name, run, "t,sector,row,col,re,im");
    for (std::size_t k = 0; k < times.size(); ++k)
        for (std::size_t a = 0; a < states[k].components.size(); ++a) {
            const auto& c = states[k].components[a];
            for (Eigen::Index i = 0; i < c.rows(); ++i)
                for (Eigen::Index j = 0; j < c.cols(); ++j)
                    out << fmt(times[k]) << "," << a + 1 << "," << i << "," << j << ","
                        << fmt(c(i, j).real()) << "," << fmt(c(i, j).imag()) << "\n";
        }
}

void write_rho_hat(const std::string& dir, const RunParams& run,
                   const std::vector<double>& times,
                   const std::vector<HybridDensityState>& states) {
    auto out = open_data_file(dir, "rho_hat.csv", run, "t,row,col,re,im");
    for (std::size_t k = 0; k < times.size(); ++k) {
        const ComplexMatrix rq = reduce_quantum(states[k]);
        for (Eigen::Index i = 0; i < rq.rows(); ++i)
            for (Eigen::Index j = 0; j < rq.cols(); ++j)
                out << fmt(times[k]) << "," << i << "," << j << "," << fmt(rq(i, j).real()) << ","
                    << fmt(rq(i, j).imag()) << "\n";
    }
}

void write_event_stats(const std::string& dir, const RunParams& run,
                       const std::vector<ChannelStats>& stats) {
    auto out = open_data_file(dir, "event_stats.csv", run,
                              "from_alpha,to_alpha,count,n_first,first_mean,first_variance");
    for (const auto& s : stats)
        out << s.from + 1 << "," << s.to + 1 << "," << s.count << "," << s.n_first << ","
            << fmt(s.first_mean) << "," << fmt(s.first_variance) << "\n";
}

void write_event_hist(const std::string& dir, const RunParams& run,
                      const std::vector<ChannelStats>& stats) {
    auto out = open_data_file(dir, "event_hist.csv", run,
                              "from_alpha,to_alpha,bin_lo,bin_hi,count");
    for (const auto& s : stats)
        for (std::size_t b = 0; b < s.histogram.size(); ++b)
            out << s.from + 1 << "," << s.to + 1 << "," << fmt(b * s.bin_width) << ","
                << fmt((b + 1) * s.bin_width) << "," << s.histogram[b] << "\n";
}

std::vector<std::vector<double>> occupation_from_counts(const EnsembleResult& ens) {
    std::vector<std::vector<double>> p;
    p.reserve(ens.sector_counts.size());
    for (const auto& row : ens.sector_counts) {
        std::vector<double> q;
        q.reserve(row.size());
        for (std::uint64_t c : row)
            q.push_back(static_cast<double>(c) / static_cast<double>(ens.n_trajectories));
        p.push_back(std::move(q));
    }
    return p;
}

void warn_lambda_dt(const Effective& eff, double max_lambda_dt) {
    if (eff.spec.run.scheme == "fixed-dt" && max_lambda_dt > 0.1)
        *eff.diag << "warning: lambda*dt reached " << max_lambda_dt
                  << " (> 0.1); thinning bias is O(lambda*dt), consider a smaller dt\n";
}

std::vector<HybridDensityState> master_states(const SimulationSpec& spec) {
    const auto rho0 = density_from_pure(spec.initial, spec.model.sector_count());
    auto sol = integrate_master(spec.model, rho0, spec.run.t_end, spec.run.master_dt,
                                spec.run.sample_times);
    std::vector<HybridDensityState> states;
    states.reserve(sol.size());
    for (auto& [t, st] : sol) states.push_back(std::move(st));
    return states;
}

}  // namespace

int cmd_validate(const SimulationSpec& spec, const CommandOptions& opts, std::ostream& out) {
    const Effective eff = resolve(spec, opts);
    const auto& model = eff.spec.model;
    const int n = model.quantum_dim();
    const int m = model.sector_count();

    out << "model: quantum dim n=" << n << ", classical sectors m=" << m << "\n";
    if (!model.labels().empty()) {
        out << "labels:";
        for (const auto& l : model.labels()) out << " " << l;
        out << "\n";
    }
    const auto breaks = model.merged_breakpoints();
    out << "schedule breakpoints: ";
    if (breaks.empty())
        out << "none (time-independent)\n";
    else {
        for (double b : breaks) out << fmt(b) << " ";
        out << "\n";
    }
    for (int a = 0; a < m; ++a) {
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(model.lambda_operator(a, 0.0),
                                                        Eigen::EigenvaluesOnly);
        out << "sector " << a + 1 << ": Lambda spectrum at t=0: [";
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
            out << (i ? ", " : "") << fmt(es.eigenvalues()(i));
        out << "]\n";
    }
    out << "event channels (m^2-m = " << m * m - m << "):\n";
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            if (a != b)
                out << "  " << a + 1 << " -> " << b + 1 << ": "
                    << (model.coupling_is_zero(b, a) ? "zero" : "active") << "\n";
    out << "initial: alpha=" << eff.spec.initial.alpha + 1
        << ", ||psi||^2=" << fmt(norm_sq(eff.spec.initial.psi)) << "\n";
    out << "run: scheme=" << eff.spec.run.scheme << " t_end=" << fmt(eff.spec.run.t_end)
        << " samples=" << eff.spec.run.sample_times.size()
        << " n_trajectories=" << eff.spec.run.n_trajectories
        << " master_seed=" << eff.spec.run.master_seed << "\n";
    return 0;
}

int cmd_trajectory(const SimulationSpec& spec, const CommandOptions& opts) {
    const Effective eff = resolve(spec, opts);
    const auto model = opts.transpose_couplings ? eff.spec.model.with_transposed_couplings()
                                                : eff.spec.model;
    const auto result = run_trajectory(model, eff.spec.initial, eff.spec.trajectory_params(),
                                       {eff.spec.run.master_seed, 0});
    warn_lambda_dt(eff, result.max_lambda_dt);
    write_events(eff.out_dir, eff.spec.run, result.events);
    write_snapshots(eff.out_dir, eff.spec.run, result.snapshots);
    write_run_meta(eff.out_dir, eff.spec, "trajectory");
    std::cout << "trajectory: " << result.events.size() << " events, "
              << result.snapshots.size() << " snapshots -> " << eff.out_dir << "\n";
    return 0;
}

int cmd_ensemble(const SimulationSpec& spec, const CommandOptions& opts) {
    const Effective eff = resolve(spec, opts);
    const auto model = opts.transpose_couplings ? eff.spec.model.with_transposed_couplings()
                                                : eff.spec.model;
    const auto ens = run_ensemble(model, eff.spec.initial, eff.spec.trajectory_params(),
                                  eff.spec.run.n_trajectories, eff.spec.run.master_seed,
                                  opts.workers);
    warn_lambda_dt(eff, ens.max_lambda_dt);
    const auto stats = event_statistics(ens);
    write_occupation(eff.out_dir, "occupation.csv", eff.spec.run, ens.sample_times,
                     occupation_from_counts(ens));
    write_rho_hat(eff.out_dir, eff.spec.run, ens.sample_times, ens.empirical_states);
    write_event_stats(eff.out_dir, eff.spec.run, stats);
    write_event_hist(eff.out_dir, eff.spec.run, stats);
    write_run_meta(eff.out_dir, eff.spec, "ensemble");
    std::cout << "ensemble: " << ens.n_trajectories << " trajectories -> " << eff.out_dir
              << "\n";
    return 0;
}

int cmd_master(const SimulationSpec& spec, const CommandOptions& opts) {
    const Effective eff = resolve(spec, opts);
    const auto states = master_states(eff.spec);
    std::vector<std::vector<double>> p;
    p.reserve(states.size());
    for (const auto& st : states) p.push_back(reduce_classical(st));
    write_density(eff.out_dir, "master_density.csv", eff.spec.run, eff.spec.run.sample_times,
                  states);
    write_occupation(eff.out_dir, "master_occupation.csv", eff.spec.run,
                     eff.spec.run.sample_times, p);
    write_run_meta(eff.out_dir, eff.spec, "master");
    std::cout << "master: " << states.size() << " sampled states -> " << eff.out_dir << "\n";
    return 0;
}

int cmd_compare(const SimulationSpec& spec, const CommandOptions& opts) {
    const Effective eff = resolve(spec, opts);
    const auto trajectory_model = opts.transpose_couplings
                                      ? eff.spec.model.with_transposed_couplings()
                                      : eff.spec.model;

    const auto ens = run_ensemble(trajectory_model, eff.spec.initial,
                                  eff.spec.trajectory_params(), eff.spec.run.n_trajectories,
                                  eff.spec.run.master_seed, opts.workers);
    warn_lambda_dt(eff, ens.max_lambda_dt);
    const auto oracle = master_states(eff.spec);
    const auto thresholds = compare_thresholds(ens, oracle);

    bool pass = true;
    auto out = open_data_file(eff.out_dir, "comparison.csv", eff.spec.run,
                              "t,trace_distance,threshold");
    for (std::size_t k = 0; k < ens.sample_times.size(); ++k) {
        const double d = trace_distance(ens.empirical_states[k], oracle[k]);
        out << fmt(ens.sample_times[k]) << "," << fmt(d) << "," << fmt(thresholds[k]) << "\n";
        const bool ok = d <= thresholds[k];
        pass = pass && ok;
        std::cout << "t=" << fmt(ens.sample_times[k]) << " trace_distance=" << fmt(d)
                  << " threshold=" << fmt(thresholds[k]) << (ok ? "" : "  <-- exceeded") << "\n";
    }

    std::vector<std::vector<double>> pm;
    pm.reserve(oracle.size());
    for (const auto& st : oracle) pm.push_back(reduce_classical(st));
    write_occupation(eff.out_dir, "ensemble_occupation.csv", eff.spec.run, ens.sample_times,
                     occupation_from_counts(ens));
    write_occupation(eff.out_dir, "master_occupation.csv", eff.spec.run,
                     eff.spec.run.sample_times, pm);
    write_run_meta(eff.out_dir, eff.spec, "compare");

    std::cout << (pass ? "PASS" : "FAIL")
              << ": trajectory ensemble vs statistical-state evolution\n";
    return pass ? 0 : 2;
}

}  // namespace eeqt
