#include "eeqt/pdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eeqt/errors.hpp"

namespace eeqt {

namespace {

constexpr double kDeadNormSq = 1e-300;
constexpr double kHardLambdaDtGuard = 0.5;

bool exactly_zero(const ComplexMatrix& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (m(i, j) != Complex(0.0, 0.0)) return false;
    return true;
}

// Classical RK4 applied to the linear autonomous equation phi' = K phi is
// exactly multiplication by I + hK + (hK)^2/2 + (hK)^3/6 + (hK)^4/24.
ComplexMatrix rk4_step_matrix(const ComplexMatrix& k, double h) {
    const auto n = k.rows();
    const ComplexMatrix id = ComplexMatrix::Identity(n, n);
    ComplexMatrix acc = id + (h / 4.0) * k;
    acc = id + (h / 3.0) * (k * acc);
    acc = id + (h / 2.0) * (k * acc);
    return id + h * (k * acc);
}

// Same step applied to one vector: four stage matvecs instead of matmuls.
void rk4_apply(const ComplexMatrix& k, double h, const ComplexVector& in, ComplexVector& out) {
    const ComplexVector k1 = k * in;
    const ComplexVector k2 = k * (in + (0.5 * h) * k1);
    const ComplexVector k3 = k * (in + (0.5 * h) * k2);
    const ComplexVector k4 = k * (in + h * k3);
    out = in + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void normalize_or_throw(ComplexVector& psi, const char* where) {
    const double n2 = psi.squaredNorm();
    if (!(n2 >= kDeadNormSq))
        throw DeadBranch(std::string(where) + ": state norm collapsed to zero");
    psi /= std::sqrt(n2);
}

}  // namespace

std::string scheme_name(const Scheme& s) {
    return std::holds_alternative<FixedDt>(s) ? "fixed-dt" : "norm-threshold";
}

PdpKernel::PdpKernel(const HybridModel& model, TrajectoryParams params)
    : model_(model), params_(std::move(params)) {
    if (params_.t_end < 0.0) throw Error("trajectory: t_end must be non-negative");
    if (params_.max_events < 1) throw Error("trajectory: max_events must be >= 1");
    double ode_tol = 0.0;
    if (const auto* fd = std::get_if<FixedDt>(&params_.scheme)) {
        if (!(fd->dt > 0.0)) throw Error("trajectory: dt must be positive");
    } else {
        const auto& nt = std::get<NormThreshold>(params_.scheme);
        if (!(nt.ode_tol > 0.0) || !(nt.root_tol > 0.0))
            throw Error("trajectory: tolerances must be positive");
        ode_tol = nt.ode_tol;
    }
    for (std::size_t i = 0; i < params_.sample_times.size(); ++i) {
        const double s = params_.sample_times[i];
        if (s < 0.0 || s > params_.t_end)
            throw Error("trajectory: sample time " + std::to_string(s) + " outside [0, t_end]");
        if (i > 0 && !(params_.sample_times[i - 1] < s))
            throw Error("trajectory: sample times must be strictly ascending");
    }

    interval_starts_.push_back(0.0);
    for (double b : model_.merged_breakpoints())
        if (b > 0.0 && b < params_.t_end) interval_starts_.push_back(b);

    for (double b : interval_starts_)
        if (b > 0.0) boundaries_.push_back(b);
    for (double s : params_.sample_times)
        if (s > 0.0) boundaries_.push_back(s);
    if (params_.t_end > 0.0) boundaries_.push_back(params_.t_end);
    std::sort(boundaries_.begin(), boundaries_.end());
    boundaries_.erase(std::unique(boundaries_.begin(), boundaries_.end()), boundaries_.end());

    const int m = model_.sector_count();
    cache_.resize(interval_starts_.size());
    for (std::size_t iv = 0; iv < interval_starts_.size(); ++iv) {
        const double t = interval_starts_[iv];
        cache_[iv].reserve(m);
        for (int a = 0; a < m; ++a) {
            SectorOps sc;
            sc.lambda = model_.lambda_operator(a, t);
            sc.dark = exactly_zero(sc.lambda);
            sc.generator = model_.effective_generator(a, t);
            for (int b = 0; b < m; ++b) {
                if (b == a) continue;
                const ComplexMatrix& g = model_.coupling(b, a, t);
                if (!exactly_zero(g)) sc.out.emplace_back(b, &g);
            }
            if (const auto* fd = std::get_if<FixedDt>(&params_.scheme)) {
                sc.base_step = fd->dt;
                sc.step = expm(sc.generator, fd->dt);
            } else {
                const double theta = std::min(0.1, std::pow(12.0 * ode_tol, 0.25));
                const double knorm = sc.generator.norm();  // Frobenius bounds the 2-norm
                sc.base_step = knorm > 0.0 ? std::min(theta / knorm, params_.t_end)
                                           : std::max(params_.t_end, 1.0);
                sc.step = rk4_step_matrix(sc.generator, sc.base_step);
            }
            cache_[iv].push_back(std::move(sc));
        }
    }
}

std::size_t PdpKernel::interval_of(double t) const {
    auto it = std::upper_bound(interval_starts_.begin(), interval_starts_.end(), t);
    return static_cast<std::size_t>(it - interval_starts_.begin()) - 1;
}

int PdpKernel::pick_destination(const SectorOps& sc, const ComplexVector& psi, double u,
                                ComplexVector& work) const {
    double total = 0.0;
    std::vector<double> weights(sc.out.size(), 0.0);
    for (std::size_t i = 0; i < sc.out.size(); ++i) {
        work.noalias() = *sc.out[i].second * psi;
        weights[i] = work.squaredNorm();
        total += weights[i];
    }
    if (!(total > 0.0))
        throw InvariantViolation("jump requested but every destination weight is zero");
    const double target = u * total;
    double cum = 0.0;
    int chosen = -1;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] == 0.0) continue;  // zero-weight destinations can never fire
        cum += weights[i];
        chosen = static_cast<int>(i);
        if (target < cum) break;
    }
    return chosen;
}

TrajectoryResult PdpKernel::run(const PureHybridState& initial, TrajectorySeed seed) const {
    if (initial.psi.size() != model_.quantum_dim())
        throw DimensionMismatch("trajectory: initial psi has wrong dimension");
    if (initial.alpha < 0 || initial.alpha >= model_.sector_count())
        throw DimensionMismatch("trajectory: initial sector out of range");
    if (std::abs(initial.psi.squaredNorm() - 1.0) > 1e-6)
        throw InvariantViolation("trajectory: initial state is not normalized");

    PhiloxStream rng(seed.master, seed.index);
    if (std::holds_alternative<FixedDt>(params_.scheme)) return run_fixed(initial, seed, rng);
    return run_norm(initial, seed, rng);
}

TrajectoryResult PdpKernel::run_fixed(const PureHybridState& initial, TrajectorySeed seed,
                                      UniformSource& rng) const {
    const double dt = std::get<FixedDt>(params_.scheme).dt;
    TrajectoryResult res;
    res.seed = seed;
    res.scheme = "fixed-dt";

    ComplexVector psi = initial.psi;
    normalize_or_throw(psi, "trajectory start");
    int alpha = initial.alpha;
    ComplexVector work(psi.size());

    double t = 0.0;
    std::size_t si = 0;
    std::size_t bi = 0;
    auto record_pending = [&](double now) {
        while (si < params_.sample_times.size() && params_.sample_times[si] <= now) {
            res.snapshots.emplace_back(params_.sample_times[si], PureHybridState{psi, alpha});
            ++si;
        }
    };
    record_pending(0.0);

    while (t < params_.t_end) {
        while (bi < boundaries_.size() && boundaries_[bi] <= t) ++bi;
        const double nb = boundaries_[bi];
        const double h = std::min(dt, nb - t);
        const bool lands = (h == nb - t);
        const SectorOps& sc = ops(interval_of(t), alpha);

        double lam = 0.0;
        if (!sc.dark) {
            work.noalias() = sc.lambda * psi;
            lam = std::max(psi.dot(work).real(), 0.0);
        }
        const double guard = lam * dt;
        res.max_lambda_dt = std::max(res.max_lambda_dt, guard);
        if (guard > kHardLambdaDtGuard)
            throw StepTooLarge("lambda*dt = " + std::to_string(guard) + " at t=" +
                               std::to_string(t) + "; decrease dt");

        const double r = rng.next();
        const double t_new = lands ? nb : t + h;
        if (r < lam * h) {
            const int pick = pick_destination(sc, psi, rng.next(), work);
            const int dest = sc.out[pick].first;
            work.noalias() = *sc.out[pick].second * psi;
            psi.swap(work);
            normalize_or_throw(psi, "jump");
            res.events.push_back({t_new, alpha, dest});
            if (res.events.size() > params_.max_events)
                throw RunawayJumps("more than " + std::to_string(params_.max_events) + " events");
            alpha = dest;
        } else {
            if (h == sc.base_step) {
                work.noalias() = sc.step * psi;
            } else {
                work.noalias() = expm(sc.generator, h) * psi;
            }
            psi.swap(work);
            normalize_or_throw(psi, "deterministic step");
        }
        t = t_new;
        record_pending(t);
    }
    return res;
}

TrajectoryResult PdpKernel::run_norm(const PureHybridState& initial, TrajectorySeed seed,
                                     UniformSource& rng) const {
    const auto& nt = std::get<NormThreshold>(params_.scheme);
    TrajectoryResult res;
    res.seed = seed;
    res.scheme = "norm-threshold";

    ComplexVector psi = initial.psi;
    normalize_or_throw(psi, "trajectory start");
    int alpha = initial.alpha;
    ComplexVector phi = psi, next(psi.size()), mid(psi.size());

    double t = 0.0;
    std::size_t si = 0;
    std::size_t bi = 0;
    auto record_pending = [&](double now, const ComplexVector& unnormalized) {
        while (si < params_.sample_times.size() && params_.sample_times[si] <= now) {
            ComplexVector snap = unnormalized;
            normalize_or_throw(snap, "snapshot");
            res.snapshots.emplace_back(params_.sample_times[si],
                                       PureHybridState{std::move(snap), alpha});
            ++si;
        }
    };
    record_pending(0.0, psi);

    while (t < params_.t_end) {
        double r = rng.next();
        while (r == 0.0) r = rng.next();  // measure-zero draw; a zero threshold loses the jump

        // One inter-jump segment: evolve the unnormalized phi until the
        // squared norm crosses r or t_end arrives.
        phi = psi;
        bool jumped = false;
        while (t < params_.t_end) {
            while (bi < boundaries_.size() && boundaries_[bi] <= t) ++bi;
            const double nb = boundaries_[bi];
            const SectorOps& sc = ops(interval_of(t), alpha);
            const double h = std::min(sc.base_step, nb - t);
            const bool lands = (h == nb - t);
            if (h == sc.base_step)
                next.noalias() = sc.step * phi;
            else
                rk4_apply(sc.generator, h, phi, next);

            if (next.squaredNorm() <= r) {
                double lo_t = t, hi_t = lands ? nb : t + h;
                ComplexVector lo_phi = phi, hi_phi = next;
                while (hi_t - lo_t > nt.root_tol) {
                    const double mid_t = 0.5 * (lo_t + hi_t);
                    rk4_apply(sc.generator, mid_t - lo_t, lo_phi, mid);
                    if (mid.squaredNorm() > r) {
                        lo_t = mid_t;
                        lo_phi = mid;
                    } else {
                        hi_t = mid_t;
                        hi_phi = mid;
                    }
                }
                ComplexVector at_jump = hi_phi;
                normalize_or_throw(at_jump, "norm crossing");
                const int pick = pick_destination(sc, at_jump, rng.next(), next);
                const int dest = sc.out[pick].first;
                next.noalias() = *sc.out[pick].second * at_jump;
                psi = next;
                normalize_or_throw(psi, "jump");
                res.events.push_back({hi_t, alpha, dest});
                if (res.events.size() > params_.max_events)
                    throw RunawayJumps("more than " + std::to_string(params_.max_events) +
                                       " events");
                alpha = dest;
                t = hi_t;
                record_pending(t, psi);
                jumped = true;
                break;
            }

            phi.swap(next);
            t = lands ? nb : t + h;
            record_pending(t, phi);
        }
        if (!jumped) break;
    }
    return res;
}

PureHybridState evolve_no_jump(const PureHybridState& state, const HybridModel& model, double t0,
                               double dt) {
    if (dt < 0.0) throw Error("evolve_no_jump: dt must be non-negative");
    ComplexVector psi = expm_apply(model.effective_generator(state.alpha, t0), state.psi, dt);
    normalize_or_throw(psi, "evolve_no_jump");
    return {std::move(psi), state.alpha};
}

std::pair<PureHybridState, std::optional<EventRecord>> step_fixed_dt(const PureHybridState& state,
                                                                     const HybridModel& model,
                                                                     double t, double dt,
                                                                     UniformSource& rng) {
    const double lam = model.jump_rate(state.psi, state.alpha, t);
    const double r = rng.next();
    if (r < lam * dt) {
        const auto probs = model.jump_probabilities(state.psi, state.alpha, t);
        const double u = rng.next();
        double cum = 0.0;
        int dest = -1;
        for (std::size_t b = 0; b < probs.size(); ++b) {
            if (probs[b] == 0.0) continue;
            cum += probs[b];
            dest = static_cast<int>(b);
            if (u < cum) break;
        }
        ComplexVector psi = model.coupling(dest, state.alpha, t) * state.psi;
        normalize_or_throw(psi, "jump");
        return {PureHybridState{std::move(psi), dest},
                EventRecord{t + dt, state.alpha, dest}};
    }
    return {evolve_no_jump(state, model, t, dt), std::nullopt};
}

NormJumpSample sample_jump_time_norm_method(const PureHybridState& state,
                                            const HybridModel& model, double t0, double r,
                                            const TrajectoryParams& params) {
    if (!(r > 0.0 && r < 1.0))
        throw Error("sample_jump_time_norm_method: r must lie strictly inside (0, 1)");
    if (!std::holds_alternative<NormThreshold>(params.scheme))
        throw Error("sample_jump_time_norm_method: params must select the norm-threshold scheme");
    const auto& nt = std::get<NormThreshold>(params.scheme);

    ComplexVector phi = state.psi;
    normalize_or_throw(phi, "norm method start");

    std::vector<double> boundaries;
    for (double b : model.merged_breakpoints())
        if (b > t0 && b < params.t_end) boundaries.push_back(b);
    boundaries.push_back(params.t_end);

    const double theta = std::min(0.1, std::pow(12.0 * nt.ode_tol, 0.25));
    double t = t0;
    ComplexVector next(phi.size()), mid(phi.size());
    std::size_t bi = 0;
    while (t < params.t_end) {
        while (bi < boundaries.size() && boundaries[bi] <= t) ++bi;
        const double nb = boundaries[bi];
        const ComplexMatrix k = model.effective_generator(state.alpha, t);
        const double knorm = k.norm();
        const double base = knorm > 0.0 ? theta / knorm : nb - t;
        const double h = std::min(base, nb - t);
        const bool lands = (h == nb - t);
        rk4_apply(k, h, phi, next);
        if (next.squaredNorm() <= r) {
            double lo_t = t, hi_t = lands ? nb : t + h;
            ComplexVector lo_phi = phi, hi_phi = next;
            while (hi_t - lo_t > nt.root_tol) {
                const double mid_t = 0.5 * (lo_t + hi_t);
                rk4_apply(k, mid_t - lo_t, lo_phi, mid);
                if (mid.squaredNorm() > r) {
                    lo_t = mid_t;
                    lo_phi = mid;
                } else {
                    hi_t = mid_t;
                    hi_phi = mid;
                }
            }
            return {hi_t, std::move(hi_phi)};
        }
        phi.swap(next);
        t = lands ? nb : t + h;
    }
    return {std::numeric_limits<double>::infinity(), std::move(phi)};
}

TrajectoryResult run_trajectory(const HybridModel& model, const PureHybridState& initial,
                                const TrajectoryParams& params, TrajectorySeed seed) {
    return PdpKernel(model, params).run(initial, seed);
}

}  // namespace eeqt
