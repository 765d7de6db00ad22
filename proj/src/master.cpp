#include "eeqt/master.hpp"

#include <algorithm>
#include <cmath>

#include "eeqt/errors.hpp"

namespace eeqt {

namespace {

using Blocks = std::vector<ComplexMatrix>;

// Schedule values and derived operators frozen at one instant, so the four
// RK4 stages of a step see identical coefficients.
struct ModelFrame {
    std::vector<const ComplexMatrix*> h;                 // [a]
    std::vector<std::vector<const ComplexMatrix*>> g;    // [to][from]
    std::vector<ComplexMatrix> lambda;                   // [a]
};

ModelFrame freeze(const HybridModel& model, double t) {
    const int m = model.sector_count();
    ModelFrame f;
    f.h.resize(m);
    f.g.assign(m, std::vector<const ComplexMatrix*>(m, nullptr));
    f.lambda.reserve(m);
    for (int a = 0; a < m; ++a) {
        f.h[a] = &model.hamiltonian(a, t);
        for (int b = 0; b < m; ++b)
            if (a != b) f.g[a][b] = &model.coupling(a, b, t);
    }
    for (int a = 0; a < m; ++a) f.lambda.push_back(model.lambda_operator(a, t));
    return f;
}

const Complex kMinusI(0.0, -1.0);
const Complex kPlusI(0.0, 1.0);

Blocks liouville_rhs_frame(const ModelFrame& f, const Blocks& rho) {
    const int m = static_cast<int>(rho.size());
    Blocks d(m);
    for (int a = 0; a < m; ++a) {
        const ComplexMatrix& ra = rho[a];
        ComplexMatrix acc = kMinusI * (*f.h[a] * ra - ra * *f.h[a]);
        for (int b = 0; b < m; ++b) {
            if (b == a || f.g[a][b] == nullptr) continue;
            const ComplexMatrix& gab = *f.g[a][b];
            acc.noalias() += gab * rho[b] * gab.adjoint();
        }
        acc.noalias() -= 0.5 * (f.lambda[a] * ra + ra * f.lambda[a]);
        d[a] = std::move(acc);
    }
    return d;
}

Blocks heisenberg_rhs_frame(const ModelFrame& f, const Blocks& obs) {
    const int m = static_cast<int>(obs.size());
    Blocks d(m);
    for (int a = 0; a < m; ++a) {
        const ComplexMatrix& aa = obs[a];
        ComplexMatrix acc = kPlusI * (*f.h[a] * aa - aa * *f.h[a]);
        for (int b = 0; b < m; ++b) {
            if (b == a || f.g[b][a] == nullptr) continue;
            const ComplexMatrix& gba = *f.g[b][a];  // observables flow backwards
            acc.noalias() += gba.adjoint() * obs[b] * gba;
        }
        acc.noalias() -= 0.5 * (f.lambda[a] * aa + aa * f.lambda[a]);
        d[a] = std::move(acc);
    }
    return d;
}

void symmetrize(Blocks& y) {
    for (auto& c : y) c = 0.5 * (c + c.adjoint()).eval();
}

double blocks_trace(const Blocks& y) {
    double tr = 0.0;
    for (const auto& c : y) tr += c.trace().real();
    return tr;
}

// Boundaries a fixed-step integration must land on exactly.
std::vector<double> merge_boundaries(const HybridModel& model, double t_end,
                                     const std::vector<double>& sample_times) {
    std::vector<double> b;
    for (double x : model.merged_breakpoints())
        if (x > 0.0 && x < t_end) b.push_back(x);
    for (double s : sample_times) {
        if (s < 0.0 || s > t_end)
            throw Error("sample time " + std::to_string(s) + " outside [0, t_end]");
        if (s > 0.0) b.push_back(s);
    }
    b.push_back(t_end);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

template <typename Rhs>
Blocks integrate_blocks(const HybridModel& model, Blocks y, double t_end, double dt,
                        const std::vector<double>& sample_times, Rhs&& rhs, bool monitor_trace,
                        std::vector<std::pair<double, Blocks>>& outputs) {
    if (dt <= 0.0) throw Error("integrate: dt must be positive");
    if (t_end < 0.0) throw Error("integrate: t_end must be non-negative");
    for (std::size_t i = 1; i < sample_times.size(); ++i)
        if (!(sample_times[i - 1] < sample_times[i]))
            throw Error("integrate: sample times must be strictly ascending");

    const double trace0 = blocks_trace(y);
    const auto boundaries = merge_boundaries(model, t_end, sample_times);

    std::size_t si = 0;
    auto emit_pending = [&](double t) {
        while (si < sample_times.size() && sample_times[si] <= t) {
            outputs.emplace_back(sample_times[si], y);
            ++si;
        }
    };
    emit_pending(0.0);

    double t = 0.0;
    std::size_t bi = 0;
    while (t < t_end && bi < boundaries.size()) {
        const double nb = boundaries[bi];
        const double h = std::min(dt, nb - t);
        const bool lands = (h == nb - t);

        const ModelFrame frame = freeze(model, t);
        const Blocks k1 = rhs(frame, y);
        Blocks stage = y;
        for (std::size_t c = 0; c < y.size(); ++c) stage[c] += (0.5 * h) * k1[c];
        const Blocks k2 = rhs(frame, stage);
        for (std::size_t c = 0; c < y.size(); ++c) stage[c] = y[c] + (0.5 * h) * k2[c];
        const Blocks k3 = rhs(frame, stage);
        for (std::size_t c = 0; c < y.size(); ++c) stage[c] = y[c] + h * k3[c];
        const Blocks k4 = rhs(frame, stage);
        for (std::size_t c = 0; c < y.size(); ++c)
            y[c] += (h / 6.0) * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        symmetrize(y);

        t = lands ? nb : t + h;
        if (lands) ++bi;

        if (monitor_trace) {
            const double drift = std::abs(blocks_trace(y) - trace0);
            if (drift > 1e-8)
                throw TraceDriftExceeded("total trace drifted by " + std::to_string(drift) +
                                         " at t=" + std::to_string(t));
        }
        emit_pending(t);
    }
    return y;
}

}  // namespace

void validate_density(const HybridDensityState& rho, double psd_tol) {
    if (rho.components.empty()) throw InvariantViolation("density state has no sectors");
    double tr = 0.0;
    for (std::size_t a = 0; a < rho.components.size(); ++a) {
        const auto& c = rho.components[a];
        if (c.rows() != c.cols()) throw InvariantViolation("density component is not square");
        if (!is_hermitian(c, 1e-9))
            throw InvariantViolation("rho_" + std::to_string(a + 1) + " is not Hermitian");
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (c + c.adjoint()),
                                                        Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -psd_tol)
            throw InvariantViolation("rho_" + std::to_string(a + 1) +
                                     " has eigenvalue below -psd_tol: " +
                                     std::to_string(es.eigenvalues().minCoeff()));
        tr += c.trace().real();
    }
    if (std::abs(tr - 1.0) > 1e-9)
        throw InvariantViolation("total trace is " + std::to_string(tr) + ", expected 1");
}

HybridDensityState density_from_pure(const PureHybridState& state, int sector_count) {
    if (state.alpha < 0 || state.alpha >= sector_count)
        throw DimensionMismatch("density_from_pure: sector index out of range");
    const auto n = state.psi.size();
    HybridDensityState rho;
    rho.components.assign(sector_count, ComplexMatrix::Zero(n, n));
    rho.components[state.alpha] = state.psi * state.psi.adjoint() / norm_sq(state.psi);
    return rho;
}

double total_trace(const HybridDensityState& rho) { return blocks_trace(rho.components); }

HybridDensityState liouville_rhs(const HybridModel& model, const HybridDensityState& rho,
                                 double t) {
    if (static_cast<int>(rho.components.size()) != model.sector_count())
        throw DimensionMismatch("liouville_rhs: sector count mismatch");
    return {liouville_rhs_frame(freeze(model, t), rho.components)};
}

HybridObservable heisenberg_rhs(const HybridModel& model, const HybridObservable& a, double t) {
    if (static_cast<int>(a.components.size()) != model.sector_count())
        throw DimensionMismatch("heisenberg_rhs: sector count mismatch");
    return {heisenberg_rhs_frame(freeze(model, t), a.components)};
}

std::vector<std::pair<double, HybridDensityState>> integrate_master(
    const HybridModel& model, const HybridDensityState& rho0, double t_end, double dt,
    const std::vector<double>& sample_times) {
    validate_density(rho0);
    if (static_cast<int>(rho0.components.size()) != model.sector_count())
        throw DimensionMismatch("integrate_master: sector count mismatch");

    std::vector<std::pair<double, Blocks>> raw;
    integrate_blocks(model, rho0.components, t_end, dt, sample_times,
                     [](const ModelFrame& f, const Blocks& y) { return liouville_rhs_frame(f, y); },
                     /*monitor_trace=*/true, raw);

    std::vector<std::pair<double, HybridDensityState>> out;
    out.reserve(raw.size());
    for (auto& [t, blocks] : raw) {
        HybridDensityState state{std::move(blocks)};
        validate_density(state);
        out.emplace_back(t, std::move(state));
    }
    return out;
}

std::vector<std::pair<double, HybridObservable>> integrate_heisenberg(
    const HybridModel& model, const HybridObservable& a0, double t_end, double dt,
    const std::vector<double>& sample_times) {
    if (static_cast<int>(a0.components.size()) != model.sector_count())
        throw DimensionMismatch("integrate_heisenberg: sector count mismatch");

    std::vector<std::pair<double, Blocks>> raw;
    integrate_blocks(model, a0.components, t_end, dt, sample_times,
                     [](const ModelFrame& f, const Blocks& y) { return heisenberg_rhs_frame(f, y); },
                     /*monitor_trace=*/false, raw);

    std::vector<std::pair<double, HybridObservable>> out;
    out.reserve(raw.size());
    for (auto& [t, blocks] : raw) out.emplace_back(t, HybridObservable{std::move(blocks)});
    return out;
}

double expectation(const HybridObservable& a, const HybridDensityState& rho) {
    if (a.components.size() != rho.components.size())
        throw DimensionMismatch("expectation: sector count mismatch");
    Complex v(0.0, 0.0);
    for (std::size_t i = 0; i < a.components.size(); ++i) {
        if (a.components[i].cols() != rho.components[i].rows())
            throw DimensionMismatch("expectation: component dimension mismatch");
        v += (a.components[i] * rho.components[i]).trace();
    }
    if (std::abs(v.imag()) >= 1e-10)
        throw InvariantViolation("expectation has imaginary part " + std::to_string(v.imag()));
    return v.real();
}

ComplexMatrix reduce_quantum(const HybridDensityState& rho) {
    if (rho.components.empty()) throw DimensionMismatch("reduce_quantum: empty state");
    ComplexMatrix sum = rho.components[0];
    for (std::size_t a = 1; a < rho.components.size(); ++a) sum += rho.components[a];
    return sum;
}

std::vector<double> reduce_classical(const HybridDensityState& rho) {
    std::vector<double> p;
    p.reserve(rho.components.size());
    for (const auto& c : rho.components) p.push_back(c.trace().real());
    return p;
}

}  // namespace eeqt
