#pragma once

#include <utility>
#include <vector>

#include "eeqt/linalg.hpp"
#include "eeqt/model.hpp"

namespace eeqt {

/// Statistical state of the coupled system: one positive operator per
/// classical sector, total trace 1.
struct HybridDensityState {
    std::vector<ComplexMatrix> components;
};

/// Observable of the coupled system: one Hermitian operator per sector.
struct HybridObservable {
    std::vector<ComplexMatrix> components;
};

/// Throws InvariantViolation unless every component is Hermitian (1e-9),
/// has smallest eigenvalue >= -psd_tol, and the traces sum to 1 (1e-9).
void validate_density(const HybridDensityState& rho, double psd_tol = 1e-7);

/// rho as seen from one individual system: sector alpha carries |psi><psi|.
HybridDensityState density_from_pure(const PureHybridState& state, int sector_count);

double total_trace(const HybridDensityState& rho);

/// d(rho_a)/dt = -i[H_a, rho_a] + sum_b g_ab rho_b g_ab^dag
///               - {Lambda_a, rho_a}/2,   schedules evaluated at t.
HybridDensityState liouville_rhs(const HybridModel& model, const HybridDensityState& rho,
                                 double t);

/// d(A_a)/dt = i[H_a, A_a] + sum_b g_ba^dag A_b g_ba - {Lambda_a, A_a}/2.
HybridObservable heisenberg_rhs(const HybridModel& model, const HybridObservable& a, double t);

/// Fixed-step RK4 on the statistical-state equation. Step boundaries are
/// aligned with schedule breakpoints and sample times; schedules are frozen
/// at the step start, which is exact for piecewise-constant coefficients.
/// Components are re-symmetrized after every step. The total trace is
/// monitored against its initial value and never renormalized: drift beyond
/// 1e-8 throws TraceDriftExceeded. Every emitted output is re-validated.
std::vector<std::pair<double, HybridDensityState>> integrate_master(
    const HybridModel& model, const HybridDensityState& rho0, double t_end, double dt,
    const std::vector<double>& sample_times);

/// Same stepping for the observable picture (no trace monitor; the flow is
/// unital, not trace-preserving).
std::vector<std::pair<double, HybridObservable>> integrate_heisenberg(
    const HybridModel& model, const HybridObservable& a0, double t_end, double dt,
    const std::vector<double>& sample_times);

/// <A>_rho = sum_a Tr(A_a rho_a). The imaginary part must stay below 1e-10.
double expectation(const HybridObservable& a, const HybridDensityState& rho);

/// Effective quantum state sum_a rho_a.
ComplexMatrix reduce_quantum(const HybridDensityState& rho);

/// Classical occupation probabilities p_a = Tr(rho_a).
std::vector<double> reduce_classical(const HybridDensityState& rho);

}  // namespace eeqt
