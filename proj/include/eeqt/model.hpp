#pragma once

#include <map>
#include <string>
#include <vector>

#include "eeqt/linalg.hpp"
#include "eeqt/schedule.hpp"

namespace eeqt {

/// State of one individual system: unit vector psi plus classical sector.
/// Sector indices are 0-based in code; configs and reports label them 1..m.
struct PureHybridState {
    ComplexVector psi;
    int alpha = 0;
};

/// A recorded event: the classical sector changed from_alpha -> to_alpha.
struct EventRecord {
    double time = 0.0;
    int from_alpha = 0;
    int to_alpha = 0;
};

using MatrixSchedule = Schedule<ComplexMatrix>;

/// The experiment definition: one Hamiltonian H_a per classical sector and an
/// m x m array of coupling operators g[a][b], all n x n and possibly
/// piecewise-constant in time.
///
/// Index convention (fixed once, everything else derives from it):
/// coupling(a, b) = g_ab drives events b -> a, i.e. it maps the sector-b
/// component of a state into sector a. Consequently
///   Lambda_a = sum_b g_ba^dag g_ba        (total outflow from sector a)
/// and the statistical gain term for sector a reads sum_b g_ab rho_b g_ab^dag.
class HybridModel {
  public:
    /// Validates and freezes the definition. Every stored Hamiltonian value
    /// must be Hermitian (1e-10), every coupling value n x n with the
    /// diagonal schedules exactly zero. Piecewise-constant schedules are
    /// checked value-by-value, which covers all times.
    static HybridModel build(int n, int m, std::vector<MatrixSchedule> hamiltonians,
                             std::vector<std::vector<MatrixSchedule>> couplings,
                             std::vector<std::string> labels = {});

    int quantum_dim() const { return n_; }
    int sector_count() const { return m_; }

    const ComplexMatrix& hamiltonian(int alpha, double t) const;
    /// g_{to_alpha, from_alpha}(t); drives from_alpha -> to_alpha.
    const ComplexMatrix& coupling(int to_alpha, int from_alpha, double t) const;
    /// True when the schedule g_{to,from} is identically zero.
    bool coupling_is_zero(int to_alpha, int from_alpha) const;

    /// Lambda_a(t) = sum_b g_ba(t)^dag g_ba(t); Hermitian PSD.
    ComplexMatrix lambda_operator(int alpha, double t) const;

    /// K_a(t) = -i H_a(t) - Lambda_a(t)/2; generates the between-jump flow.
    ComplexMatrix effective_generator(int alpha, double t) const;

    /// lambda(psi, a) = Re <psi, Lambda_a psi> clamped at zero within -1e-12.
    /// psi must be unit within 1e-6.
    double jump_rate(const ComplexVector& psi, int alpha, double t) const;

    /// p_b = ||g_ba psi||^2 / sum_b' ||g_b'a psi||^2 over destinations b.
    /// Throws NoJumpPossible when the total rate vanishes.
    std::vector<double> jump_probabilities(const ComplexVector& psi, int alpha, double t) const;

    /// Union of all schedule breakpoints, sorted, deduplicated.
    std::vector<double> merged_breakpoints() const;

    const std::vector<std::string>& labels() const { return labels_; }

    /// Same physics, couplings transposed (g'_ab = g_ba). Used by the compare
    /// command's fault-injection mode to demonstrate that the trajectory /
    /// master cross-check catches index bugs.
    HybridModel with_transposed_couplings() const;

  private:
    HybridModel() = default;

    int n_ = 0;
    int m_ = 0;
    std::vector<MatrixSchedule> hamiltonians_;            // [a]
    std::vector<std::vector<MatrixSchedule>> couplings_;  // [to][from]
    std::vector<std::string> labels_;
};

/// Built-in example models:
///  - "qubit-detector"  (omega, kappa): n=2, m=2, H_a = (omega/2) sigma_x in
///    both sectors, g_21 = sqrt(kappa)|1><1|, g_12 = 0. Sector 1 is armed,
///    sector 2 has clicked and is absorbing.
///  - "feedback-switch" (omega, omega_prime, kappa): as above but
///    H_2 = (omega_prime/2) sigma_x — the drive changes when the detector
///    fires, i.e. the coupling depends on the classical record.
///  - "n-level-counter" (n, kappa): n quantum levels, m = n+1 counter
///    sectors; in sector a (1-based) the counter watches level a and
///    g_{a+1,a} = sqrt(kappa)|a><a| advances it. Levels 1..n map to basis
///    components 0..n-1; H = 0.
HybridModel builtin_model(const std::string& name, const std::map<std::string, double>& params);

}  // namespace eeqt
