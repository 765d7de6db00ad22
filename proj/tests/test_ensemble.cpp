#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "eeqt/ensemble.hpp"
#include "eeqt/errors.hpp"
#include "test_util.hpp"

using namespace eeqt;

namespace {

HybridModel detector(double omega, double kappa) {
    return builtin_model("qubit-detector", {{"omega", omega}, {"kappa", kappa}});
}

ComplexVector ket(Complex a, Complex b) {
    ComplexVector v(2);
    v << a, b;
    return v;
}

bool states_identical(const std::vector<HybridDensityState>& a,
                      const std::vector<HybridDensityState>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k].components.size() != b[k].components.size()) return false;
        for (std::size_t s = 0; s < a[k].components.size(); ++s) {
            const auto& x = a[k].components[s];
            const auto& y = b[k].components[s];
            if (x.rows() != y.rows() || x.cols() != y.cols()) return false;
            for (Eigen::Index i = 0; i < x.size(); ++i)
                if (x(i) != y(i)) return false;  // bitwise, not approximate
        }
    }
    return true;
}

TrajectoryParams detector_params() {
    TrajectoryParams p;
    p.scheme = FixedDt{1e-3};
    p.t_end = 1.0;
    p.sample_times = {0.0, 0.5, 1.0};
    return p;
}

}  // namespace

TEST_CASE("a single closed trajectory averages to its own projector") {
    PhiloxStream rng(61, 0);
    const ComplexMatrix h = testutil::random_hermitian(rng, 3, 1.0);
    std::vector<MatrixSchedule> hs(1, MatrixSchedule(h));
    std::vector<std::vector<MatrixSchedule>> gs(
        1, std::vector<MatrixSchedule>(1, MatrixSchedule(ComplexMatrix::Zero(3, 3))));
    const auto model = HybridModel::build(3, 1, std::move(hs), std::move(gs));
    const ComplexVector psi0 = testutil::random_unit(rng, 3);

    TrajectoryParams params;
    params.scheme = FixedDt{1e-3};
    params.t_end = 1.0;
    params.sample_times = {1.0};
    const auto ens = run_ensemble(model, {psi0, 0}, params, 1, 7);
    const ComplexVector oracle = testutil::unitary_evolve_eig(h, psi0, 1.0);
    const ComplexMatrix expected = oracle * oracle.adjoint();
    CHECK((ens.empirical_states[0].components[0] - expected).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("ensembles are deterministic and worker-count independent") {
    const auto model = detector(1.0, 1.0);
    const auto params = detector_params();
    const auto base = run_ensemble(model, {ket(1, 0), 0}, params, 700, 42, 1);
    const auto again = run_ensemble(model, {ket(1, 0), 0}, params, 700, 42, 1);
    const auto wide = run_ensemble(model, {ket(1, 0), 0}, params, 700, 42, 8);
    const auto serial = run_ensemble_serial(model, {ket(1, 0), 0}, params, 700, 42);

    CHECK(states_identical(base.empirical_states, again.empirical_states));
    CHECK(states_identical(base.empirical_states, wide.empirical_states));
    CHECK(states_identical(base.empirical_states, serial.empirical_states));
    CHECK(base.sector_counts == wide.sector_counts);
    CHECK(base.sector_counts == serial.sector_counts);
    for (const auto& [key, ch] : base.channels) {
        const auto& w = wide.channels.at(key);
        CHECK(ch.all_times == w.all_times);
        CHECK(ch.first_times == w.first_times);
    }

    const auto reseeded = run_ensemble(model, {ket(1, 0), 0}, params, 700, 43, 1);
    CHECK_FALSE(states_identical(base.empirical_states, reseeded.empirical_states));
}

TEST_CASE("classical marginals equal the trajectory frequencies") {
    const auto model = detector(1.0, 1.0);
    const auto params = detector_params();
    const auto ens = run_ensemble(model, {ket(1, 0), 0}, params, 500, 11);
    for (std::size_t k = 0; k < ens.sample_times.size(); ++k) {
        std::uint64_t total = 0;
        const auto p = reduce_classical(ens.empirical_states[k]);
        CHECK(std::abs(total_trace(ens.empirical_states[k]) - 1.0) < 1e-12);
        for (int a = 0; a < ens.sectors; ++a) {
            total += ens.sector_counts[k][a];
            const double freq = static_cast<double>(ens.sector_counts[k][a]) / 500.0;
            // identical up to the rounding of the per-trajectory renormalization
            CHECK(std::abs(p[a] - freq) < 1e-12);
        }
        CHECK(total == 500);
    }
}

TEST_CASE("empirical occupation matches the closed form") {
    const auto model = detector(0.0, 1.0);
    TrajectoryParams params;
    params.scheme = FixedDt{1e-3};
    params.t_end = 1.0;
    params.sample_times = {1.0};
    const int n = 2000;
    const auto ens = run_ensemble(model, {ket(0, 1), 0}, params, n, 2718);
    const double p2 = reduce_classical(ens.empirical_states[0])[1];
    const double expected = 1.0 - std::exp(-1.0);
    const double sigma = std::sqrt(expected * (1.0 - expected) / n);
    CHECK(std::abs(p2 - expected) < 3.0 * sigma);
}

TEST_CASE("trace distance on known pairs") {
    ComplexVector e0 = ket(1, 0), e1 = ket(0, 1);
    HybridDensityState a{{e0 * e0.adjoint(), ComplexMatrix::Zero(2, 2)}};
    CHECK(trace_distance(a, a) == 0.0);

    // orthogonal pure states in the same sector
    HybridDensityState b{{e1 * e1.adjoint(), ComplexMatrix::Zero(2, 2)}};
    CHECK(trace_distance(a, b) == doctest::Approx(1.0).epsilon(1e-12));

    // same quantum part, classical certainty flipped: classical total variation
    HybridDensityState c{{ComplexMatrix::Zero(2, 2), e0 * e0.adjoint()}};
    CHECK(trace_distance(a, c) == doctest::Approx(1.0).epsilon(1e-12));

    HybridDensityState wrong{{ComplexMatrix::Zero(2, 2)}};
    CHECK_THROWS_AS(trace_distance(a, wrong), DimensionMismatch);
}

TEST_CASE("event statistics summarize the channels") {
    // dark start: nothing ever fires
    const auto model = detector(0.0, 1.0);
    auto params = detector_params();
    params.t_end = 2.0;
    params.sample_times = {2.0};
    const auto quiet = run_ensemble(model, {ket(1, 0), 0}, params, 200, 3);
    for (const auto& s : event_statistics(quiet)) CHECK(s.count == 0);

    // kappa = 2: mean first-event time 0.5
    const auto hot = detector(0.0, 2.0);
    TrajectoryParams hp;
    hp.scheme = FixedDt{1e-3};
    hp.t_end = 10.0;
    const int n = 2000;
    const auto ens = run_ensemble(hot, {ket(0, 1), 0}, hp, n, 5);
    const auto stats = event_statistics(ens);
    REQUIRE(stats.size() == 2);  // both ordered pairs reported
    for (const auto& s : stats) {
        if (s.from == 0 && s.to == 1) {
            CHECK(s.n_first == n);  // the tail beyond t_end = 10 is ~e^{-20}
            CHECK(std::abs(s.first_mean - 0.5) < 3.0 * 0.5 / std::sqrt(double(n)));
            std::uint64_t hist_total = 0;
            for (auto c : s.histogram) hist_total += c;
            CHECK(hist_total == s.count);
        } else {
            CHECK(s.count == 0);  // no coupling ever drives 2 -> 1
        }
    }
}

TEST_CASE("self-calibrated thresholds scale like the Monte Carlo error") {
    const auto model = detector(1.0, 1.0);
    const auto params = detector_params();
    const auto ens = run_ensemble(model, {ket(1, 0), 0}, params, 2000, 99);
    // reference: the ensemble itself, so distances are pure noise around zero
    const auto thr = compare_thresholds(ens, ens.empirical_states, 10, 0.0);
    for (double x : thr) {
        CHECK(x > 0.0);
        CHECK(x < 0.2);
    }
}

TEST_CASE("trajectory failures carry the trajectory index") {
    const auto hot = detector(0.0, 1000.0);
    TrajectoryParams params;
    params.scheme = FixedDt{1e-2};
    params.t_end = 1.0;
    CHECK_THROWS_WITH_AS(run_ensemble(hot, {ket(0, 1), 0}, params, 4, 1),
                         doctest::Contains("trajectory 0"), Error);
}
