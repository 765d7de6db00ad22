#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "eeqt/errors.hpp"
#include "eeqt/pdp.hpp"
#include "eeqt/stats.hpp"
#include "test_util.hpp"

using namespace eeqt;
using testutil::FixedSource;

namespace {

const Complex I(0.0, 1.0);

HybridModel detector(double omega, double kappa) {
    return builtin_model("qubit-detector", {{"omega", omega}, {"kappa", kappa}});
}

HybridModel closed_qubit(const ComplexMatrix& h) {
    std::vector<MatrixSchedule> hs(1, MatrixSchedule(h));
    std::vector<std::vector<MatrixSchedule>> gs(
        1, std::vector<MatrixSchedule>(1,
                                       MatrixSchedule(ComplexMatrix::Zero(h.rows(), h.cols()))));
    return HybridModel::build(static_cast<int>(h.rows()), 1, std::move(hs), std::move(gs));
}

ComplexVector ket(Complex a, Complex b) {
    ComplexVector v(2);
    v << a, b;
    return v;
}

}  // namespace

TEST_CASE("no-jump segment reproduces the closed-form rotation") {
    ComplexMatrix sx(2, 2);
    sx << 0, 1, 1, 0;
    const auto model = closed_qubit(sx);
    const auto out = evolve_no_jump({ket(1, 0), 0}, model, 0.0, M_PI / 2.0);
    CHECK(std::abs(out.psi(0)) < 1e-12);
    CHECK(std::abs(out.psi(1) - (-I)) < 1e-12);
    CHECK(std::abs(norm_sq(out.psi) - 1.0) < 1e-14);
}

TEST_CASE("no-jump segment damps the monitored component") {
    const auto model = detector(0.0, 1.0);

    // dark state sits in the kernel of K
    const auto dark = evolve_no_jump({ket(1, 0), 0}, model, 0.0, 3.0);
    CHECK((dark.psi - ket(1, 0)).norm() < 1e-14);

    // K is diagonal: amplitudes scale as (a, b e^{-kappa dt / 2}), then renormalize
    const double a = 0.6, b = 0.8, dt = 0.7;
    const auto out = evolve_no_jump({ket(a, b), 0}, model, 0.0, dt);
    ComplexVector expected = ket(a, b * std::exp(-0.5 * dt));
    expected /= expected.norm();
    CHECK((out.psi - expected).norm() < 1e-12);
}

TEST_CASE("thinning step with injected draws") {
    const auto model = detector(0.0, 1.0);

    // forced jump: r = 0 wins against lambda dt = dt; the projection fixes psi
    FixedSource force({0.0, 0.5});
    const auto [jumped, ev] = step_fixed_dt({ket(0, 1), 0}, model, 2.0, 0.01, force);
    REQUIRE(ev.has_value());
    CHECK(ev->from_alpha == 0);
    CHECK(ev->to_alpha == 1);
    CHECK(ev->time == doctest::Approx(2.01));
    CHECK(jumped.alpha == 1);
    CHECK((jumped.psi - ket(0, 1)).norm() < 1e-14);

    // r above lambda dt: deterministic evolution only
    FixedSource calm({0.9});
    const auto [stayed, none] = step_fixed_dt({ket(0, 1), 0}, model, 0.0, 0.01, calm);
    CHECK_FALSE(none.has_value());
    CHECK(stayed.alpha == 0);

    // a sector with zero rate never jumps, not even against r = 0
    FixedSource zero({0.0});
    const auto [still, no_ev] = step_fixed_dt({ket(0, 1), 1}, model, 0.0, 0.01, zero);
    CHECK_FALSE(no_ev.has_value());
    CHECK(still.alpha == 1);
}

TEST_CASE("norm-threshold crossing matches the closed-form decay") {
    // ||psi(t)||^2 = e^{-kappa t}; r = 0.5 crosses at ln 2
    const auto model = detector(0.0, 1.0);
    TrajectoryParams params;
    params.scheme = NormThreshold{};
    params.t_end = 10.0;
    const auto s = sample_jump_time_norm_method({ket(0, 1), 0}, model, 0.0, 0.5, params);
    CHECK(std::abs(s.t_jump - std::log(2.0)) < 1e-6);
    CHECK(std::abs(s.psi.squaredNorm() - 0.5) < 1e-6);

    // no dissipation: the norm never drops
    ComplexMatrix sx(2, 2);
    sx << 0, 1, 1, 0;
    const auto closed = closed_qubit(sx);
    const auto never =
        sample_jump_time_norm_method({ket(1, 0), 0}, closed, 0.0, 0.5, params);
    CHECK(std::isinf(never.t_jump));

    // dark state: decay never starts
    const auto dark = sample_jump_time_norm_method({ket(1, 0), 0}, model, 0.0, 0.5, params);
    CHECK(std::isinf(dark.t_jump));

    CHECK_THROWS_AS(sample_jump_time_norm_method({ket(0, 1), 0}, model, 0.0, 0.0, params),
                    Error);
    CHECK_THROWS_AS(sample_jump_time_norm_method({ket(0, 1), 0}, model, 0.0, 1.0, params),
                    Error);
}

TEST_CASE("trajectories are bit-reproducible per seed") {
    const auto model = detector(1.0, 1.0);
    TrajectoryParams params;
    params.scheme = FixedDt{1e-3};
    params.t_end = 2.0;
    params.sample_times = {0.0, 0.5, 1.0, 2.0};

    for (int variant = 0; variant < 2; ++variant) {
        if (variant == 1) params.scheme = NormThreshold{};
        const auto a = run_trajectory(model, {ket(1, 0), 0}, params, {99, 5});
        const auto b = run_trajectory(model, {ket(1, 0), 0}, params, {99, 5});
        REQUIRE(a.events.size() == b.events.size());
        for (std::size_t i = 0; i < a.events.size(); ++i) {
            CHECK(a.events[i].time == b.events[i].time);
            CHECK(a.events[i].from_alpha == b.events[i].from_alpha);
            CHECK(a.events[i].to_alpha == b.events[i].to_alpha);
        }
        REQUIRE(a.snapshots.size() == b.snapshots.size());
        for (std::size_t i = 0; i < a.snapshots.size(); ++i)
            CHECK((a.snapshots[i].second.psi - b.snapshots[i].second.psi).norm() == 0.0);

        const auto c = run_trajectory(model, {ket(1, 0), 0}, params, {99, 6});
        const bool distinct = a.events.size() != c.events.size() ||
                              (!a.events.empty() && a.events[0].time != c.events[0].time);
        CHECK(distinct);
    }
}

TEST_CASE("closed system produces no events and the exact unitary flow") {
    PhiloxStream rng(51, 0);
    const ComplexMatrix h = testutil::random_hermitian(rng, 4, 2.0);
    const auto model = closed_qubit(h);
    const ComplexVector psi0 = testutil::random_unit(rng, 4);
    TrajectoryParams params;
    params.scheme = FixedDt{1e-3};
    params.t_end = 1.0;
    params.sample_times = {1.0};
    const auto res = run_trajectory(model, {psi0, 0}, params, {7, 0});
    CHECK(res.events.empty());
    const ComplexVector oracle = testutil::unitary_evolve_eig(h, psi0, 1.0);
    const double fidelity = std::norm(inner(oracle, res.snapshots.front().second.psi));
    CHECK(fidelity > 1.0 - 1e-10);
}

TEST_CASE("first-event times follow the exponential law") {
    // lambda = kappa exactly for psi = (0,1); mean first-event time = 1/kappa
    const auto model = detector(0.0, 1.0);
    TrajectoryParams params;
    params.scheme = FixedDt{1e-3};
    params.t_end = 15.0;
    const int n = 2000;
    std::vector<double> times;
    for (int i = 0; i < n; ++i) {
        const auto res = run_trajectory(model, {ket(0, 1), 0}, params, {123, (std::uint64_t)i});
        REQUIRE(res.events.size() == 1);  // the clicked sector is absorbing
        times.push_back(res.events.front().time);
    }
    const auto mv = mean_variance(times);
    CHECK(std::abs(mv.mean - 1.0) < 3.0 / std::sqrt(static_cast<double>(n)));
    const double d = ks_statistic(times, [](double t) { return exponential_cdf(1.0, t); });
    CHECK(d < ks_critical_1pct(times.size()));
}

TEST_CASE("both schemes agree on the first-event distribution") {
    const auto model = detector(1.0, 1.0);
    const int n = 2000;
    auto first_times = [&](const Scheme& scheme, std::uint64_t seed) {
        TrajectoryParams params;
        params.scheme = scheme;
        params.t_end = 12.0;
        std::vector<double> out;
        for (int i = 0; i < n; ++i) {
            const auto res = run_trajectory(model, {ket(1, 0), 0}, params, {seed, (std::uint64_t)i});
            if (!res.events.empty()) out.push_back(res.events.front().time);
        }
        return out;
    };
    const auto a = first_times(FixedDt{1e-3}, 1001);
    const auto b = first_times(NormThreshold{}, 1002);
    const double d = ks_statistic_two_sample(a, b);
    CHECK(d < ks_critical_two_sample_1pct(a.size(), b.size()));
}

TEST_CASE("event chains are continuous and dark sectors absorb") {
    const auto model = builtin_model("n-level-counter", {{"n", 2.0}, {"kappa", 1.0}});
    TrajectoryParams params;
    params.scheme = FixedDt{1e-3};
    params.t_end = 8.0;
    params.sample_times = {2.0, 8.0};
    for (std::uint64_t i = 0; i < 50; ++i) {
        const auto res = run_trajectory(model, {ket(1, 0), 0}, params, {321, i});
        for (std::size_t k = 1; k < res.events.size(); ++k) {
            CHECK(res.events[k].from_alpha == res.events[k - 1].to_alpha);
            CHECK(res.events[k].time > res.events[k - 1].time);
        }
        // level 1 is watched by sector 1 only; afterwards sector 2 watches
        // level 2 which this state never occupies
        CHECK(res.events.size() <= 1);
        for (const auto& [t, st] : res.snapshots)
            CHECK(std::abs(norm_sq(st.psi) - 1.0) < 1e-9);
    }
}

TEST_CASE("piecewise coupling schedules delay events past the switch-on") {
    // coupling is zero until t = 1, then the monitored component decays
    ComplexMatrix probe = ComplexMatrix::Zero(2, 2);
    probe(1, 1) = 1.0;
    std::vector<MatrixSchedule> h(2, MatrixSchedule(ComplexMatrix::Zero(2, 2)));
    std::vector<std::vector<MatrixSchedule>> g(
        2, std::vector<MatrixSchedule>(2, MatrixSchedule(ComplexMatrix::Zero(2, 2))));
    g[1][0] = MatrixSchedule({0.0, 1.0}, {ComplexMatrix::Zero(2, 2), probe});
    const auto model = HybridModel::build(2, 2, std::move(h), std::move(g));

    for (const Scheme scheme : {Scheme(FixedDt{1e-3}), Scheme(NormThreshold{})}) {
        TrajectoryParams params;
        params.scheme = scheme;
        params.t_end = 12.0;
        std::vector<double> times;
        for (std::uint64_t i = 0; i < 400; ++i) {
            const auto res = run_trajectory(model, {ket(0, 1), 0}, params, {77, i});
            if (!res.events.empty()) times.push_back(res.events.front().time);
        }
        REQUIRE(!times.empty());
        for (double t : times) CHECK(t >= 1.0);
        const auto mv = mean_variance(times);
        CHECK(std::abs(mv.mean - 2.0) < 3.0 / std::sqrt(static_cast<double>(times.size())) + 0.05);
    }
}

TEST_CASE("guards fire on misuse") {
    // lambda dt = 10: thinning would be nonsense
    const auto hot = detector(0.0, 1000.0);
    TrajectoryParams params;
    params.scheme = FixedDt{1e-2};
    params.t_end = 1.0;
    CHECK_THROWS_AS(run_trajectory(hot, {ket(0, 1), 0}, params, {1, 0}), StepTooLarge);

    // warning range is reported, not thrown
    const auto warm = detector(0.0, 30.0);
    const auto res = run_trajectory(warm, {ket(0, 1), 0}, params, {1, 0});
    CHECK(res.max_lambda_dt > 0.1);
    CHECK(res.max_lambda_dt <= 0.5);

    // ping-pong model: jumps forever, the cap must trip
    ComplexMatrix probe = ComplexMatrix::Zero(2, 2);
    probe(1, 1) = 1.0;
    std::vector<MatrixSchedule> h(2, MatrixSchedule(ComplexMatrix::Zero(2, 2)));
    std::vector<std::vector<MatrixSchedule>> g(
        2, std::vector<MatrixSchedule>(2, MatrixSchedule(ComplexMatrix::Zero(2, 2))));
    g[1][0] = MatrixSchedule(probe);
    g[0][1] = MatrixSchedule(probe);
    const auto pingpong = HybridModel::build(2, 2, std::move(h), std::move(g));
    TrajectoryParams capped;
    capped.scheme = FixedDt{1e-2};
    capped.t_end = 200.0;
    capped.max_events = 5;
    CHECK_THROWS_AS(run_trajectory(pingpong, {ket(0, 1), 0}, capped, {2, 0}), RunawayJumps);

    CHECK_THROWS_AS(run_trajectory(hot, {ket(0, 1), 0}, TrajectoryParams{FixedDt{-1.0}, 1.0},
                                   {0, 0}),
                    Error);
    TrajectoryParams bad_samples;
    bad_samples.t_end = 1.0;
    bad_samples.sample_times = {0.5, 0.25};
    CHECK_THROWS_AS(run_trajectory(hot, {ket(0, 1), 0}, bad_samples, {0, 0}), Error);
}

TEST_CASE("snapshots land exactly on sample times, post-jump on coincidence") {
    const auto model = detector(0.0, 1.0);
    TrajectoryParams params;
    params.scheme = FixedDt{1e-3};
    params.t_end = 1.0;
    params.sample_times = {0.0, 0.25, 0.5, 1.0};
    const auto res = run_trajectory(model, {ket(0, 1), 0}, params, {5, 3});
    REQUIRE(res.snapshots.size() == 4);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(res.snapshots[i].first == params.sample_times[i]);
    // sector recorded at a snapshot matches the event history before it
    for (const auto& [t, st] : res.snapshots) {
        int expected = 0;
        for (const auto& ev : res.events)
            if (ev.time <= t) expected = ev.to_alpha;
        CHECK(st.alpha == expected);
    }
}
