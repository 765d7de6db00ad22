#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "eeqt/errors.hpp"
#include "eeqt/linalg.hpp"
#include "test_util.hpp"

using namespace eeqt;
using testutil::random_matrix;

namespace {

const Complex I(0.0, 1.0);

ComplexMatrix pauli_x() {
    ComplexMatrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

ComplexMatrix pauli_y() {
    ComplexMatrix m(2, 2);
    m << 0, -I, I, 0;
    return m;
}

ComplexMatrix pauli_z() {
    ComplexMatrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

}  // namespace

TEST_CASE("adjoint conjugate-transposes") {
    ComplexMatrix m(2, 2);
    m << 0, I, 0, 0;
    const ComplexMatrix a = adjoint(m);
    CHECK(a(0, 0) == Complex(0, 0));
    CHECK(a(0, 1) == Complex(0, 0));
    CHECK(a(1, 0) == -I);
    CHECK(a(1, 1) == Complex(0, 0));

    const ComplexMatrix id = ComplexMatrix::Identity(3, 3);
    CHECK((adjoint(id) - id).norm() == 0.0);
}

TEST_CASE("adjoint is an involution") {
    PhiloxStream rng(11, 0);
    for (int rep = 0; rep < 20; ++rep) {
        const ComplexMatrix m = random_matrix(rng, 4, 3);
        CHECK((adjoint(adjoint(m)) - m).norm() == 0.0);
    }
}

TEST_CASE("commutators of Pauli matrices") {
    CHECK(commutator(pauli_x(), pauli_x()).norm() == 0.0);
    // [sigma_x, sigma_y] = 2i sigma_z, by direct 2x2 multiplication
    CHECK((commutator(pauli_x(), pauli_y()) - 2.0 * I * pauli_z()).norm() < 1e-15);

    PhiloxStream rng(12, 0);
    const ComplexMatrix b = random_matrix(rng, 3, 3);
    CHECK((anticommutator(ComplexMatrix::Identity(3, 3), b) - 2.0 * b).norm() == 0.0);

    CHECK_THROWS_AS(commutator(pauli_x(), ComplexMatrix::Identity(3, 3)), DimensionMismatch);
    CHECK_THROWS_AS(anticommutator(random_matrix(rng, 2, 3), random_matrix(rng, 3, 2)),
                    DimensionMismatch);
}

TEST_CASE("trace is cyclic") {
    PhiloxStream rng(13, 0);
    for (int rep = 0; rep < 20; ++rep) {
        const ComplexMatrix a = random_matrix(rng, 3, 5);
        const ComplexMatrix b = random_matrix(rng, 5, 3);
        CHECK(std::abs(trace(a * b) - trace(b * a)) < 1e-12);
    }
    CHECK(trace(ComplexMatrix::Identity(3, 3)) == Complex(3, 0));
    CHECK_THROWS_AS(trace(ComplexMatrix::Zero(2, 3)), DimensionMismatch);
}

TEST_CASE("inner product is conjugate-linear in the first argument") {
    ComplexVector u(2), v(2);
    u << I, 0;
    v << 1, 0;
    CHECK(inner(u, v) == -I);
    CHECK(inner(v, u) == I);

    ComplexVector w(2);
    w << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    CHECK(norm_sq(w) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("expm with zero generator is the identity") {
    ComplexVector v(3);
    v << 1, 2.0 * I, -0.5;
    const ComplexVector w = expm_apply(ComplexMatrix::Zero(3, 3), v, 0.7);
    CHECK((w - v).norm() == 0.0);
}

TEST_CASE("expm reproduces the closed-form sigma_x rotation") {
    // exp(-i sigma_x t) = cos(t) I - i sin(t) sigma_x; at t = pi/2 it maps
    // (1,0) to (0,-i)
    const ComplexMatrix k = -I * pauli_x();
    ComplexVector v(2);
    v << 1, 0;
    const ComplexVector w = expm_apply(k, v, M_PI / 2.0);
    CHECK(std::abs(w(0)) < 1e-14);
    CHECK(std::abs(w(1) - (-I)) < 1e-14);
}

TEST_CASE("expm of a scalar generator is a scalar decay") {
    const double kappa = 0.7;
    const ComplexMatrix k = -0.5 * kappa * ComplexMatrix::Identity(2, 2);
    ComplexVector v(2);
    v << 0.3, 0.4 * I;
    const ComplexVector w = expm_apply(k, v, 1.3);
    const double factor = std::exp(-0.5 * kappa * 1.3);
    CHECK((w - factor * v).norm() < 1e-14);
}

TEST_CASE("expm semigroup property") {
    PhiloxStream rng(14, 0);
    for (int rep = 0; rep < 10; ++rep) {
        ComplexMatrix k = random_matrix(rng, 4, 4);
        k *= 10.0 * rng.next() / k.norm();
        const double t1 = rng.next();
        const double t2 = rng.next();
        ComplexVector v = testutil::random_unit(rng, 4);
        const ComplexVector once = expm_apply(k, v, t1 + t2);
        const ComplexVector twice = expm_apply(k, expm_apply(k, v, t1), t2);
        CHECK((once - twice).norm() / once.norm() < 1e-9);
    }
}

TEST_CASE("expm of a skew-Hermitian generator preserves the norm") {
    PhiloxStream rng(15, 0);
    for (int rep = 0; rep < 10; ++rep) {
        const ComplexMatrix h = testutil::random_hermitian(rng, 5, 8.0);
        const ComplexMatrix k = -I * h;
        const ComplexVector v = testutil::random_unit(rng, 5);
        const double n2 = norm_sq(expm_apply(k, v, 0.9));
        CHECK(std::abs(n2 - 1.0) < 1e-10);
    }
}

TEST_CASE("expm agrees with the spectral route for Hermitian generators") {
    PhiloxStream rng(16, 0);
    for (int rep = 0; rep < 10; ++rep) {
        const ComplexMatrix h = testutil::random_hermitian(rng, 4, 5.0);
        const ComplexVector v = testutil::random_unit(rng, 4);
        const double t = 2.0 * rng.next();
        const ComplexVector a = expm_apply(-I * h, v, t);
        const ComplexVector b = testutil::unitary_evolve_eig(h, v, t);
        CHECK((a - b).norm() < 1e-11);
    }
}

TEST_CASE("expm rejects non-finite input") {
    ComplexMatrix k(1, 1);
    k << std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(expm(k, 1.0), Error);
}

TEST_CASE("hermiticity and positivity predicates") {
    CHECK(is_hermitian(pauli_y(), 1e-12));
    CHECK_FALSE(is_hermitian(I * pauli_x(), 1e-12));

    ComplexMatrix proj = ComplexMatrix::Zero(2, 2);
    proj(1, 1) = 1.0;
    CHECK(is_positive_semidefinite(proj));
    CHECK_FALSE(is_positive_semidefinite(-proj, 1e-10));
    CHECK_FALSE(is_positive_semidefinite(pauli_z(), 1e-10));  // eigenvalues +-1
    CHECK_FALSE(is_positive_semidefinite(I * pauli_x(), 1e-10));

    PhiloxStream rng(17, 0);
    const ComplexMatrix b = random_matrix(rng, 3, 3);
    CHECK(is_positive_semidefinite(b * b.adjoint()));
}
