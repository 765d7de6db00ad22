#include "eeqt/linalg.hpp"

#include <cmath>

#include "eeqt/errors.hpp"

namespace eeqt {

namespace {

void require_square(const ComplexMatrix& m, const char* who) {
    if (m.rows() != m.cols())
        throw DimensionMismatch(std::string(who) + ": matrix is " + std::to_string(m.rows()) +
                                "x" + std::to_string(m.cols()) + ", expected square");
}

void require_same_square(const ComplexMatrix& a, const ComplexMatrix& b, const char* who) {
    require_square(a, who);
    require_square(b, who);
    if (a.rows() != b.rows())
        throw DimensionMismatch(std::string(who) + ": dimensions " + std::to_string(a.rows()) +
                                " and " + std::to_string(b.rows()) + " differ");
}

}  // namespace

ComplexMatrix adjoint(const ComplexMatrix& m) { return m.adjoint(); }

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_same_square(a, b, "commutator");
    return a * b - b * a;
}

ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_same_square(a, b, "anticommutator");
    return a * b + b * a;
}

ComplexMatrix expm(const ComplexMatrix& k, double t) {
    require_square(k, "expm");
    const auto n = k.rows();
    ComplexMatrix a = k * t;
    if (!a.allFinite()) throw Error("expm: non-finite entries in K*t");

    // 1-norm controls the Taylor truncation bound.
    const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm1 > 1.0) {
        squarings = static_cast<int>(std::ceil(std::log2(norm1)));
        a *= std::ldexp(1.0, -squarings);  // exact power-of-two scaling
    }

    constexpr int kOrder = 20;
    ComplexMatrix acc = ComplexMatrix::Identity(n, n);
    for (int j = kOrder; j >= 1; --j)
        acc = ComplexMatrix::Identity(n, n) + (a * acc) / static_cast<double>(j);
    for (int i = 0; i < squarings; ++i) acc = (acc * acc).eval();
    return acc;
}

ComplexVector expm_apply(const ComplexMatrix& k, const ComplexVector& v, double t) {
    if (k.cols() != v.size())
        throw DimensionMismatch("expm_apply: K is " + std::to_string(k.rows()) + "x" +
                                std::to_string(k.cols()) + " but v has dim " +
                                std::to_string(v.size()));
    if (!v.allFinite()) throw Error("expm_apply: non-finite entries in v");
    return expm(k, t) * v;
}

Complex trace(const ComplexMatrix& m) {
    require_square(m, "trace");
    return m.trace();
}

Complex inner(const ComplexVector& u, const ComplexVector& v) {
    if (u.size() != v.size())
        throw DimensionMismatch("inner: dims " + std::to_string(u.size()) + " and " +
                                std::to_string(v.size()) + " differ");
    return u.dot(v);  // Eigen conjugates the first argument
}

double norm_sq(const ComplexVector& v) { return v.squaredNorm(); }

bool is_hermitian(const ComplexMatrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_positive_semidefinite(const ComplexMatrix& m, double tol) {
    require_square(m, "is_positive_semidefinite");
    const double tol_eff = tol >= 0.0 ? tol : 1e-10 * std::abs(m.trace());
    if (!is_hermitian(m, std::max(tol_eff, 1e-12))) return false;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es((m + m.adjoint()) / 2.0,
                                                    Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -tol_eff;
}

}  // namespace eeqt
