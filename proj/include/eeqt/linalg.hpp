#pragma once

#include <complex>

#include <Eigen/Dense>

namespace eeqt {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Conjugate transpose.
ComplexMatrix adjoint(const ComplexMatrix& m);

/// AB - BA. Both operands must be square and of equal dimension.
ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

/// AB + BA. Both operands must be square and of equal dimension.
ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b);

/// exp(K*t) for a general (non-Hermitian, non-normal) square K.
///
/// Scaling-and-squaring: K*t is scaled by a power of two until its 1-norm is
/// <= 1, expanded with an order-20 Taylor kernel in Horner form, then squared
/// back. The truncation error of the kernel is below 1e-19, so accuracy is
/// limited by rounding in the squaring phase; relative error stays under
/// 1e-10 for ||K*t|| <= 20 and degrades gracefully beyond. Fully
/// deterministic: no iteration counts depend on data beyond the norm.
ComplexMatrix expm(const ComplexMatrix& k, double t = 1.0);

/// exp(K*t) * v. Dimensions must agree; non-finite inputs are rejected.
ComplexVector expm_apply(const ComplexMatrix& k, const ComplexVector& v, double t);

Complex trace(const ComplexMatrix& m);

/// <u, v>, conjugate-linear in the first argument.
Complex inner(const ComplexVector& u, const ComplexVector& v);

double norm_sq(const ComplexVector& v);

bool is_hermitian(const ComplexMatrix& m, double tol = 1e-10);

/// Hermiticity first, then all eigenvalues >= -tol.
/// tol < 0 selects the default 1e-10 * |trace(M)|.
bool is_positive_semidefinite(const ComplexMatrix& m, double tol = -1.0);

}  // namespace eeqt
