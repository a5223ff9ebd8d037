#pragma once

#include <complex>

#include <Eigen/Dense>

#include "dheom/errors.hpp"

namespace dheom {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// max_ij |M_ij|
double max_abs(const Matrix& m);

/// ||M - M^dagger||_max
double hermiticity_defect(const Matrix& m);

/// (M + M^dagger)/2
Matrix hermitian_part(const Matrix& m);

/// Largest |eigenvalue| of a Hermitian matrix (its spectral norm).
double spectral_norm_hermitian(const Matrix& m);

bool is_finite(const Matrix& m);

/// [A, X] = AX - XA. Throws DimensionMismatch if shapes differ.
Matrix commutator(const Matrix& a, const Matrix& x);

/// Column-stacking vectorization and its inverse.
Vector vectorize(const Matrix& m);
Matrix devectorize(const Vector& v, int dim);

/// d^2 x d^2 matrix L with L vec(X) = vec([H, X]) under column stacking:
/// L = I (x) H - H^T (x) I.
Matrix liouvillian_matrix(const Matrix& h);

/// Density matrix: Hermitian, unit trace, positive semidefinite within
/// tolerance (checked on construction).
class DensityMatrix {
public:
    explicit DensityMatrix(Matrix m);

    const Matrix& matrix() const noexcept { return m_; }
    int dim() const noexcept { return static_cast<int>(m_.rows()); }

private:
    Matrix m_;
};

/// e^{-iHt} rho e^{+iHt} via eigendecomposition of Hermitian H.
Matrix evolve_exact(const Matrix& h, const Matrix& rho, double t);
DensityMatrix evolve_exact(const Matrix& h, const DensityMatrix& rho, double t);

/// e^{-iHt} for Hermitian H.
Matrix unitary_of(const Matrix& h, double t);

} // namespace dheom
