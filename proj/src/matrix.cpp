#include "dheom/matrix.hpp"

#include <Eigen/Eigenvalues>

namespace dheom {

namespace {
constexpr double kConstructTol = 1e-12;
constexpr double kPsdTol = 1e-10;
} // namespace

double max_abs(const Matrix& m) {
    return m.cwiseAbs().maxCoeff();
}

double hermiticity_defect(const Matrix& m) {
    return max_abs(m - m.adjoint());
}

Matrix hermitian_part(const Matrix& m) {
    return 0.5 * (m + m.adjoint().eval());
}

double spectral_norm_hermitian(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_finite(const Matrix& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag()))
                return false;
    return true;
}

Matrix commutator(const Matrix& a, const Matrix& x) {
    if (a.rows() != a.cols() || x.rows() != x.cols() || a.rows() != x.rows())
        fail("DimensionMismatch", "commutator requires equal square matrices");
    return a * x - x * a;
}

Vector vectorize(const Matrix& m) {
    return Eigen::Map<const Vector>(m.data(), m.size());
}

Matrix devectorize(const Vector& v, int dim) {
    if (static_cast<Eigen::Index>(dim) * dim != v.size())
        fail("DimensionMismatch", "devectorize: length is not dim^2");
    return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

Matrix liouvillian_matrix(const Matrix& h) {
    if (h.rows() != h.cols())
        fail("DimensionMismatch", "liouvillian_matrix requires a square matrix");
    const auto d = h.rows();
    Matrix id = Matrix::Identity(d, d);
    Matrix l = Matrix::Zero(d * d, d * d);
    // kron(I, H) - kron(H^T, I)
    for (Eigen::Index bi = 0; bi < d; ++bi)
        for (Eigen::Index bj = 0; bj < d; ++bj) {
            l.block(bi * d, bj * d, d, d) =
                (bi == bj ? h : Matrix::Zero(d, d).eval()) - h(bj, bi) * id;
        }
    return l;
}

DensityMatrix::DensityMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() < 1)
        fail("DimensionMismatch", "density matrix must be square, dim >= 1");
    if (!is_finite(m_))
        fail("NotDensityMatrix", "density matrix has non-finite entries");
    if (hermiticity_defect(m_) > kConstructTol)
        fail("NotDensityMatrix", "density matrix is not Hermitian");
    if (std::abs(m_.trace() - Complex(1.0)) > kConstructTol)
        fail("NotDensityMatrix", "density matrix trace differs from 1");
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kPsdTol)
        fail("NotDensityMatrix", "density matrix is not positive semidefinite");
}

Matrix unitary_of(const Matrix& h, double t) {
    if (hermiticity_defect(h) > 1e-10)
        fail("NotHermitian", "evolve_exact requires a Hermitian Hamiltonian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    Vector phases(h.rows());
    for (Eigen::Index k = 0; k < h.rows(); ++k)
        phases(k) = std::exp(Complex(0.0, -es.eigenvalues()(k) * t));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Matrix evolve_exact(const Matrix& h, const Matrix& rho, double t) {
    Matrix u = unitary_of(h, t);
    return u * rho * u.adjoint();
}

DensityMatrix evolve_exact(const Matrix& h, const DensityMatrix& rho, double t) {
    return DensityMatrix(hermitian_part(evolve_exact(h, rho.matrix(), t)));
}

} // namespace dheom
