#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "dheom/matrix.hpp"

namespace testutil {

using dheom::Complex;
using dheom::Matrix;

inline Matrix sigma_x() {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = 1.0;
    m(1, 0) = 1.0;
    return m;
}

inline Matrix sigma_y() {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = Complex(0, -1);
    m(1, 0) = Complex(0, 1);
    return m;
}

inline Matrix sigma_z() {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    return m;
}

inline Matrix plus_state() {
    Matrix m(2, 2);
    m << 0.5, 0.5, 0.5, 0.5;
    return m;
}

inline Matrix random_hermitian(std::mt19937_64& rng, int d, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix m(d, d);
    for (int i = 0; i < d; ++i) {
        m(i, i) = scale * n(rng);
        for (int j = i + 1; j < d; ++j) {
            Complex z(scale * n(rng), scale * n(rng));
            m(i, j) = z;
            m(j, i) = std::conj(z);
        }
    }
    return m;
}

inline Matrix random_complex(std::mt19937_64& rng, int d) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = Complex(n(rng), n(rng));
    return m;
}

inline Matrix random_density(std::mt19937_64& rng, int d) {
    Matrix g = random_complex(rng, d);
    Matrix m = g * g.adjoint();
    m /= m.trace();
    return dheom::hermitian_part(m);
}

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on P_n).
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 0; k < n; ++k) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k + 1.0) * z * p1 - k * p2) / (k + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
}

} // namespace testutil
