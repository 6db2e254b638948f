#pragma once

#include <cmath>
#include <complex>
#include <random>

#include "cqed/qstate.hpp"

namespace cqed::testkit {

/// Haar-ish random unitary: QR of a complex Gaussian matrix with the phases of
/// R's diagonal folded back in.
inline Matrix random_unitary(Eigen::Index n, std::mt19937_64& gen) {
    std::normal_distribution<double> normal;
    Matrix z(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) z(i, j) = cplx(normal(gen), normal(gen));
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < n; ++j) {
        const cplx d = r(j, j);
        q.col(j) *= d / std::abs(d);
    }
    return q;
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& gen) {
    std::normal_distribution<double> normal;
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = cplx(normal(gen), normal(gen));
    return m;
}

/// Random full-rank density matrix G G^dag / tr.
inline DensityMatrix random_density(const HilbertLayout& layout, std::mt19937_64& gen) {
    const auto d = static_cast<Eigen::Index>(layout.total_dim());
    const Matrix g = random_matrix(d, d, gen);
    Matrix rho = g * g.adjoint();
    rho /= rho.trace();
    return DensityMatrix(layout, rho);
}

inline StateVector random_state(const HilbertLayout& layout, std::mt19937_64& gen) {
    const auto d = static_cast<Eigen::Index>(layout.total_dim());
    Vector v = random_matrix(d, 1, gen).col(0);
    return StateVector(layout, v / v.norm(), true);
}

}  // namespace cqed::testkit
