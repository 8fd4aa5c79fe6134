// SPDX-License-Identifier: Apache-2.0
#include "tqt/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tqt {

namespace {

// One-sided (Hestenes) Jacobi SVD of a tall matrix a (rows >= cols).
// On return the columns of a are mutually orthogonal; v accumulates the
// right rotations.
void jacobi_orthogonalize(DenseMatrix& a, DenseMatrix& v) {
    const std::size_t rows = a.rows();
    const std::size_t cols = a.cols();
    const int max_sweeps = 60;
    const double tol = 1e-15;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double max_off = 0.0;
        for (std::size_t p = 0; p + 1 < cols; ++p) {
            for (std::size_t q = p + 1; q < cols; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t i = 0; i < rows; ++i) {
                    const double ap = a(i, p), aq = a(i, q);
                    alpha += ap * ap;
                    beta += aq * aq;
                    gamma += ap * aq;
                }
                const double denom = std::sqrt(alpha * beta);
                if (denom > 0.0) max_off = std::max(max_off, std::abs(gamma) / denom);
                if (std::abs(gamma) <= tol * denom || gamma == 0.0) continue;

                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < rows; ++i) {
                    const double ap = a(i, p), aq = a(i, q);
                    a(i, p) = c * ap - s * aq;
                    a(i, q) = s * ap + c * aq;
                }
                for (std::size_t i = 0; i < cols; ++i) {
                    const double vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        }
        if (max_off < 1e-14) break;
    }
}

// Replaces column k of u with a unit vector orthogonal to columns [0, k);
// used when a requested singular triplet lies in the null space.
void fill_orthonormal_column(DenseMatrix& u, std::size_t k) {
    const std::size_t rows = u.rows();
    for (std::size_t seed = 0; seed < rows; ++seed) {
        std::vector<double> cand(rows, 0.0);
        cand[seed] = 1.0;
        for (std::size_t j = 0; j < k; ++j) {
            double dot = 0.0;
            for (std::size_t i = 0; i < rows; ++i) dot += cand[i] * u(i, j);
            for (std::size_t i = 0; i < rows; ++i) cand[i] -= dot * u(i, j);
        }
        double norm = 0.0;
        for (double x : cand) norm += x * x;
        norm = std::sqrt(norm);
        if (norm > 1e-8) {
            for (std::size_t i = 0; i < rows; ++i) u(i, k) = cand[i] / norm;
            return;
        }
    }
    throw Error(ErrorCode::Internal, "orthonormal completion failed");
}

SvdResult svd_tall(const DenseMatrix& m, std::size_t rank) {
    DenseMatrix a = m;
    DenseMatrix v = DenseMatrix::identity(m.cols());
    jacobi_orthogonalize(a, v);

    const std::size_t cols = m.cols();
    std::vector<double> sigma(cols, 0.0);
    for (std::size_t j = 0; j < cols; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) acc += a(i, j) * a(i, j);
        sigma[j] = std::sqrt(acc);
    }

    std::vector<std::size_t> order(cols);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

    // Columns with numerically zero singular value get an orthonormal
    // completion instead of a normalized (garbage-direction) column.
    const double scale = *std::max_element(sigma.begin(), sigma.end());
    const double tiny = scale * 1e-13;

    SvdResult out;
    out.u = DenseMatrix(m.rows(), rank);
    out.v = DenseMatrix(cols, rank);
    out.singular_values.resize(rank);
    for (std::size_t k = 0; k < rank; ++k) {
        const std::size_t j = order[k];
        out.singular_values[k] = sigma[j];
        if (sigma[j] > tiny && sigma[j] > 0.0) {
            for (std::size_t i = 0; i < m.rows(); ++i)
                out.u(i, k) = a(i, j) / sigma[j];
        } else {
            fill_orthonormal_column(out.u, k);
        }
        for (std::size_t i = 0; i < cols; ++i) out.v(i, k) = v(i, j);
    }

    // Sign convention: largest-magnitude entry of each left vector positive.
    for (std::size_t k = 0; k < rank; ++k) {
        std::size_t arg = 0;
        double best = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            if (std::abs(out.u(i, k)) > best) {
                best = std::abs(out.u(i, k));
                arg = i;
            }
        }
        if (out.u(arg, k) < 0.0) {
            for (std::size_t i = 0; i < m.rows(); ++i) out.u(i, k) = -out.u(i, k);
            for (std::size_t i = 0; i < cols; ++i) out.v(i, k) = -out.v(i, k);
        }
    }
    return out;
}

}  // namespace

SvdResult truncated_svd(const DenseMatrix& m, std::size_t rank) {
    if (m.rows() == 0 || m.cols() == 0)
        throw Error(ErrorCode::InvalidArgument, "empty matrix");
    if (rank < 1 || rank > std::min(m.rows(), m.cols()))
        throw Error(ErrorCode::RankOutOfRange, "rank must be in [1, min(rows, cols)]");

    if (m.rows() >= m.cols()) return svd_tall(m, rank);

    SvdResult t = svd_tall(transpose(m), rank);
    SvdResult out;
    out.u = std::move(t.v);
    out.v = std::move(t.u);
    out.singular_values = std::move(t.singular_values);
    return out;
}

}  // namespace tqt
