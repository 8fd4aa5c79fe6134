// SPDX-License-Identifier: Apache-2.0
#include "tqt/tucker.hpp"

#include <algorithm>
#include <cmath>

#include "tqt/svd.hpp"

namespace tqt {

namespace {

struct MaskedHooi {
    std::vector<DenseMatrix> factors;  // identity-sized factors for masked-off modes
    std::vector<double> error_history;
};

// Leading left singular vectors of m, padded with orthonormal completion
// columns when the requested rank exceeds min(rows, cols). A mode rank may
// legitimately exceed the number of available fibers (e.g. the mode-3 rank of
// a (1,1,S,Shat) kernel can be asked to exceed Shat); the extra directions
// carry no energy but keep the factor shape and orthonormality.
DenseMatrix leading_left_vectors(const DenseMatrix& m, std::size_t rank) {
    const std::size_t k = std::min({rank, m.rows(), m.cols()});
    DenseMatrix u = truncated_svd(m, k).u;
    if (k == rank) return u;

    DenseMatrix out(m.rows(), rank);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < k; ++j) out(i, j) = u(i, j);

    for (std::size_t j = k; j < rank; ++j) {
        // Gram-Schmidt a standard basis vector against the columns so far
        // (two passes for numerical safety).
        for (std::size_t seed = 0; seed < m.rows(); ++seed) {
            std::vector<double> v(m.rows(), 0.0);
            v[seed] = 1.0;
            for (int pass = 0; pass < 2; ++pass)
                for (std::size_t c = 0; c < j; ++c) {
                    double dot = 0.0;
                    for (std::size_t i = 0; i < m.rows(); ++i) dot += out(i, c) * v[i];
                    for (std::size_t i = 0; i < m.rows(); ++i) v[i] -= dot * out(i, c);
                }
            double norm = 0.0;
            for (double x : v) norm += x * x;
            norm = std::sqrt(norm);
            if (norm > 1e-8) {
                for (std::size_t i = 0; i < m.rows(); ++i) out(i, j) = v[i] / norm;
                break;
            }
        }
    }
    return out;
}

// HOOI over the modes selected in `compress`; untouched modes keep identity
// factors. HOSVD initialization, ascending mode sweep order.
MaskedHooi hooi_masked(const DenseTensor& t, const std::vector<std::size_t>& rank,
                       const std::vector<bool>& compress, int max_iters, double tol) {
    const std::size_t n = t.order();
    if (rank.size() != n || compress.size() != n)
        throw Error(ErrorCode::DimensionMismatch, "rank list must match tensor order");
    if (max_iters < 1)
        throw Error(ErrorCode::InvalidArgument, "max_iters must be >= 1");
    for (std::size_t k = 0; k < n; ++k) {
        if (rank[k] < 1 || rank[k] > t.extent(k))
            throw Error(ErrorCode::RankOutOfRange,
                        "rank must be in [1, extent] for every mode");
        if (!compress[k] && rank[k] != t.extent(k))
            throw Error(ErrorCode::InvalidArgument,
                        "masked-off mode must keep full extent");
    }

    MaskedHooi out;
    out.factors.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (compress[k])
            out.factors[k] = leading_left_vectors(mode_unfold(t, k), rank[k]);
        else
            out.factors[k] = DenseMatrix::identity(t.extent(k));
    }

    const double t_norm_sq = frobenius_norm(t) * frobenius_norm(t);
    auto current_error = [&]() {
        DenseTensor core = t;
        for (std::size_t k = 0; k < n; ++k)
            if (compress[k]) core = mode_product(core, transpose(out.factors[k]), k);
        const double core_norm = frobenius_norm(core);
        // Pythagoras under orthonormal factors.
        return std::sqrt(std::max(0.0, t_norm_sq - core_norm * core_norm));
    };

    out.error_history.push_back(current_error());
    const double t_norm = std::sqrt(t_norm_sq);

    for (int iter = 0; iter < max_iters; ++iter) {
        for (std::size_t mode = 0; mode < n; ++mode) {
            if (!compress[mode]) continue;
            DenseTensor projected = t;
            for (std::size_t k = 0; k < n; ++k) {
                if (k == mode || !compress[k]) continue;
                projected = mode_product(projected, transpose(out.factors[k]), k);
            }
            out.factors[mode] = leading_left_vectors(mode_unfold(projected, mode), rank[mode]);
        }
        const double err = current_error();
        const double prev = out.error_history.back();
        out.error_history.push_back(err);
        if (err <= 1e-14 * t_norm) break;
        if (prev - err < tol * std::max(prev, 1e-300)) break;
    }
    return out;
}

}  // namespace

HooiResult hooi(const DenseTensor& t, const std::vector<std::size_t>& rank,
                int max_iters, double tol) {
    std::vector<bool> compress(t.order(), true);
    MaskedHooi m = hooi_masked(t, rank, compress, max_iters, tol);

    HooiResult out;
    out.error_history = std::move(m.error_history);
    out.factors.rank = rank;
    out.factors.factors = std::move(m.factors);
    DenseTensor core = t;
    for (std::size_t k = 0; k < t.order(); ++k)
        core = mode_product(core, transpose(out.factors.factors[k]), k);
    out.factors.core = std::move(core);
    return out;
}

DenseTensor reconstruct(const TuckerFactors& f) {
    return multilinear_product(f.core, f.factors);
}

PartialTuckerResult partial_tucker2(const DenseTensor& kernel, std::size_t r3,
                                    std::size_t r4, int max_iters, double tol) {
    if (kernel.order() != 4)
        throw Error(ErrorCode::DimensionMismatch, "kernel must be order-4");
    std::vector<std::size_t> rank = {kernel.extent(0), kernel.extent(1), r3, r4};
    std::vector<bool> compress = {false, false, true, true};
    MaskedHooi m = hooi_masked(kernel, rank, compress, max_iters, tol);

    PartialTuckerResult out;
    out.error_history = std::move(m.error_history);
    out.factors.u3 = std::move(m.factors[2]);
    out.factors.u4 = std::move(m.factors[3]);
    DenseTensor core = mode_product(kernel, transpose(out.factors.u3), 2);
    core = mode_product(core, transpose(out.factors.u4), 3);
    out.factors.core = std::move(core);
    return out;
}

DenseTensor reconstruct(const PartialTucker2& f) {
    DenseTensor t = mode_product(f.core, f.u3, 2);
    return mode_product(t, f.u4, 3);
}

double tucker_compression_ratio(const std::vector<std::size_t>& shape,
                                const std::vector<std::size_t>& rank) {
    if (shape.size() != rank.size())
        throw Error(ErrorCode::DimensionMismatch, "shape/rank length mismatch");
    double numer = 1.0, core = 1.0, factors = 0.0;
    for (std::size_t k = 0; k < shape.size(); ++k) {
        if (rank[k] > shape[k])
            throw Error(ErrorCode::RankOutOfRange, "rank exceeds extent");
        numer *= static_cast<double>(shape[k]);
        core *= static_cast<double>(rank[k]);
        factors += static_cast<double>(shape[k]) * static_cast<double>(rank[k]);
    }
    return numer / (core + factors);
}

double param_compression_ratio(std::size_t d, std::size_t s, std::size_t s_hat,
                               std::size_t r3, std::size_t r4) {
    const double dd = static_cast<double>(d) * static_cast<double>(d);
    const double numer = dd * static_cast<double>(s) * static_cast<double>(s_hat);
    const double denom = dd * static_cast<double>(r3) * static_cast<double>(r4) +
                         static_cast<double>(s) * static_cast<double>(r3) +
                         static_cast<double>(s_hat) * static_cast<double>(r4);
    return numer / denom;
}

double macs_compression_ratio(std::size_t d, std::size_t s, std::size_t s_hat,
                              std::pair<std::size_t, std::size_t> input_hw,
                              std::pair<std::size_t, std::size_t> output_hw,
                              std::size_t r3, std::size_t r4) {
    const double dd = static_cast<double>(d) * static_cast<double>(d);
    const double hw = static_cast<double>(input_hw.first) *
                      static_cast<double>(input_hw.second);
    const double ohw = static_cast<double>(output_hw.first) *
                       static_cast<double>(output_hw.second);
    const double numer = dd * static_cast<double>(s) * static_cast<double>(s_hat);
    const double denom = dd * static_cast<double>(r3) * static_cast<double>(r4) +
                         static_cast<double>(s) * static_cast<double>(r3) * (hw / ohw) +
                         static_cast<double>(s_hat) * static_cast<double>(r4);
    return numer / denom;
}

}  // namespace tqt
