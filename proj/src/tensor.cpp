// SPDX-License-Identifier: Apache-2.0
#include "tqt/tensor.hpp"

#include <cmath>
#include <numeric>

namespace tqt {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid-argument";
        case ErrorCode::DimensionMismatch: return "dimension-mismatch";
        case ErrorCode::RankOutOfRange: return "rank-out-of-range";
        case ErrorCode::BadMagic: return "bad-magic";
        case ErrorCode::BadVersion: return "bad-version";
        case ErrorCode::TruncatedPayload: return "truncated-payload";
        case ErrorCode::ExtentOverflow: return "extent-overflow";
        case ErrorCode::Io: return "io-error";
        case ErrorCode::Infeasible: return "infeasible";
        case ErrorCode::Internal: return "internal";
    }
    return "unknown";
}

namespace {

std::size_t checked_numel(const std::vector<std::size_t>& shape) {
    if (shape.empty())
        throw Error(ErrorCode::InvalidArgument, "tensor order must be >= 1");
    std::size_t n = 1;
    for (std::size_t e : shape) {
        if (e == 0) throw Error(ErrorCode::InvalidArgument, "extent must be >= 1");
        n *= e;
    }
    return n;
}

}  // namespace

DenseTensor::DenseTensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(checked_numel(shape_), 0.0) {}

DenseTensor::DenseTensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (checked_numel(shape_) != data_.size())
        throw Error(ErrorCode::DimensionMismatch,
                    "data length does not match product of extents");
}

std::size_t DenseTensor::extent(std::size_t mode) const {
    if (mode >= shape_.size())
        throw Error(ErrorCode::InvalidArgument, "mode index out of range");
    return shape_[mode];
}

std::size_t DenseTensor::offset(std::span<const std::size_t> idx) const {
    std::size_t off = 0;
    for (std::size_t k = 0; k < shape_.size(); ++k) off = off * shape_[k] + idx[k];
    return off;
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows_ * cols_ != data_.size())
        throw Error(ErrorCode::DimensionMismatch, "data length != rows*cols");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseMatrix transpose(const DenseMatrix& m) {
    DenseMatrix t(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
    return t;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows())
        throw Error(ErrorCode::DimensionMismatch, "matmul inner extents differ");
    DenseMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

DenseMatrix mode_unfold(const DenseTensor& t, std::size_t mode) {
    const auto& shape = t.shape();
    if (mode >= shape.size())
        throw Error(ErrorCode::InvalidArgument, "mode index out of range");

    const std::size_t n = shape.size();
    std::size_t cols = 1;
    for (std::size_t k = 0; k < n; ++k)
        if (k != mode) cols *= shape[k];

    // Column strides: among the remaining modes the lowest-numbered one
    // varies fastest.
    std::vector<std::size_t> col_stride(n, 0);
    std::size_t stride = 1;
    for (std::size_t k = 0; k < n; ++k) {
        if (k == mode) continue;
        col_stride[k] = stride;
        stride *= shape[k];
    }

    DenseMatrix m(shape[mode], cols);
    std::vector<std::size_t> idx(n, 0);
    for (std::size_t lin = 0; lin < t.size(); ++lin) {
        std::size_t col = 0;
        for (std::size_t k = 0; k < n; ++k)
            if (k != mode) col += idx[k] * col_stride[k];
        m(idx[mode], col) = t[lin];
        // row-major increment: last index fastest
        for (std::size_t k = n; k-- > 0;) {
            if (++idx[k] < shape[k]) break;
            idx[k] = 0;
        }
    }
    return m;
}

DenseTensor mode_fold(const DenseMatrix& m, std::size_t mode,
                      const std::vector<std::size_t>& shape) {
    if (mode >= shape.size())
        throw Error(ErrorCode::InvalidArgument, "mode index out of range");
    std::size_t cols = 1;
    for (std::size_t k = 0; k < shape.size(); ++k)
        if (k != mode) cols *= shape[k];
    if (m.rows() != shape[mode] || m.cols() != cols)
        throw Error(ErrorCode::DimensionMismatch,
                    "matrix dimensions inconsistent with target shape");

    const std::size_t n = shape.size();
    std::vector<std::size_t> col_stride(n, 0);
    std::size_t stride = 1;
    for (std::size_t k = 0; k < n; ++k) {
        if (k == mode) continue;
        col_stride[k] = stride;
        stride *= shape[k];
    }

    DenseTensor t(shape);
    std::vector<std::size_t> idx(n, 0);
    for (std::size_t lin = 0; lin < t.size(); ++lin) {
        std::size_t col = 0;
        for (std::size_t k = 0; k < n; ++k)
            if (k != mode) col += idx[k] * col_stride[k];
        t[lin] = m(idx[mode], col);
        for (std::size_t k = n; k-- > 0;) {
            if (++idx[k] < shape[k]) break;
            idx[k] = 0;
        }
    }
    return t;
}

DenseTensor mode_product(const DenseTensor& t, const DenseMatrix& b, std::size_t mode) {
    if (mode >= t.order())
        throw Error(ErrorCode::InvalidArgument, "mode index out of range");
    if (b.cols() != t.extent(mode))
        throw Error(ErrorCode::DimensionMismatch,
                    "matrix cols must equal the contracted extent");
    DenseMatrix unfolded = mode_unfold(t, mode);
    DenseMatrix result = matmul(b, unfolded);
    std::vector<std::size_t> out_shape = t.shape();
    out_shape[mode] = b.rows();
    return mode_fold(result, mode, out_shape);
}

DenseTensor multilinear_product(const DenseTensor& core,
                                const std::vector<DenseMatrix>& factors) {
    if (factors.size() != core.order())
        throw Error(ErrorCode::DimensionMismatch,
                    "factor count must equal tensor order");
    DenseTensor out = core;
    for (std::size_t n = 0; n < factors.size(); ++n)
        out = mode_product(out, factors[n], n);
    return out;
}

double frobenius_norm(const DenseTensor& t) {
    double acc = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) acc += t[i] * t[i];
    return std::sqrt(acc);
}

double frobenius_norm(const DenseMatrix& m) {
    double acc = 0.0;
    for (double v : m.values()) acc += v * v;
    return std::sqrt(acc);
}

DenseTensor matrix_as_tensor(const DenseMatrix& m) {
    return DenseTensor({m.rows(), m.cols()}, m.values());
}

DenseMatrix tensor_as_matrix(const DenseTensor& t) {
    if (t.order() != 2)
        throw Error(ErrorCode::DimensionMismatch, "tensor is not order-2");
    return DenseMatrix(t.extent(0), t.extent(1), t.values());
}

}  // namespace tqt
