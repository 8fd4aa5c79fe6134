// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tqt/error.hpp"

namespace tqt {

/// Dense order-N real tensor, row-major (last index varies fastest).
class DenseTensor {
public:
    DenseTensor() = default;

    explicit DenseTensor(std::vector<std::size_t> shape);
    DenseTensor(std::vector<std::size_t> shape, std::vector<double> data);

    std::size_t order() const { return shape_.size(); }
    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t extent(std::size_t mode) const;
    std::size_t size() const { return data_.size(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double operator[](std::size_t i) const { return data_[i]; }
    double& operator[](std::size_t i) { return data_[i]; }

    double at(std::span<const std::size_t> idx) const { return data_[offset(idx)]; }
    double& at(std::span<const std::size_t> idx) { return data_[offset(idx)]; }
    double at(std::initializer_list<std::size_t> idx) const {
        return at(std::span<const std::size_t>(idx.begin(), idx.size()));
    }
    double& at(std::initializer_list<std::size_t> idx) {
        return at(std::span<const std::size_t>(idx.begin(), idx.size()));
    }

    std::size_t offset(std::span<const std::size_t> idx) const;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

/// Dense real matrix, row-major.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    static DenseMatrix identity(std::size_t n);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

DenseMatrix transpose(const DenseMatrix& m);
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

// Mode indices are 0-based throughout.
//
// Unfolding convention: mode-n fibers become columns; the remaining modes
// index the columns with the lowest-numbered mode varying fastest.
DenseMatrix mode_unfold(const DenseTensor& t, std::size_t mode);
DenseTensor mode_fold(const DenseMatrix& m, std::size_t mode,
                      const std::vector<std::size_t>& shape);

/// c = t x_mode b, contracting extent(mode) against cols(b).
DenseTensor mode_product(const DenseTensor& t, const DenseMatrix& b, std::size_t mode);

/// Full multilinear product: core multiplied by one factor per mode.
DenseTensor multilinear_product(const DenseTensor& core,
                                const std::vector<DenseMatrix>& factors);

double frobenius_norm(const DenseTensor& t);
double frobenius_norm(const DenseMatrix& m);

/// View a matrix as an order-2 tensor (same row-major data).
DenseTensor matrix_as_tensor(const DenseMatrix& m);
DenseMatrix tensor_as_matrix(const DenseTensor& t);

}  // namespace tqt
