// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "tqt/tensor.hpp"

namespace tqt {

struct SvdResult {
    DenseMatrix u;                        // rows x rank, orthonormal columns
    std::vector<double> singular_values;  // nonnegative, non-increasing
    DenseMatrix v;                        // cols x rank, orthonormal columns
};

/// Rank-r truncated SVD via one-sided Jacobi rotations.
///
/// Deterministic: columns are sorted by singular value and each left singular
/// vector is signed so its largest-magnitude entry is positive.
SvdResult truncated_svd(const DenseMatrix& m, std::size_t rank);

}  // namespace tqt
