// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "tqt/tensor.hpp"

namespace tqt {

struct TuckerFactors {
    DenseTensor core;                  // shape = rank
    std::vector<DenseMatrix> factors;  // factor n: extent(n) x rank[n], orthonormal columns
    std::vector<std::size_t> rank;
};

struct HooiResult {
    TuckerFactors factors;
    // error_history[0] is the HOSVD-initialization error; one entry per sweep after that.
    std::vector<double> error_history;
};

/// Best rank-(R1..RN) approximation by higher-order orthogonal iteration,
/// initialized with HOSVD. Stops when the relative improvement of the
/// reconstruction error drops below tol or after max_iters sweeps.
HooiResult hooi(const DenseTensor& t, const std::vector<std::size_t>& rank,
                int max_iters = 50, double tol = 1e-6);

DenseTensor reconstruct(const TuckerFactors& f);

/// Rank-(R3,R4) Tucker factors of a (D,D,S,Shat) convolution kernel;
/// spatial modes are left uncompressed.
struct PartialTucker2 {
    DenseTensor core;  // (D,D,R3,R4)
    DenseMatrix u3;    // S x R3
    DenseMatrix u4;    // Shat x R4
};

struct PartialTuckerResult {
    PartialTucker2 factors;
    std::vector<double> error_history;
};

PartialTuckerResult partial_tucker2(const DenseTensor& kernel, std::size_t r3,
                                    std::size_t r4, int max_iters = 50,
                                    double tol = 1e-6);

DenseTensor reconstruct(const PartialTucker2& f);

/// C = prod(I) / (prod(R) + sum(I_n R_n))
double tucker_compression_ratio(const std::vector<std::size_t>& shape,
                                const std::vector<std::size_t>& rank);

/// P = D^2 S Shat / (D^2 R3 R4 + S R3 + Shat R4)
double param_compression_ratio(std::size_t d, std::size_t s, std::size_t s_hat,
                               std::size_t r3, std::size_t r4);

/// M = D^2 S Shat / (D^2 R3 R4 + S R3 HW/(HhatWhat) + Shat R4)
double macs_compression_ratio(std::size_t d, std::size_t s, std::size_t s_hat,
                              std::pair<std::size_t, std::size_t> input_hw,
                              std::pair<std::size_t, std::size_t> output_hw,
                              std::size_t r3, std::size_t r4);

}  // namespace tqt
