// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "tqt/tensor.hpp"

namespace tqt {

/// Rank-R split of the D^2 S x Shat kernel unfolding: a D x D convolution to
/// R channels followed by a pointwise mixing matrix.
struct SvdFactorPair {
    DenseTensor w1;  // (D,D,S,R)
    DenseMatrix w2;  // (R,Shat)
};

SvdFactorPair reshape_svd_factorize(const DenseTensor& w, std::size_t r);
DenseTensor reconstruct(const SvdFactorPair& f);
DenseTensor reshape_svd_apply(const DenseTensor& x, const SvdFactorPair& f,
                              std::size_t stride, std::size_t pad);

/// Rank-R split of the DS x DShat reshaping: a vertical D x 1 convolution
/// followed by a horizontal 1 x D convolution.
struct SpatialSvdPair {
    DenseTensor w_vert;  // (S,D,R)
    DenseTensor w_horz;  // (R,Shat,D)
};

SpatialSvdPair spatial_svd_factorize(const DenseTensor& w, std::size_t r);
DenseTensor reconstruct(const SpatialSvdPair& f);
DenseTensor spatial_svd_apply(const DenseTensor& x, const SpatialSvdPair& f,
                              std::size_t stride, std::size_t pad);

/// TT-SVD cores of the kernel reordered to (S,D,D,Shat).
struct TTFactors {
    DenseMatrix g1;  // (S,R1)
    DenseTensor g2;  // (R1,D,R2)
    DenseTensor g3;  // (R2,D,R3)
    DenseMatrix g4;  // (R3,Shat)
};

TTFactors tt_factorize(const DenseTensor& w, const std::array<std::size_t, 3>& ranks);
/// Reconstruction in the original (D,D,S,Shat) layout.
DenseTensor reconstruct(const TTFactors& f);
DenseTensor tt_apply(const DenseTensor& x, const TTFactors& f, std::size_t stride,
                     std::size_t pad);

struct ChannelSelection {
    std::vector<double> beta;      // length S, zero outside kept
    std::vector<std::size_t> kept;
    DenseTensor refit_w;           // pruned kernel (zeroed dropped channels)
    double objective = 0.0;
    double lambda = 0.0;
    bool converged = true;
};

/// Lasso channel pruning: ISTA on ||Y - sum_i beta_i X_i W_i^T||_F^2 +
/// lambda ||beta||_1 with unit-norm channels, lambda bisected until at most
/// `budget` channels survive, survivors refit by least squares.
///
/// x_samples: (n, S, d^2) stack of sampled input patches; y: (n, Shat).
ChannelSelection channel_prune_lasso(const DenseTensor& x_samples, const DenseTensor& w,
                                     const DenseMatrix& y, std::size_t budget,
                                     double lambda = -1.0, int max_iters = 5000,
                                     double tol = 1e-8);

enum class BaselineMethod { ReshapeSvd, SpatialSvd, TensorTrain, ChannelPrune };

std::uint64_t baseline_param_count(BaselineMethod method, std::size_t d, std::size_t s,
                                   std::size_t s_hat,
                                   const std::vector<std::size_t>& ranks);

}  // namespace tqt
