// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "tqt/tensor.hpp"
#include "tqt/tucker.hpp"

namespace tqt {

/// Square D x D kernel with S input and Shat output channels.
struct ConvSpec {
    std::size_t d = 1;
    std::size_t s = 1;
    std::size_t s_hat = 1;
    std::size_t stride = 1;
    std::size_t pad = 0;
};

ConvSpec conv_spec_for(const DenseTensor& kernel, std::size_t stride, std::size_t pad);

/// Output extent floor((in + 2 pad - k)/stride) + 1; throws if nonpositive.
std::size_t conv_output_extent(std::size_t in, std::size_t k, std::size_t stride,
                               std::size_t pad);

/// Direct 2-D convolution, channels-last. x: (H,W,S), w: (Dh,Dw,S,Shat),
/// zero padding; output (Hhat,What,Shat). Kernels may be non-square and
/// stride/padding may differ per axis (used by the separable baselines).
DenseTensor conv2d_general(const DenseTensor& x, const DenseTensor& w,
                           std::size_t stride_h, std::size_t stride_w,
                           std::size_t pad_h, std::size_t pad_w);

DenseTensor conv2d_direct(const DenseTensor& x, const DenseTensor& w,
                          std::size_t stride, std::size_t pad);

/// Three-stage factorized convolution: pointwise u3, core convolution
/// (carrying the stride and padding), pointwise u4.
DenseTensor conv2d_tucker(const DenseTensor& x, const PartialTucker2& f,
                          std::size_t stride, std::size_t pad);

std::uint64_t count_macs_full(const ConvSpec& spec,
                              std::pair<std::size_t, std::size_t> input_hw);

/// S R3 HW + D^2 R3 R4 HhatWhat + Shat R4 HhatWhat
std::uint64_t count_macs_tucker(const ConvSpec& spec,
                                std::pair<std::size_t, std::size_t> input_hw,
                                std::size_t r3, std::size_t r4);

inline double param_compression_ratio(const ConvSpec& spec, std::size_t r3,
                                      std::size_t r4) {
    return param_compression_ratio(spec.d, spec.s, spec.s_hat, r3, r4);
}

double macs_compression_ratio(const ConvSpec& spec,
                              std::pair<std::size_t, std::size_t> input_hw,
                              std::size_t r3, std::size_t r4);

}  // namespace tqt
