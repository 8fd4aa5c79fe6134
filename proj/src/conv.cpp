// SPDX-License-Identifier: Apache-2.0
#include "tqt/conv.hpp"

namespace tqt {

ConvSpec conv_spec_for(const DenseTensor& kernel, std::size_t stride, std::size_t pad) {
    if (kernel.order() != 4)
        throw Error(ErrorCode::DimensionMismatch, "kernel must be order-4");
    if (kernel.extent(0) != kernel.extent(1))
        throw Error(ErrorCode::DimensionMismatch, "kernel must be square");
    return ConvSpec{kernel.extent(0), kernel.extent(2), kernel.extent(3), stride, pad};
}

std::size_t conv_output_extent(std::size_t in, std::size_t k, std::size_t stride,
                               std::size_t pad) {
    if (stride < 1) throw Error(ErrorCode::InvalidArgument, "stride must be >= 1");
    const std::size_t padded = in + 2 * pad;
    if (padded < k)
        throw Error(ErrorCode::DimensionMismatch, "kernel larger than padded input");
    return (padded - k) / stride + 1;
}

DenseTensor conv2d_general(const DenseTensor& x, const DenseTensor& w,
                           std::size_t stride_h, std::size_t stride_w,
                           std::size_t pad_h, std::size_t pad_w) {
    if (x.order() != 3)
        throw Error(ErrorCode::DimensionMismatch, "input must be (H,W,S)");
    if (w.order() != 4)
        throw Error(ErrorCode::DimensionMismatch, "kernel must be (Dh,Dw,S,Shat)");
    const std::size_t h = x.extent(0), wid = x.extent(1), s = x.extent(2);
    const std::size_t dh = w.extent(0), dw = w.extent(1);
    const std::size_t s_hat = w.extent(3);
    if (w.extent(2) != s)
        throw Error(ErrorCode::DimensionMismatch, "channel counts disagree");

    const std::size_t out_h = conv_output_extent(h, dh, stride_h, pad_h);
    const std::size_t out_w = conv_output_extent(wid, dw, stride_w, pad_w);

    DenseTensor y({out_h, out_w, s_hat});
    const double* xd = x.data();
    const double* wd = w.data();
    double* yd = y.data();

    for (std::size_t oh = 0; oh < out_h; ++oh) {
        for (std::size_t ow = 0; ow < out_w; ++ow) {
            double* ycell = yd + (oh * out_w + ow) * s_hat;
            for (std::size_t i = 0; i < dh; ++i) {
                const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh * stride_h + i) -
                                          static_cast<std::ptrdiff_t>(pad_h);
                if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(h)) continue;
                for (std::size_t j = 0; j < dw; ++j) {
                    const std::ptrdiff_t iw =
                        static_cast<std::ptrdiff_t>(ow * stride_w + j) -
                        static_cast<std::ptrdiff_t>(pad_w);
                    if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(wid)) continue;
                    const double* xcell = xd + (static_cast<std::size_t>(ih) * wid +
                                                static_cast<std::size_t>(iw)) * s;
                    const double* wcell = wd + (i * dw + j) * s * s_hat;
                    for (std::size_t c = 0; c < s; ++c) {
                        const double xv = xcell[c];
                        if (xv == 0.0) continue;
                        const double* wrow = wcell + c * s_hat;
                        for (std::size_t f = 0; f < s_hat; ++f)
                            ycell[f] += xv * wrow[f];
                    }
                }
            }
        }
    }
    return y;
}

DenseTensor conv2d_direct(const DenseTensor& x, const DenseTensor& w,
                          std::size_t stride, std::size_t pad) {
    return conv2d_general(x, w, stride, stride, pad, pad);
}

DenseTensor conv2d_tucker(const DenseTensor& x, const PartialTucker2& f,
                          std::size_t stride, std::size_t pad) {
    if (x.order() != 3)
        throw Error(ErrorCode::DimensionMismatch, "input must be (H,W,S)");
    if (f.u3.rows() != x.extent(2))
        throw Error(ErrorCode::DimensionMismatch, "u3 rows must equal input channels");

    // Pointwise u3: (H,W,S) -> (H,W,R3); kernel (1,1,S,R3) shares u3's layout.
    DenseTensor k1({1, 1, f.u3.rows(), f.u3.cols()}, f.u3.values());
    DenseTensor y1 = conv2d_general(x, k1, 1, 1, 0, 0);

    // Core convolution carries the stride and padding.
    DenseTensor y2 = conv2d_general(y1, f.core, stride, stride, pad, pad);

    // Pointwise u4: (Hhat,What,R4) -> (Hhat,What,Shat); kernel is u4^T.
    DenseMatrix u4t = transpose(f.u4);
    DenseTensor k3({1, 1, u4t.rows(), u4t.cols()}, u4t.values());
    return conv2d_general(y2, k3, 1, 1, 0, 0);
}

std::uint64_t count_macs_full(const ConvSpec& spec,
                              std::pair<std::size_t, std::size_t> input_hw) {
    const std::uint64_t out_h =
        conv_output_extent(input_hw.first, spec.d, spec.stride, spec.pad);
    const std::uint64_t out_w =
        conv_output_extent(input_hw.second, spec.d, spec.stride, spec.pad);
    return static_cast<std::uint64_t>(spec.d) * spec.d * spec.s * spec.s_hat * out_h *
           out_w;
}

std::uint64_t count_macs_tucker(const ConvSpec& spec,
                                std::pair<std::size_t, std::size_t> input_hw,
                                std::size_t r3, std::size_t r4) {
    const std::uint64_t out_h =
        conv_output_extent(input_hw.first, spec.d, spec.stride, spec.pad);
    const std::uint64_t out_w =
        conv_output_extent(input_hw.second, spec.d, spec.stride, spec.pad);
    const std::uint64_t out_hw = out_h * out_w;
    const std::uint64_t in_hw =
        static_cast<std::uint64_t>(input_hw.first) * input_hw.second;
    return static_cast<std::uint64_t>(spec.s) * r3 * in_hw +
           static_cast<std::uint64_t>(spec.d) * spec.d * r3 * r4 * out_hw +
           static_cast<std::uint64_t>(spec.s_hat) * r4 * out_hw;
}

double macs_compression_ratio(const ConvSpec& spec,
                              std::pair<std::size_t, std::size_t> input_hw,
                              std::size_t r3, std::size_t r4) {
    const std::size_t out_h =
        conv_output_extent(input_hw.first, spec.d, spec.stride, spec.pad);
    const std::size_t out_w =
        conv_output_extent(input_hw.second, spec.d, spec.stride, spec.pad);
    return macs_compression_ratio(spec.d, spec.s, spec.s_hat, input_hw,
                                  {out_h, out_w}, r3, r4);
}

}  // namespace tqt
