// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

#include "tqt/tensor.hpp"

namespace tqt {

enum class QuantScheme {
    PerTensorSymmetric,
    PerFilterSymmetric,
    Quantile,
};

/// Threshold/step state for simulated fixed-point weight quantization.
///
/// Signed levels span [-2^(N-1), 2^(N-1)-1] with step s = T / (2^(N-1)-1).
/// An all-zero tensor is legal: the step is reported as 0 together with
/// zero_threshold, and the quantizer maps everything to zero.
struct QuantParams {
    int bits = 8;
    QuantScheme scheme = QuantScheme::PerTensorSymmetric;
    double quantile = 1.0;
    std::vector<double> thresholds;  // one entry, or one per output filter
    std::vector<double> steps;
    bool signed_levels = true;
    bool zero_threshold = false;
};

double weight_threshold_per_tensor(const DenseTensor& w);

/// Per-filter max-abs thresholds over the first three modes of a
/// (D,D,S,Shat) kernel; result has length Shat.
std::vector<double> weight_threshold_per_filter(const DenseTensor& w);

/// q-quantile of the |entry| distribution, lower interpolation: sorted
/// |entries| at index ceil(q*n)-1. q = 1 reduces to max-abs.
double weight_threshold_quantile(const DenseTensor& w, double q);

QuantParams make_weight_params(const DenseTensor& w, int bits, QuantScheme scheme,
                               double quantile = 1.0);

/// W^Q = Clamp(round(W/s), -2^(N-1), 2^(N-1)-1) * s, round-half-to-even.
DenseTensor quantize_weights(const DenseTensor& w, const QuantParams& p);

/// Per-column symmetric quantization of a factor matrix (columns play the
/// filter role after factorization).
DenseMatrix quantize_matrix_per_column(const DenseMatrix& m, int bits);

struct ActivationRange {
    double t_left = 0.0;
    double t_right = 0.0;
    bool nonnegative = true;
};

ActivationRange activation_range(const DenseTensor& x);

/// Unsigned levels [0, 2^N-1] when the range is nonnegative, signed levels
/// otherwise; step s = (t_right - t_left) / (levels - 1).
DenseTensor quantize_activations(const DenseTensor& x, const ActivationRange& range,
                                 int bits);

/// Re-estimates the range from x itself (per-batch mode); the three-argument
/// form is the static calibrated mode.
DenseTensor quantize_activations(const DenseTensor& x, int bits);

/// Straight-through estimator: upstream gradient masked by the indicator of
/// [t_left, t_right], boundaries inclusive.
DenseTensor ste_backward(const DenseTensor& upstream_grad, const DenseTensor& x,
                         const ActivationRange& range);

/// Grid search for the quantile minimizing a user metric of (w, quantized w).
double best_quantile(const DenseTensor& w, int bits,
                     const std::function<double(const DenseTensor&, const DenseTensor&)>& metric,
                     const std::vector<double>& grid = {0.95, 0.99, 0.995, 1.0});

}  // namespace tqt
