// SPDX-License-Identifier: Apache-2.0
#include "tqt/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tqt {

namespace {

// round-half-to-even; nearbyint honors the default FE_TONEAREST mode
double round_half_even(double x) { return std::nearbyint(x); }

void check_bits(int bits) {
    if (bits < 1 || bits > 8)
        throw Error(ErrorCode::InvalidArgument, "bit-width must be in [1, 8]");
}

double clamp(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

double quantize_value(double x, double step, double level_lo, double level_hi) {
    if (step == 0.0) return 0.0;
    return clamp(round_half_even(x / step), level_lo, level_hi) * step;
}

}  // namespace

double weight_threshold_per_tensor(const DenseTensor& w) {
    if (w.size() == 0) throw Error(ErrorCode::InvalidArgument, "empty tensor");
    double t = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) t = std::max(t, std::abs(w[i]));
    return t;
}

std::vector<double> weight_threshold_per_filter(const DenseTensor& w) {
    if (w.order() != 4)
        throw Error(ErrorCode::DimensionMismatch,
                    "per-filter thresholds need an order-4 kernel");
    const std::size_t s_hat = w.extent(3);
    std::vector<double> t(s_hat, 0.0);
    for (std::size_t i = 0; i < w.size(); ++i) {
        const std::size_t f = i % s_hat;  // mode 4 is the fastest index
        t[f] = std::max(t[f], std::abs(w[i]));
    }
    return t;
}

double weight_threshold_quantile(const DenseTensor& w, double q) {
    if (q <= 0.0 || q > 1.0)
        throw Error(ErrorCode::InvalidArgument, "quantile must be in (0, 1]");
    if (w.size() == 0) throw Error(ErrorCode::InvalidArgument, "empty tensor");
    std::vector<double> mags(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) mags[i] = std::abs(w[i]);
    std::sort(mags.begin(), mags.end());
    // lower interpolation: element at index ceil(q*n) - 1
    const std::size_t idx =
        static_cast<std::size_t>(std::ceil(q * static_cast<double>(mags.size()))) - 1;
    return mags[std::min(idx, mags.size() - 1)];
}

QuantParams make_weight_params(const DenseTensor& w, int bits, QuantScheme scheme,
                               double quantile) {
    check_bits(bits);
    QuantParams p;
    p.bits = bits;
    p.scheme = scheme;
    p.quantile = quantile;
    p.signed_levels = true;

    const double denom = static_cast<double>((1 << (bits - 1)) - 1);
    switch (scheme) {
        case QuantScheme::PerTensorSymmetric:
            p.thresholds = {weight_threshold_per_tensor(w)};
            break;
        case QuantScheme::PerFilterSymmetric:
            p.thresholds = weight_threshold_per_filter(w);
            break;
        case QuantScheme::Quantile:
            p.thresholds = {weight_threshold_quantile(w, quantile)};
            break;
    }
    p.steps.resize(p.thresholds.size());
    bool any_nonzero = false;
    for (std::size_t i = 0; i < p.thresholds.size(); ++i) {
        p.steps[i] = denom > 0.0 ? p.thresholds[i] / denom : 0.0;
        if (p.thresholds[i] > 0.0) any_nonzero = true;
    }
    p.zero_threshold = !any_nonzero;
    return p;
}

DenseTensor quantize_weights(const DenseTensor& w, const QuantParams& p) {
    check_bits(p.bits);
    if (p.steps.empty())
        throw Error(ErrorCode::InvalidArgument, "quant params carry no step");
    const bool per_filter = p.steps.size() > 1;
    if (per_filter) {
        if (w.order() != 4)
            throw Error(ErrorCode::DimensionMismatch,
                        "per-filter params need an order-4 kernel");
        if (p.steps.size() != w.extent(3))
            throw Error(ErrorCode::DimensionMismatch,
                        "per-filter step count must equal the mode-4 extent");
    }
    const double level_lo = -static_cast<double>(1 << (p.bits - 1));
    const double level_hi = static_cast<double>((1 << (p.bits - 1)) - 1);

    DenseTensor out(w.shape());
    const std::size_t s_hat = per_filter ? w.extent(3) : 1;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double step = per_filter ? p.steps[i % s_hat] : p.steps[0];
        if (step == 0.0 && w[i] != 0.0)
            throw Error(ErrorCode::InvalidArgument,
                        "zero quantization step with nonzero weights");
        out[i] = quantize_value(w[i], step, level_lo, level_hi);
    }
    return out;
}

DenseMatrix quantize_matrix_per_column(const DenseMatrix& m, int bits) {
    check_bits(bits);
    const double denom = static_cast<double>((1 << (bits - 1)) - 1);
    const double level_lo = -static_cast<double>(1 << (bits - 1));
    DenseMatrix out(m.rows(), m.cols());
    for (std::size_t j = 0; j < m.cols(); ++j) {
        double t = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) t = std::max(t, std::abs(m(i, j)));
        const double step = denom > 0.0 ? t / denom : 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i)
            out(i, j) = quantize_value(m(i, j), step, level_lo, denom);
    }
    return out;
}

ActivationRange activation_range(const DenseTensor& x) {
    if (x.size() == 0) throw Error(ErrorCode::InvalidArgument, "empty tensor");
    ActivationRange r;
    r.t_left = std::numeric_limits<double>::infinity();
    r.t_right = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x.size(); ++i) {
        r.t_left = std::min(r.t_left, x[i]);
        r.t_right = std::max(r.t_right, x[i]);
    }
    r.nonnegative = r.t_left >= 0.0;
    return r;
}

DenseTensor quantize_activations(const DenseTensor& x, const ActivationRange& range,
                                 int bits) {
    check_bits(bits);
    if (range.t_left > range.t_right)
        throw Error(ErrorCode::InvalidArgument, "t_left must be <= t_right");
    const double t = range.t_right - range.t_left;
    // Degenerate range: the lone representable level is the constant itself.
    if (t == 0.0) return x;

    double step, level_lo, level_hi;
    if (range.nonnegative) {
        step = t / static_cast<double>((1 << bits) - 1);
        level_lo = 0.0;
        level_hi = static_cast<double>((1 << bits) - 1);
    } else {
        const double denom = static_cast<double>((1 << (bits - 1)) - 1);
        if (denom == 0.0)
            throw Error(ErrorCode::InvalidArgument,
                        "signed activation quantization needs bits >= 2");
        step = t / denom;
        level_lo = -static_cast<double>(1 << (bits - 1));
        level_hi = denom;
    }

    DenseTensor out(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = quantize_value(x[i], step, level_lo, level_hi);
    return out;
}

DenseTensor quantize_activations(const DenseTensor& x, int bits) {
    return quantize_activations(x, activation_range(x), bits);
}

DenseTensor ste_backward(const DenseTensor& upstream_grad, const DenseTensor& x,
                         const ActivationRange& range) {
    if (upstream_grad.shape() != x.shape())
        throw Error(ErrorCode::DimensionMismatch,
                    "gradient and input shapes must match");
    DenseTensor out(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const bool inside = x[i] >= range.t_left && x[i] <= range.t_right;
        out[i] = inside ? upstream_grad[i] : 0.0;
    }
    return out;
}

double best_quantile(const DenseTensor& w, int bits,
                     const std::function<double(const DenseTensor&, const DenseTensor&)>& metric,
                     const std::vector<double>& grid) {
    if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty quantile grid");
    double best_q = grid.front();
    double best_m = std::numeric_limits<double>::infinity();
    for (double q : grid) {
        const QuantParams p = make_weight_params(w, bits, QuantScheme::Quantile, q);
        const double m = metric(w, quantize_weights(w, p));
        if (m < best_m) {
            best_m = m;
            best_q = q;
        }
    }
    return best_q;
}

}  // namespace tqt
