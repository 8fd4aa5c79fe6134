// SPDX-License-Identifier: Apache-2.0
#include "tqt/ranksearch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "tqt/quantize.hpp"

namespace tqt {

namespace {

void check_layer(const LayerEntry& layer) {
    if (layer.kernel.order() != 4)
        throw Error(ErrorCode::DimensionMismatch, "layer kernel must be order-4");
    const std::size_t s = layer.kernel.extent(2), s_hat = layer.kernel.extent(3);
    if (layer.r3 < 1 || layer.r3 > s || layer.r4 < 1 || layer.r4 > s_hat)
        throw Error(ErrorCode::RankOutOfRange, "initial rank out of range");
}

DenseTensor random_tensor(const std::vector<std::size_t>& shape, std::mt19937_64& rng) {
    DenseTensor t(shape);
    std::normal_distribution<double> dist(0.0, 1.0);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
    return t;
}

DenseTensor relu(DenseTensor t) {
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::max(t[i], 0.0);
    return t;
}

DenseTensor layer_forward(const CompressedLayer& layer, const DenseTensor& x) {
    if (layer.factors)
        return conv2d_tucker(x, *layer.factors, layer.entry->stride, layer.entry->pad);
    return conv2d_direct(x, layer.entry->kernel, layer.entry->stride,
                         layer.entry->pad);
}

DenseTensor stack_forward(const ModelState& state, const DenseTensor& input) {
    DenseTensor x = input;
    for (std::size_t i = 0; i < state.layers.size(); ++i) {
        x = layer_forward(state.layers[i], x);
        if (i + 1 < state.layers.size()) x = relu(std::move(x));
    }
    return x;
}

double squared_error(const DenseTensor& a, const DenseTensor& b) {
    if (a.shape() != b.shape())
        throw Error(ErrorCode::DimensionMismatch, "error operands differ in shape");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double r = a[i] - b[i];
        acc += r * r;
    }
    return acc;
}

ModelState initial_state(const std::vector<LayerEntry>& layers) {
    ModelState state;
    state.layers.resize(layers.size());
    for (std::size_t i = 0; i < layers.size(); ++i) {
        state.layers[i].entry = &layers[i];
        state.layers[i].r3 = layers[i].r3;
        state.layers[i].r4 = layers[i].r4;
    }
    return state;
}

std::vector<std::size_t> resolve_order(const std::vector<LayerEntry>& layers,
                                       const SearchConfig& cfg) {
    if (cfg.layer_order.empty()) {
        std::vector<std::size_t> order(layers.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        return order;
    }
    for (std::size_t i : cfg.layer_order)
        if (i >= layers.size())
            throw Error(ErrorCode::InvalidArgument, "layer order index out of range");
    return cfg.layer_order;
}

}  // namespace

PartialTucker2 compress_layer(const LayerEntry& layer, std::size_t r3, std::size_t r4) {
    PartialTucker2 f = partial_tucker2(layer.kernel, r3, r4).factors;
    if (layer.bits > 0) {
        const QuantParams cp =
            make_weight_params(f.core, layer.bits, QuantScheme::PerTensorSymmetric);
        f.core = quantize_weights(f.core, cp);
        DenseTensor u3t = matrix_as_tensor(f.u3);
        const QuantParams p3 =
            make_weight_params(u3t, layer.bits, QuantScheme::PerTensorSymmetric);
        f.u3 = tensor_as_matrix(quantize_weights(u3t, p3));
        DenseTensor u4t = matrix_as_tensor(f.u4);
        const QuantParams p4 =
            make_weight_params(u4t, layer.bits, QuantScheme::PerTensorSymmetric);
        f.u4 = tensor_as_matrix(quantize_weights(u4t, p4));
    }
    return f;
}

// -------------------------------------------------------------------- oracles

StackOutputErrorOracle::StackOutputErrorOracle(
    const std::vector<LayerEntry>& layers, std::pair<std::size_t, std::size_t> input_hw,
    std::uint64_t seed) {
    if (layers.empty()) throw Error(ErrorCode::InvalidArgument, "empty layer stack");
    std::mt19937_64 rng(seed);
    input_ = random_tensor({input_hw.first, input_hw.second, layers[0].kernel.extent(2)},
                           rng);
    reference_ = stack_forward(initial_state(layers), input_);
    reference_norm_ = frobenius_norm(reference_);
}

DenseTensor StackOutputErrorOracle::forward(const ModelState& state) const {
    return stack_forward(state, input_);
}

double StackOutputErrorOracle::evaluate(const ModelState& state) {
    const DenseTensor out = stack_forward(state, input_);
    const double err = std::sqrt(squared_error(out, reference_));
    return -err / std::max(reference_norm_, 1e-300);
}

LinearProbeOracle::LinearProbeOracle(const std::vector<LayerEntry>& layers,
                                     std::pair<std::size_t, std::size_t> input_hw,
                                     std::size_t classes, std::size_t samples,
                                     std::uint64_t seed) {
    if (layers.empty()) throw Error(ErrorCode::InvalidArgument, "empty layer stack");
    std::mt19937_64 rng(seed);
    const ModelState ref = initial_state(layers);
    DenseTensor probe = stack_forward(
        ref, random_tensor({input_hw.first, input_hw.second, layers[0].kernel.extent(2)},
                           rng));
    head_ = DenseMatrix(classes, probe.size());
    std::normal_distribution<double> dist(0.0, 1.0);
    for (double& v : head_.values()) v = dist(rng);

    inputs_.reserve(samples);
    reference_labels_.reserve(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        inputs_.push_back(random_tensor(
            {input_hw.first, input_hw.second, layers[0].kernel.extent(2)}, rng));
        reference_labels_.push_back(predict(ref, inputs_.back()));
    }
}

std::size_t LinearProbeOracle::predict(const ModelState& state,
                                       const DenseTensor& x) const {
    const DenseTensor features = stack_forward(state, x);
    if (features.size() != head_.cols())
        throw Error(ErrorCode::DimensionMismatch, "probe feature size changed");
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < head_.rows(); ++c) {
        double score = 0.0;
        for (std::size_t k = 0; k < features.size(); ++k)
            score += head_(c, k) * features[k];
        if (score > best_score) {
            best_score = score;
            best = c;
        }
    }
    return best;
}

double LinearProbeOracle::evaluate(const ModelState& state) {
    std::size_t agree = 0;
    for (std::size_t i = 0; i < inputs_.size(); ++i)
        if (predict(state, inputs_[i]) == reference_labels_[i]) ++agree;
    return static_cast<double>(agree) / static_cast<double>(inputs_.size());
}

// --------------------------------------------------------- layerwise selection

namespace {

double layer_error_sq(const LayerEntry& layer, const DenseTensor& x,
                      const DenseTensor& y, std::size_t r3, std::size_t r4) {
    const PartialTucker2 f = compress_layer(layer, r3, r4);
    return squared_error(conv2d_tucker(x, f, layer.stride, layer.pad), y);
}

}  // namespace

RankSelectResult layerwise_rank_select(const LayerEntry& layer, const DenseTensor& x,
                                       const DenseTensor& y, double eps_sq) {
    if (layer.kernel.order() != 4)
        throw Error(ErrorCode::DimensionMismatch, "layer kernel must be order-4");
    const std::size_t s = layer.kernel.extent(2), s_hat = layer.kernel.extent(3);

    const double full_err = layer_error_sq(layer, x, y, s, s_hat);
    if (full_err > eps_sq)
        throw Error(ErrorCode::Infeasible,
                    "error budget below the quantization-only error at full rank");

    // Exhaustive grid for small layers; greedy descent otherwise.
    if (s * s_hat <= 4096) {
        RankSelectResult best{s, s_hat, full_err};
        std::size_t best_sum = s + s_hat;
        for (std::size_t r3 = 1; r3 <= s; ++r3) {
            for (std::size_t r4 = 1; r4 <= s_hat; ++r4) {
                if (r3 + r4 >= best_sum) continue;
                const double err = layer_error_sq(layer, x, y, r3, r4);
                if (err <= eps_sq) {
                    best = {r3, r4, err};
                    best_sum = r3 + r4;
                }
            }
        }
        return best;
    }

    RankSelectResult cur{s, s_hat, full_err};
    for (;;) {
        RankSelectResult next = cur;
        bool moved = false;
        if (cur.r3 > 1) {
            const double err = layer_error_sq(layer, x, y, cur.r3 - 1, cur.r4);
            if (err <= eps_sq) {
                next = {cur.r3 - 1, cur.r4, err};
                moved = true;
            }
        }
        if (cur.r4 > 1) {
            const double err = layer_error_sq(layer, x, y, cur.r3, cur.r4 - 1);
            if (err <= eps_sq && (!moved || err < next.error_sq)) {
                next = {cur.r3, cur.r4 - 1, err};
                moved = true;
            }
        }
        if (!moved) return cur;
        cur = next;
    }
}

// ------------------------------------------------------------ greedy searches

namespace {

struct Accepted {
    std::size_t r3;
    std::size_t r4;
    std::optional<PartialTucker2> factors;
    double metric;
};

RankPlan finalize(const std::vector<LayerEntry>& layers,
                  const std::vector<Accepted>& accepted, MetricOracle& oracle,
                  ModelState& state, std::vector<AuditEntry> audit) {
    RankPlan plan;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        plan.final_ranks.emplace_back(accepted[i].r3, accepted[i].r4);
        state.layers[i].factors = accepted[i].factors;
        state.layers[i].r3 = accepted[i].r3;
        state.layers[i].r4 = accepted[i].r4;
    }
    plan.achieved_metric = oracle.evaluate(state);
    plan.audit = std::move(audit);
    return plan;
}

}  // namespace

RankPlan greedy_single_pass(const std::vector<LayerEntry>& layers,
                            const SearchConfig& cfg, MetricOracle& oracle) {
    for (const LayerEntry& l : layers) check_layer(l);
    if (cfg.max_steps < 0)
        throw Error(ErrorCode::InvalidArgument, "iteration cap must be >= 0");

    ModelState state = initial_state(layers);
    std::vector<Accepted> accepted(layers.size());
    for (std::size_t i = 0; i < layers.size(); ++i)
        accepted[i] = {layers[i].r3, layers[i].r4, std::nullopt, 0.0};

    std::vector<AuditEntry> audit;
    const std::vector<std::size_t> order = resolve_order(layers, cfg);

    for (std::size_t n : order) {
        const LayerEntry& layer = layers[n];
        std::size_t r3 = layer.r3, r4 = layer.r4;
        int i = 0;
        double metric = oracle.evaluate(state);
        while (metric > cfg.metric_threshold && i <= cfg.max_steps) {
            PartialTucker2 f = compress_layer(layer, r3, r4);
            state.layers[n].factors = f;
            state.layers[n].r3 = r3;
            state.layers[n].r4 = r4;
            const double before = oracle.evaluate(state);
            const double after = oracle.finetune(state, cfg.max_steps);
            const bool ok = after > cfg.metric_threshold;
            audit.push_back({0, n, r3, r4, before, after, ok});
            if (ok) accepted[n] = {r3, r4, std::move(f), after};
            metric = after;

            const std::size_t next_r3 = r3 > layer.step3 ? r3 - layer.step3 : 1;
            const std::size_t next_r4 = r4 > layer.step4 ? r4 - layer.step4 : 1;
            if (next_r3 == r3 && next_r4 == r4) break;  // rank floor
            r3 = next_r3;
            r4 = next_r4;
            ++i;
        }
        // Roll back to the last accepted decomposition before moving on.
        state.layers[n].factors = accepted[n].factors;
        state.layers[n].r3 = accepted[n].r3;
        state.layers[n].r4 = accepted[n].r4;
    }
    return finalize(layers, accepted, oracle, state, std::move(audit));
}

RankPlan greedy_multi_pass(const std::vector<LayerEntry>& layers,
                           const SearchConfig& cfg, MetricOracle& oracle) {
    for (const LayerEntry& l : layers) check_layer(l);
    if (cfg.passes < 1)
        throw Error(ErrorCode::InvalidArgument, "pass count must be >= 1");

    ModelState state = initial_state(layers);
    std::vector<Accepted> accepted(layers.size());
    std::vector<std::pair<std::size_t, std::size_t>> current(layers.size());
    for (std::size_t i = 0; i < layers.size(); ++i) {
        accepted[i] = {layers[i].r3, layers[i].r4, std::nullopt, 0.0};
        current[i] = {layers[i].r3, layers[i].r4};
    }

    std::vector<AuditEntry> audit;
    const std::vector<std::size_t> order = resolve_order(layers, cfg);

    for (int pass = 1; pass <= cfg.passes; ++pass) {
        for (std::size_t n : order) {
            const LayerEntry& layer = layers[n];
            auto [r3, r4] = current[n];
            PartialTucker2 f = compress_layer(layer, r3, r4);
            state.layers[n].factors = f;
            state.layers[n].r3 = r3;
            state.layers[n].r4 = r4;
            const double before = oracle.evaluate(state);
            const double after = oracle.finetune(state, cfg.max_steps);
            const bool ok = !(after < cfg.metric_threshold);
            audit.push_back({static_cast<std::size_t>(pass), n, r3, r4, before, after,
                             ok});
            if (!ok) {
                // Revert to the last accepted decomposition for this layer.
                state.layers[n].factors = accepted[n].factors;
                state.layers[n].r3 = accepted[n].r3;
                state.layers[n].r4 = accepted[n].r4;
                continue;
            }
            accepted[n] = {r3, r4, std::move(f), after};
            const std::size_t next_r3 = r3 > layer.step3 ? r3 - layer.step3 : 1;
            const std::size_t next_r4 = r4 > layer.step4 ? r4 - layer.step4 : 1;
            current[n] = {next_r3, next_r4};
        }
    }
    return finalize(layers, accepted, oracle, state, std::move(audit));
}

std::uint64_t RankPlan::cost(const std::vector<LayerEntry>& layers) const {
    if (layers.size() != final_ranks.size())
        throw Error(ErrorCode::DimensionMismatch, "plan does not match layer list");
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const std::uint64_t d = layers[i].kernel.extent(0);
        const std::uint64_t s = layers[i].kernel.extent(2);
        const std::uint64_t s_hat = layers[i].kernel.extent(3);
        const std::uint64_t r3 = final_ranks[i].first;
        const std::uint64_t r4 = final_ranks[i].second;
        total += r3 * s + r4 * s_hat + r3 * r4 * d * d;
    }
    return total;
}

}  // namespace tqt
