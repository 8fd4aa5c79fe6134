// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tqt/conv.hpp"
#include "tqt/tensor.hpp"
#include "tqt/tucker.hpp"

namespace tqt {

struct LayerEntry {
    std::string name;
    DenseTensor kernel;  // (D,D,S,Shat)
    std::size_t r3 = 0;  // initial/current rank
    std::size_t r4 = 0;
    std::size_t step3 = 1;  // 0 freezes the axis
    std::size_t step4 = 1;
    int bits = 8;  // 0 disables factor quantization
    std::size_t stride = 1;
    std::size_t pad = 0;
};

struct SearchConfig {
    double metric_threshold = 0.0;
    int max_steps = 1;  // per-layer rank decrement cap
    int passes = 1;     // interleaved pass count (multi-pass search)
    std::vector<std::size_t> layer_order;  // empty = model order
};

/// Per-layer model state: either the original kernel or quantized Tucker
/// factors at the recorded rank.
struct CompressedLayer {
    const LayerEntry* entry = nullptr;
    std::optional<PartialTucker2> factors;
    std::size_t r3 = 0;
    std::size_t r4 = 0;
};

struct ModelState {
    std::vector<CompressedLayer> layers;
};

/// Metric + fine-tune contract for the greedy searches. evaluate must be
/// deterministic for a fixed state; higher is better.
class MetricOracle {
public:
    virtual ~MetricOracle() = default;
    virtual double evaluate(const ModelState& state) = 0;
    // Default fine-tuner is a no-op: the epoch budget is consumed and the
    // state is returned unchanged.
    virtual double finetune(ModelState& state, int /*epochs*/) { return evaluate(state); }
};

/// Negative relative output error of the compressed layer stack on a fixed
/// synthetic input (ReLU between layers).
class StackOutputErrorOracle : public MetricOracle {
public:
    StackOutputErrorOracle(const std::vector<LayerEntry>& layers,
                           std::pair<std::size_t, std::size_t> input_hw,
                           std::uint64_t seed);
    double evaluate(const ModelState& state) override;

    DenseTensor forward(const ModelState& state) const;

private:
    DenseTensor input_;
    DenseTensor reference_;
    double reference_norm_ = 0.0;
};

/// Agreement rate of a fixed random linear head between the compressed and
/// reference stacks (a toy stand-in for validation accuracy).
class LinearProbeOracle : public MetricOracle {
public:
    LinearProbeOracle(const std::vector<LayerEntry>& layers,
                      std::pair<std::size_t, std::size_t> input_hw, std::size_t classes,
                      std::size_t samples, std::uint64_t seed);
    double evaluate(const ModelState& state) override;

private:
    std::vector<DenseTensor> inputs_;
    DenseMatrix head_;
    std::vector<std::size_t> reference_labels_;

    std::size_t predict(const ModelState& state, const DenseTensor& x) const;
};

struct AuditEntry {
    std::size_t pass = 0;
    std::size_t layer = 0;
    std::size_t r3 = 0;
    std::size_t r4 = 0;
    double metric_before = 0.0;
    double metric_after = 0.0;
    bool accepted = false;
};

struct RankPlan {
    std::vector<std::pair<std::size_t, std::size_t>> final_ranks;
    double achieved_metric = 0.0;
    std::vector<AuditEntry> audit;

    /// sum_n R3 S + R4 Shat + R3 R4 D^2 over the final ranks.
    std::uint64_t cost(const std::vector<LayerEntry>& layers) const;
};

struct RankSelectResult {
    std::size_t r3 = 0;
    std::size_t r4 = 0;
    double error_sq = 0.0;
};

/// min R3+R4 subject to ||y - W~ * x||_F^2 <= eps_sq with quantized factors.
/// Exhaustive over the (R3,R4) grid for small layers, greedy descent from
/// (S,Shat) otherwise. Throws Infeasible when even full rank misses eps_sq.
RankSelectResult layerwise_rank_select(const LayerEntry& layer, const DenseTensor& x,
                                       const DenseTensor& y, double eps_sq);

RankPlan greedy_single_pass(const std::vector<LayerEntry>& layers,
                            const SearchConfig& cfg, MetricOracle& oracle);

RankPlan greedy_multi_pass(const std::vector<LayerEntry>& layers,
                           const SearchConfig& cfg, MetricOracle& oracle);

/// Decompose at the given rank and quantize core/u3/u4 per-tensor at
/// layer.bits (bits = 0 skips quantization). Shared by the searches and the
/// audit-reproducibility path.
PartialTucker2 compress_layer(const LayerEntry& layer, std::size_t r3, std::size_t r4);

}  // namespace tqt
