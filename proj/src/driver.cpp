// SPDX-License-Identifier: Apache-2.0
#include "tqt/driver.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include <json.hpp>

#include "tqt/baselines.hpp"
#include "tqt/conv.hpp"
#include "tqt/error.hpp"
#include "tqt/quantize.hpp"
#include "tqt/ranksearch.hpp"
#include "tqt/tensor_io.hpp"
#include "tqt/tucker.hpp"

namespace tqt {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

DenseTensor load_kernel(const ManifestLayer& l) {
    DenseTensor t = read_tensor_file(l.tensor_path);
    if (t.order() != 4)
        throw Error(ErrorCode::DimensionMismatch,
                    "layer '" + l.name + "': expected an order-4 kernel, got order " +
                        std::to_string(t.order()));
    if (t.extent(0) != t.extent(1))
        throw Error(ErrorCode::DimensionMismatch,
                    "layer '" + l.name + "': kernel spatial extents differ");
    if (l.r3 > t.extent(2) || l.r4 > t.extent(3))
        throw Error(ErrorCode::RankOutOfRange,
                    "layer '" + l.name + "': manifest rank exceeds channel extent");
    return t;
}

std::vector<LayerEntry> load_layers(const ModelManifest& m) {
    std::vector<LayerEntry> layers;
    layers.reserve(m.layers.size());
    for (const ManifestLayer& l : m.layers) {
        LayerEntry e{l.name, load_kernel(l), l.r3,     l.r4, l.step3,
                     l.step4, l.bits,         l.stride, l.pad};
        layers.push_back(std::move(e));
    }
    return layers;
}

std::string shape_string(const DenseTensor& t) {
    std::string s;
    for (std::size_t k = 0; k < t.order(); ++k) {
        if (k) s += 'x';
        s += std::to_string(t.extent(k));
    }
    return s;
}

double relative_error(const DenseTensor& a, const DenseTensor& approx) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - approx[i];
        num += d * d;
        den += a[i] * a[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

QuantScheme parse_scheme(const std::string& scheme, double& quantile) {
    quantile = 1.0;
    if (scheme == "tensor") return QuantScheme::PerTensorSymmetric;
    if (scheme == "filter") return QuantScheme::PerFilterSymmetric;
    if (scheme.rfind("quantile:", 0) == 0) {
        try {
            quantile = std::stod(scheme.substr(9));
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidArgument, "bad quantile in scheme '" + scheme + "'");
        }
        if (!(quantile > 0.0) || quantile > 1.0)
            throw Error(ErrorCode::InvalidArgument, "quantile must be in (0, 1]");
        return QuantScheme::Quantile;
    }
    throw Error(ErrorCode::InvalidArgument,
                "unknown scheme '" + scheme + "' (use tensor, filter, or quantile:<q>)");
}

DenseTensor random_normal(const std::vector<std::size_t>& shape, std::mt19937_64& rng) {
    DenseTensor t(shape);
    std::normal_distribution<double> dist(0.0, 1.0);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
    return t;
}

std::size_t fp32_bytes(std::size_t params) { return 4 * params; }

}  // namespace

std::string cmd_decompose(const std::string& manifest_path, const std::string& layer,
                          std::size_t r3, std::size_t r4,
                          const std::string& out_prefix) {
    const ModelManifest m = read_manifest_file(manifest_path);
    const ManifestLayer& entry = m.layer(layer);
    const DenseTensor w = load_kernel(entry);
    if (r3 == 0) r3 = entry.r3;
    if (r4 == 0) r4 = entry.r4;
    if (r3 > w.extent(2) || r4 > w.extent(3))
        throw Error(ErrorCode::RankOutOfRange, "requested rank exceeds channel extent");

    const PartialTuckerResult res = partial_tucker2(w, r3, r4);
    write_tensor_file(res.factors.core, out_prefix + "_core.tqt");
    write_tensor_file(matrix_as_tensor(res.factors.u3), out_prefix + "_u3.tqt");
    write_tensor_file(matrix_as_tensor(res.factors.u4), out_prefix + "_u4.tqt");

    const DenseTensor approx = reconstruct(res.factors);
    const ConvSpec spec = conv_spec_for(w, entry.stride, entry.pad);

    std::ostringstream out;
    out << "layer " << layer << " kernel " << shape_string(w) << " rank (" << r3 << ","
        << r4 << ")\n"
        << "sweeps " << res.error_history.size() - 1 << " relative error "
        << fmt(relative_error(w, approx)) << "\n"
        << "param ratio " << fmt(param_compression_ratio(spec, r3, r4)) << "\n"
        << "wrote " << out_prefix << "_{core,u3,u4}.tqt\n";
    return out.str();
}

std::string cmd_quantize(const std::string& in_path, int bits, const std::string& scheme,
                         bool packed, const std::string& out_path) {
    const DenseTensor w = read_tensor_file(in_path);
    double quantile = 1.0;
    const QuantScheme qs = parse_scheme(scheme, quantile);
    if (packed && qs != QuantScheme::PerTensorSymmetric)
        throw Error(ErrorCode::InvalidArgument, "packed output requires the tensor scheme");

    const QuantParams params = make_weight_params(w, bits, qs, quantile);
    const DenseTensor wq = quantize_weights(w, params);

    std::size_t bytes_after;
    if (packed) {
        write_packed_file(wq, bits, out_path);
        bytes_after = packed_payload_bytes(w.size(), bits);
    } else {
        write_tensor_file(wq, out_path);
        bytes_after = fp32_bytes(w.size());
    }

    double max_dev = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        max_dev = std::max(max_dev, std::abs(w[i] - wq[i]));

    std::ostringstream out;
    out << "quantized " << shape_string(w) << " to " << bits << " bits, scheme " << scheme
        << "\n"
        << "step " << fmt(params.steps[0]) << " max deviation " << fmt(max_dev) << "\n"
        << "payload bytes " << fp32_bytes(w.size()) << " -> " << bytes_after << "\n"
        << "wrote " << out_path << "\n";
    return out.str();
}

std::string cmd_ratio(const std::string& manifest_path, const std::string& out_csv) {
    const ModelManifest m = read_manifest_file(manifest_path);
    std::ostringstream csv;
    csv << "name,shape,r3,r4,bits,param_ratio,macs_ratio,recon_error,"
           "mem_bytes_before,mem_bytes_after\n";
    for (const ManifestLayer& l : m.layers) {
        const DenseTensor w = load_kernel(l);
        const ConvSpec spec = conv_spec_for(w, l.stride, l.pad);
        const std::size_t h_out = conv_output_extent(l.height, spec.d, l.stride, l.pad);
        const std::size_t w_out = conv_output_extent(l.width, spec.d, l.stride, l.pad);

        const PartialTuckerResult res = partial_tucker2(w, l.r3, l.r4);
        const double err = relative_error(w, reconstruct(res.factors));
        const double p = param_compression_ratio(spec, l.r3, l.r4);
        const double mac = macs_compression_ratio(
            spec.d, spec.s, spec.s_hat, {l.height, l.width}, {h_out, w_out}, l.r3, l.r4);

        const std::size_t params_after =
            spec.d * spec.d * l.r3 * l.r4 + spec.s * l.r3 + spec.s_hat * l.r4;
        const std::size_t before = fp32_bytes(w.size());
        const std::size_t after = l.bits > 0
                                      ? (params_after * static_cast<std::size_t>(l.bits) + 7) / 8
                                      : fp32_bytes(params_after);

        csv << l.name << ',' << shape_string(w) << ',' << l.r3 << ',' << l.r4 << ','
            << l.bits << ',' << fmt(p) << ',' << fmt(mac) << ',' << fmt(err) << ','
            << before << ',' << after << '\n';
    }
    const std::string text = csv.str();
    if (!out_csv.empty()) atomic_write_file(out_csv, text);
    return text;
}

std::string cmd_search(const std::string& manifest_path, const std::string& algorithm,
                       double threshold, int passes, std::uint64_t seed,
                       const std::string& out_plan_json,
                       const std::string& out_audit_csv) {
    if (passes < 1) throw Error(ErrorCode::InvalidArgument, "passes must be positive");
    const ModelManifest m = read_manifest_file(manifest_path);
    const std::vector<LayerEntry> layers = load_layers(m);

    StackOutputErrorOracle oracle(layers, {m.layers[0].height, m.layers[0].width}, seed);
    SearchConfig cfg;
    cfg.metric_threshold = threshold;
    cfg.max_steps = passes;
    cfg.passes = passes;

    RankPlan plan;
    if (algorithm == "single")
        plan = greedy_single_pass(layers, cfg, oracle);
    else if (algorithm == "multi")
        plan = greedy_multi_pass(layers, cfg, oracle);
    else
        throw Error(ErrorCode::InvalidArgument,
                    "unknown algorithm '" + algorithm + "' (use single or multi)");

    nlohmann::json j;
    j["algorithm"] = algorithm;
    j["threshold"] = threshold;
    j["passes"] = passes;
    j["seed"] = seed;
    j["achieved_metric"] = plan.achieved_metric;
    j["total_cost"] = plan.cost(layers);
    j["layers"] = nlohmann::json::array();
    for (std::size_t n = 0; n < layers.size(); ++n) {
        j["layers"].push_back({{"name", layers[n].name},
                               {"r3", plan.final_ranks[n].first},
                               {"r4", plan.final_ranks[n].second}});
    }
    if (!out_plan_json.empty()) atomic_write_file(out_plan_json, j.dump(2) + "\n");

    std::ostringstream audit;
    audit << "pass,layer,name,r3,r4,metric_before,metric_after,accepted\n";
    for (const AuditEntry& a : plan.audit) {
        audit << a.pass << ',' << a.layer << ',' << layers[a.layer].name << ',' << a.r3
              << ',' << a.r4 << ',' << fmt(a.metric_before) << ',' << fmt(a.metric_after)
              << ',' << (a.accepted ? 1 : 0) << '\n';
    }
    if (!out_audit_csv.empty()) atomic_write_file(out_audit_csv, audit.str());

    std::ostringstream out;
    out << "algorithm " << algorithm << " threshold " << fmt(threshold) << " passes "
        << passes << "\n";
    for (std::size_t n = 0; n < layers.size(); ++n)
        out << "layer " << layers[n].name << " rank (" << plan.final_ranks[n].first << ","
            << plan.final_ranks[n].second << ")\n";
    out << "achieved metric " << fmt(plan.achieved_metric) << " cost "
        << plan.cost(layers) << "\n";
    return out.str();
}

std::string cmd_baseline(const std::string& manifest_path, const std::string& layer,
                         const std::string& method,
                         const std::vector<std::size_t>& ranks, std::uint64_t seed,
                         const std::string& out_prefix) {
    const ModelManifest m = read_manifest_file(manifest_path);
    const ManifestLayer& entry = m.layer(layer);
    const DenseTensor w = load_kernel(entry);
    const ConvSpec spec = conv_spec_for(w, entry.stride, entry.pad);

    std::ostringstream out;
    out << "layer " << layer << " kernel " << shape_string(w) << " method " << method
        << "\n";

    const std::uint64_t full_params =
        static_cast<std::uint64_t>(spec.d) * spec.d * spec.s * spec.s_hat;

    if (method == "reshape-svd") {
        if (ranks.size() != 1)
            throw Error(ErrorCode::InvalidArgument, "reshape-svd takes one rank");
        const SvdFactorPair f = reshape_svd_factorize(w, ranks[0]);
        write_tensor_file(f.w1, out_prefix + "_w1.tqt");
        write_tensor_file(matrix_as_tensor(f.w2), out_prefix + "_w2.tqt");
        out << "relative error " << fmt(relative_error(w, reconstruct(f))) << "\n"
            << "params " << full_params << " -> "
            << baseline_param_count(BaselineMethod::ReshapeSvd, spec.d, spec.s, spec.s_hat,
                                    ranks)
            << "\n";
    } else if (method == "spatial-svd") {
        if (ranks.size() != 1)
            throw Error(ErrorCode::InvalidArgument, "spatial-svd takes one rank");
        const SpatialSvdPair f = spatial_svd_factorize(w, ranks[0]);
        write_tensor_file(f.w_vert, out_prefix + "_vert.tqt");
        write_tensor_file(f.w_horz, out_prefix + "_horz.tqt");
        out << "relative error " << fmt(relative_error(w, reconstruct(f))) << "\n"
            << "params " << full_params << " -> "
            << baseline_param_count(BaselineMethod::SpatialSvd, spec.d, spec.s, spec.s_hat,
                                    ranks)
            << "\n";
    } else if (method == "tt") {
        if (ranks.size() != 3)
            throw Error(ErrorCode::InvalidArgument, "tt takes three ranks");
        const TTFactors f = tt_factorize(w, {ranks[0], ranks[1], ranks[2]});
        write_tensor_file(matrix_as_tensor(f.g1), out_prefix + "_g1.tqt");
        write_tensor_file(f.g2, out_prefix + "_g2.tqt");
        write_tensor_file(f.g3, out_prefix + "_g3.tqt");
        write_tensor_file(matrix_as_tensor(f.g4), out_prefix + "_g4.tqt");
        out << "relative error " << fmt(relative_error(w, reconstruct(f))) << "\n"
            << "params " << full_params << " -> "
            << baseline_param_count(BaselineMethod::TensorTrain, spec.d, spec.s, spec.s_hat,
                                    ranks)
            << "\n";
    } else if (method == "prune") {
        if (ranks.size() != 1)
            throw Error(ErrorCode::InvalidArgument, "prune takes one channel budget");
        const std::size_t budget = ranks[0];
        const std::size_t n_samples = 64;
        std::mt19937_64 rng(seed);
        const DenseTensor x =
            random_normal({n_samples, spec.s, spec.d * spec.d}, rng);
        DenseMatrix y(n_samples, spec.s_hat);
        for (std::size_t n = 0; n < n_samples; ++n)
            for (std::size_t sh = 0; sh < spec.s_hat; ++sh) {
                double acc = 0.0;
                for (std::size_t s = 0; s < spec.s; ++s)
                    for (std::size_t i = 0; i < spec.d; ++i)
                        for (std::size_t jx = 0; jx < spec.d; ++jx)
                            acc += x.at({n, s, i * spec.d + jx}) * w.at({i, jx, s, sh});
                y(n, sh) = acc;
            }
        const ChannelSelection sel = channel_prune_lasso(x, w, y, budget);
        write_tensor_file(sel.refit_w, out_prefix + "_pruned.tqt");
        out << "kept " << sel.kept.size() << "/" << spec.s << " channels, lambda "
            << fmt(sel.lambda) << "\n"
            << "relative error " << fmt(relative_error(w, sel.refit_w)) << "\n"
            << "params " << full_params << " -> "
            << baseline_param_count(BaselineMethod::ChannelPrune, spec.d, spec.s,
                                    spec.s_hat, {sel.kept.size()})
            << "\n";
    } else {
        throw Error(ErrorCode::InvalidArgument,
                    "unknown method '" + method +
                        "' (use reshape-svd, spatial-svd, tt, or prune)");
    }
    return out.str();
}

std::string cmd_check(const std::string& manifest_path, const std::string& layer,
                      std::uint64_t seed, double* max_rel_deviation) {
    const ModelManifest m = read_manifest_file(manifest_path);
    const ManifestLayer& entry = m.layer(layer);
    const DenseTensor w = load_kernel(entry);
    const ConvSpec spec = conv_spec_for(w, entry.stride, entry.pad);

    std::mt19937_64 rng(seed);
    const DenseTensor x = random_normal({entry.height, entry.width, spec.s}, rng);

    // Full rank: the factorized path must match the direct convolution.
    const PartialTuckerResult res = partial_tucker2(w, spec.s, spec.s_hat);
    const DenseTensor y_ref = conv2d_direct(x, w, entry.stride, entry.pad);
    const DenseTensor y_fac = conv2d_tucker(x, res.factors, entry.stride, entry.pad);

    double scale = 0.0;
    for (std::size_t i = 0; i < y_ref.size(); ++i)
        scale = std::max(scale, std::abs(y_ref[i]));
    double dev = 0.0;
    for (std::size_t i = 0; i < y_ref.size(); ++i)
        dev = std::max(dev, std::abs(y_ref[i] - y_fac[i]));
    const double rel = scale > 0.0 ? dev / scale : dev;
    if (max_rel_deviation) *max_rel_deviation = rel;

    std::ostringstream out;
    out << "layer " << layer << " kernel " << shape_string(w) << " input " << entry.height
        << "x" << entry.width << "\n"
        << "full-rank factorized vs direct: max relative deviation " << fmt(rel) << "\n"
        << (rel < 1e-10 ? "check passed\n" : "check FAILED\n");
    return out.str();
}

}  // namespace tqt
