// SPDX-License-Identifier: Apache-2.0
#include "tqt/tqt.h"

#include <cstring>
#include <exception>
#include <string>

#include "tqt/conv.hpp"
#include "tqt/driver.hpp"
#include "tqt/error.hpp"
#include "tqt/quantize.hpp"
#include "tqt/tensor.hpp"
#include "tqt/tensor_io.hpp"
#include "tqt/tucker.hpp"

struct tqt_tensor {
    tqt::DenseTensor t;
};

struct tqt_partial_tucker {
    tqt::PartialTucker2 f;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_last_output;

tqt_status status_of(tqt::ErrorCode code) {
    switch (code) {
        case tqt::ErrorCode::InvalidArgument: return TQT_ERR_INVALID_ARGUMENT;
        case tqt::ErrorCode::DimensionMismatch: return TQT_ERR_DIMENSION_MISMATCH;
        case tqt::ErrorCode::RankOutOfRange: return TQT_ERR_RANK_OUT_OF_RANGE;
        case tqt::ErrorCode::BadMagic: return TQT_ERR_BAD_MAGIC;
        case tqt::ErrorCode::BadVersion: return TQT_ERR_BAD_VERSION;
        case tqt::ErrorCode::TruncatedPayload: return TQT_ERR_TRUNCATED_PAYLOAD;
        case tqt::ErrorCode::ExtentOverflow: return TQT_ERR_EXTENT_OVERFLOW;
        case tqt::ErrorCode::Io: return TQT_ERR_IO;
        case tqt::ErrorCode::Infeasible: return TQT_ERR_INFEASIBLE;
        case tqt::ErrorCode::Internal: return TQT_ERR_INTERNAL;
    }
    return TQT_ERR_INTERNAL;
}

template <typename Fn>
tqt_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return TQT_OK;
    } catch (const tqt::Error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return TQT_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return TQT_ERR_INTERNAL;
    }
}

tqt_status require(bool ok, const char* msg) {
    if (ok) return TQT_OK;
    g_last_error = msg;
    return TQT_ERR_INVALID_ARGUMENT;
}

std::vector<std::size_t> to_shape(const uint64_t* extents, size_t order) {
    return std::vector<std::size_t>(extents, extents + order);
}

tqt::QuantScheme parse_scheme_str(const char* scheme, double& quantile) {
    quantile = 1.0;
    const std::string s = scheme;
    if (s == "tensor") return tqt::QuantScheme::PerTensorSymmetric;
    if (s == "filter") return tqt::QuantScheme::PerFilterSymmetric;
    if (s.rfind("quantile:", 0) == 0) {
        quantile = std::stod(s.substr(9));
        if (!(quantile > 0.0) || quantile > 1.0)
            throw tqt::Error(tqt::ErrorCode::InvalidArgument, "quantile must be in (0, 1]");
        return tqt::QuantScheme::Quantile;
    }
    throw tqt::Error(tqt::ErrorCode::InvalidArgument,
                     "unknown scheme '" + s + "' (use tensor, filter, or quantile:<q>)");
}

}  // namespace

extern "C" {

const char* tqt_status_name(tqt_status status) {
    switch (status) {
        case TQT_OK: return "ok";
        case TQT_ERR_INVALID_ARGUMENT: return "invalid-argument";
        case TQT_ERR_DIMENSION_MISMATCH: return "dimension-mismatch";
        case TQT_ERR_RANK_OUT_OF_RANGE: return "rank-out-of-range";
        case TQT_ERR_BAD_MAGIC: return "bad-magic";
        case TQT_ERR_BAD_VERSION: return "bad-version";
        case TQT_ERR_TRUNCATED_PAYLOAD: return "truncated-payload";
        case TQT_ERR_EXTENT_OVERFLOW: return "extent-overflow";
        case TQT_ERR_IO: return "io-error";
        case TQT_ERR_INFEASIBLE: return "infeasible";
        case TQT_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* tqt_last_error(void) { return g_last_error.c_str(); }

const char* tqt_last_output(void) { return g_last_output.c_str(); }

tqt_status tqt_tensor_create(const uint64_t* extents, size_t order, const double* data,
                             tqt_tensor** out) {
    if (tqt_status st = require(extents && data && out && order > 0, "null argument"))
        return st;
    return guarded([&] {
        tqt::DenseTensor t(to_shape(extents, order));
        std::memcpy(t.data(), data, t.size() * sizeof(double));
        *out = new tqt_tensor{std::move(t)};
    });
}

void tqt_tensor_destroy(tqt_tensor* t) { delete t; }

size_t tqt_tensor_order(const tqt_tensor* t) { return t ? t->t.order() : 0; }

uint64_t tqt_tensor_extent(const tqt_tensor* t, size_t mode) {
    return t && mode < t->t.order() ? t->t.extent(mode) : 0;
}

size_t tqt_tensor_size(const tqt_tensor* t) { return t ? t->t.size() : 0; }

const double* tqt_tensor_data(const tqt_tensor* t) { return t ? t->t.data() : nullptr; }

tqt_status tqt_tensor_read(const char* path, tqt_tensor** out) {
    if (tqt_status st = require(path && out, "null argument")) return st;
    return guarded([&] { *out = new tqt_tensor{tqt::read_tensor_file(path)}; });
}

tqt_status tqt_tensor_write(const tqt_tensor* t, const char* path) {
    if (tqt_status st = require(t && path, "null argument")) return st;
    return guarded([&] { tqt::write_tensor_file(t->t, path); });
}

tqt_status tqt_tensor_write_packed(const tqt_tensor* t, int bits, const char* path) {
    if (tqt_status st = require(t && path, "null argument")) return st;
    return guarded([&] { tqt::write_packed_file(t->t, bits, path); });
}

tqt_status tqt_partial_tucker_decompose(const tqt_tensor* kernel, uint64_t r3,
                                        uint64_t r4, int max_iters, double tol,
                                        tqt_partial_tucker** out) {
    if (tqt_status st = require(kernel && out, "null argument")) return st;
    return guarded([&] {
        tqt::PartialTuckerResult res = tqt::partial_tucker2(
            kernel->t, static_cast<std::size_t>(r3), static_cast<std::size_t>(r4),
            max_iters > 0 ? max_iters : 50, tol > 0.0 ? tol : 1e-6);
        *out = new tqt_partial_tucker{std::move(res.factors)};
    });
}

void tqt_partial_tucker_destroy(tqt_partial_tucker* f) { delete f; }

tqt_status tqt_partial_tucker_core(const tqt_partial_tucker* f, tqt_tensor** out) {
    if (tqt_status st = require(f && out, "null argument")) return st;
    return guarded([&] { *out = new tqt_tensor{f->f.core}; });
}

tqt_status tqt_partial_tucker_u3(const tqt_partial_tucker* f, tqt_tensor** out) {
    if (tqt_status st = require(f && out, "null argument")) return st;
    return guarded([&] { *out = new tqt_tensor{tqt::matrix_as_tensor(f->f.u3)}; });
}

tqt_status tqt_partial_tucker_u4(const tqt_partial_tucker* f, tqt_tensor** out) {
    if (tqt_status st = require(f && out, "null argument")) return st;
    return guarded([&] { *out = new tqt_tensor{tqt::matrix_as_tensor(f->f.u4)}; });
}

tqt_status tqt_partial_tucker_reconstruct(const tqt_partial_tucker* f, tqt_tensor** out) {
    if (tqt_status st = require(f && out, "null argument")) return st;
    return guarded([&] { *out = new tqt_tensor{tqt::reconstruct(f->f)}; });
}

tqt_status tqt_quantize_weights(const tqt_tensor* w, int bits, const char* scheme,
                                tqt_tensor** out) {
    if (tqt_status st = require(w && scheme && out, "null argument")) return st;
    return guarded([&] {
        double quantile = 1.0;
        const tqt::QuantScheme qs = parse_scheme_str(scheme, quantile);
        const tqt::QuantParams p = tqt::make_weight_params(w->t, bits, qs, quantile);
        *out = new tqt_tensor{tqt::quantize_weights(w->t, p)};
    });
}

tqt_status tqt_conv2d(const tqt_tensor* x, const tqt_tensor* w, size_t stride,
                      size_t pad, tqt_tensor** out) {
    if (tqt_status st = require(x && w && out, "null argument")) return st;
    return guarded([&] { *out = new tqt_tensor{tqt::conv2d_direct(x->t, w->t, stride, pad)}; });
}

tqt_status tqt_conv2d_tucker(const tqt_tensor* x, const tqt_partial_tucker* f,
                             size_t stride, size_t pad, tqt_tensor** out) {
    if (tqt_status st = require(x && f && out, "null argument")) return st;
    return guarded(
        [&] { *out = new tqt_tensor{tqt::conv2d_tucker(x->t, f->f, stride, pad)}; });
}

tqt_status tqt_param_ratio(uint64_t d, uint64_t s, uint64_t s_hat, uint64_t r3,
                           uint64_t r4, double* out) {
    if (tqt_status st = require(out != nullptr, "null argument")) return st;
    return guarded([&] {
        *out = tqt::param_compression_ratio(d, s, s_hat, r3, r4);
    });
}

tqt_status tqt_macs_ratio(uint64_t d, uint64_t s, uint64_t s_hat, uint64_t in_h,
                          uint64_t in_w, uint64_t out_h, uint64_t out_w, uint64_t r3,
                          uint64_t r4, double* out) {
    if (tqt_status st = require(out != nullptr, "null argument")) return st;
    return guarded([&] {
        *out = tqt::macs_compression_ratio(d, s, s_hat, {in_h, in_w}, {out_h, out_w}, r3,
                                           r4);
    });
}

tqt_status tqt_tucker_ratio(const uint64_t* extents, const uint64_t* ranks, size_t order,
                            double* out) {
    if (tqt_status st = require(extents && ranks && out && order > 0, "null argument"))
        return st;
    return guarded([&] {
        *out = tqt::tucker_compression_ratio(to_shape(extents, order),
                                             to_shape(ranks, order));
    });
}

tqt_status tqt_cmd_decompose(const char* manifest_path, const char* layer, uint64_t r3,
                             uint64_t r4, const char* out_prefix) {
    if (tqt_status st = require(manifest_path && layer && out_prefix, "null argument"))
        return st;
    return guarded([&] {
        g_last_output = tqt::cmd_decompose(manifest_path, layer,
                                           static_cast<std::size_t>(r3),
                                           static_cast<std::size_t>(r4), out_prefix);
    });
}

tqt_status tqt_cmd_quantize(const char* in_path, int bits, const char* scheme,
                            int packed, const char* out_path) {
    if (tqt_status st = require(in_path && scheme && out_path, "null argument")) return st;
    return guarded([&] {
        g_last_output = tqt::cmd_quantize(in_path, bits, scheme, packed != 0, out_path);
    });
}

tqt_status tqt_cmd_ratio(const char* manifest_path, const char* out_csv) {
    if (tqt_status st = require(manifest_path != nullptr, "null argument")) return st;
    return guarded([&] {
        g_last_output = tqt::cmd_ratio(manifest_path, out_csv ? out_csv : "");
    });
}

tqt_status tqt_cmd_search(const char* manifest_path, const char* algorithm,
                          double threshold, int passes, uint64_t seed,
                          const char* out_plan_json, const char* out_audit_csv) {
    if (tqt_status st = require(manifest_path && algorithm, "null argument")) return st;
    return guarded([&] {
        g_last_output = tqt::cmd_search(manifest_path, algorithm, threshold, passes, seed,
                                        out_plan_json ? out_plan_json : "",
                                        out_audit_csv ? out_audit_csv : "");
    });
}

tqt_status tqt_cmd_baseline(const char* manifest_path, const char* layer,
                            const char* method, const uint64_t* ranks, size_t nranks,
                            uint64_t seed, const char* out_prefix) {
    if (tqt_status st =
            require(manifest_path && layer && method && out_prefix && (ranks || !nranks),
                    "null argument"))
        return st;
    return guarded([&] {
        const std::vector<std::size_t> rank_list =
            nranks ? to_shape(ranks, nranks) : std::vector<std::size_t>{};
        g_last_output = tqt::cmd_baseline(manifest_path, layer, method, rank_list, seed,
                                          out_prefix);
    });
}

tqt_status tqt_cmd_check(const char* manifest_path, const char* layer, uint64_t seed,
                         double* max_rel_deviation) {
    if (tqt_status st = require(manifest_path && layer, "null argument")) return st;
    return guarded([&] {
        g_last_output = tqt::cmd_check(manifest_path, layer, seed, max_rel_deviation);
    });
}

}  // extern "C"
