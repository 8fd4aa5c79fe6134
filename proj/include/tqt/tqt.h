/* SPDX-License-Identifier: Apache-2.0 */
/* C API for the tqt convolution-kernel compression library.
 *
 * All objects are opaque handles. Functions return TQT_OK on success; on
 * failure the returned status categorizes the error and tqt_last_error()
 * yields a thread-local message.
 */
#ifndef TQT_H
#define TQT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tqt_status {
    TQT_OK = 0,
    TQT_ERR_INVALID_ARGUMENT,
    TQT_ERR_DIMENSION_MISMATCH,
    TQT_ERR_RANK_OUT_OF_RANGE,
    TQT_ERR_BAD_MAGIC,
    TQT_ERR_BAD_VERSION,
    TQT_ERR_TRUNCATED_PAYLOAD,
    TQT_ERR_EXTENT_OVERFLOW,
    TQT_ERR_IO,
    TQT_ERR_INFEASIBLE,
    TQT_ERR_INTERNAL
} tqt_status;

const char* tqt_status_name(tqt_status status);
const char* tqt_last_error(void);

/* ---- tensors ---- */

typedef struct tqt_tensor tqt_tensor;

tqt_status tqt_tensor_create(const uint64_t* extents, size_t order,
                             const double* data, tqt_tensor** out);
void tqt_tensor_destroy(tqt_tensor* t);
size_t tqt_tensor_order(const tqt_tensor* t);
uint64_t tqt_tensor_extent(const tqt_tensor* t, size_t mode);
size_t tqt_tensor_size(const tqt_tensor* t);
const double* tqt_tensor_data(const tqt_tensor* t);

tqt_status tqt_tensor_read(const char* path, tqt_tensor** out);
tqt_status tqt_tensor_write(const tqt_tensor* t, const char* path);
tqt_status tqt_tensor_write_packed(const tqt_tensor* t, int bits, const char* path);

/* ---- partial Tucker decomposition ---- */

typedef struct tqt_partial_tucker tqt_partial_tucker;

tqt_status tqt_partial_tucker_decompose(const tqt_tensor* kernel, uint64_t r3,
                                        uint64_t r4, int max_iters, double tol,
                                        tqt_partial_tucker** out);
void tqt_partial_tucker_destroy(tqt_partial_tucker* f);
tqt_status tqt_partial_tucker_core(const tqt_partial_tucker* f, tqt_tensor** out);
tqt_status tqt_partial_tucker_u3(const tqt_partial_tucker* f, tqt_tensor** out);
tqt_status tqt_partial_tucker_u4(const tqt_partial_tucker* f, tqt_tensor** out);
tqt_status tqt_partial_tucker_reconstruct(const tqt_partial_tucker* f,
                                          tqt_tensor** out);

/* ---- quantization ---- */

/* scheme: "tensor", "filter", or "quantile:<q>". */
tqt_status tqt_quantize_weights(const tqt_tensor* w, int bits, const char* scheme,
                                tqt_tensor** out);

/* ---- convolution ---- */

tqt_status tqt_conv2d(const tqt_tensor* x, const tqt_tensor* w, size_t stride,
                      size_t pad, tqt_tensor** out);
tqt_status tqt_conv2d_tucker(const tqt_tensor* x, const tqt_partial_tucker* f,
                             size_t stride, size_t pad, tqt_tensor** out);

/* ---- compression ratios ---- */

tqt_status tqt_param_ratio(uint64_t d, uint64_t s, uint64_t s_hat, uint64_t r3,
                           uint64_t r4, double* out);
tqt_status tqt_macs_ratio(uint64_t d, uint64_t s, uint64_t s_hat, uint64_t in_h,
                          uint64_t in_w, uint64_t out_h, uint64_t out_w, uint64_t r3,
                          uint64_t r4, double* out);
tqt_status tqt_tucker_ratio(const uint64_t* extents, const uint64_t* ranks,
                            size_t order, double* out);

/* ---- manifest-level drivers (back the CLI subcommands) ---- */

/* Human-readable report of the most recent tqt_cmd_* call on this thread. */
const char* tqt_last_output(void);

tqt_status tqt_cmd_decompose(const char* manifest_path, const char* layer,
                             uint64_t r3, uint64_t r4, const char* out_prefix);
tqt_status tqt_cmd_quantize(const char* in_path, int bits, const char* scheme,
                            int packed, const char* out_path);
tqt_status tqt_cmd_ratio(const char* manifest_path, const char* out_csv);
tqt_status tqt_cmd_search(const char* manifest_path, const char* algorithm,
                          double threshold, int passes, uint64_t seed,
                          const char* out_plan_json, const char* out_audit_csv);
tqt_status tqt_cmd_baseline(const char* manifest_path, const char* layer,
                            const char* method, const uint64_t* ranks, size_t nranks,
                            uint64_t seed, const char* out_prefix);
tqt_status tqt_cmd_check(const char* manifest_path, const char* layer, uint64_t seed,
                         double* max_rel_deviation);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* TQT_H */
