/* Copyright 2026 The WNQ Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C API for the wnq library: per-filter low-bit weight quantization with
 * learned levels, baseline quantizers, error/distribution diagnostics, and
 * a deterministic demo training loop.
 *
 * Every function returns a wnq_status; out-parameters are written only on
 * WNQ_OK. Objects returned through handles are owned by the caller and
 * released with the matching _free function. Handles are immutable after
 * creation and safe to share across threads for reads. On failure,
 * wnq_last_error() returns a thread-local description of the most recent
 * error.
 */

#ifndef WNQ_H_
#define WNQ_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define WNQ_API __declspec(dllexport)
#else
#define WNQ_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wnq_status {
  WNQ_OK = 0,
  WNQ_ERROR_INVALID_ARGUMENT = 1,
  WNQ_ERROR_IO = 2,
  WNQ_ERROR_BAD_MAGIC = 3,
  WNQ_ERROR_BAD_VERSION = 4,
  WNQ_ERROR_TRUNCATED = 5,
  WNQ_ERROR_FORMAT = 6,
  WNQ_ERROR_SHAPE_MISMATCH = 7,
  WNQ_ERROR_NUMERIC = 8,
  WNQ_ERROR_INTERNAL = 9
} wnq_status;

typedef enum wnq_method {
  WNQ_METHOD_WNQ = 0,
  WNQ_METHOD_LQNET = 1,
  WNQ_METHOD_RESIDUAL = 2,
  WNQ_METHOD_DOREFA = 3,
  WNQ_METHOD_FP = 4 /* training only: quantization disabled */
} wnq_method;

typedef enum wnq_layer_kind { WNQ_KIND_FC = 0, WNQ_KIND_CONV = 1 } wnq_layer_kind;
typedef enum wnq_dataset { WNQ_DATASET_BLOBS = 0, WNQ_DATASET_SPIRALS = 1 } wnq_dataset;
typedef enum wnq_net { WNQ_NET_FC2 = 0, WNQ_NET_CONV1 = 1 } wnq_net;

/* Opaque handles. */
typedef struct wnq_tensor wnq_tensor;
typedef struct wnq_quantized wnq_quantized;

WNQ_API const char* wnq_version(void);
WNQ_API const char* wnq_status_message(wnq_status status);
/* Thread-local message for the most recent failing call. */
WNQ_API const char* wnq_last_error(void);

/* ---- float tensors (WNQT files) ---- */

/* ndims must be 2 (FC) or 4 (Conv) and match `kind`; data is row-major with
 * prod(dims) elements, or NULL for zeros. */
WNQ_API wnq_status wnq_tensor_create(wnq_layer_kind kind, const uint64_t* dims,
                                     size_t ndims, const float* data,
                                     wnq_tensor** out);
WNQ_API wnq_status wnq_tensor_read(const char* path, wnq_tensor** out);
WNQ_API wnq_status wnq_tensor_write(const wnq_tensor* t, const char* path);
WNQ_API void wnq_tensor_free(wnq_tensor* t);

WNQ_API size_t wnq_tensor_ndims(const wnq_tensor* t);
WNQ_API uint64_t wnq_tensor_dim(const wnq_tensor* t, size_t i);
WNQ_API wnq_layer_kind wnq_tensor_kind(const wnq_tensor* t);
WNQ_API size_t wnq_tensor_filter_count(const wnq_tensor* t); /* N */
WNQ_API size_t wnq_tensor_filter_size(const wnq_tensor* t);  /* M */
WNQ_API size_t wnq_tensor_size(const wnq_tensor* t);         /* N * M */
WNQ_API const float* wnq_tensor_data(const wnq_tensor* t);

/* ---- quantization ---- */

typedef struct wnq_quant_config {
  int bits;        /* K in [1, 8] */
  int init_iters;  /* alternating iterations without a warm start */
  int train_iters; /* alternating iterations per training step */
  double tol;      /* stop when the objective decrease falls below tol */
} wnq_quant_config;

/* Defaults: bits 2, init_iters 20, train_iters 1, tol 1e-8. */
WNQ_API void wnq_quant_config_init(wnq_quant_config* cfg);

/* Per-filter quantization of a whole tensor with method WNQ, LQNET or
 * RESIDUAL. The result stores K learned levels and K packed bit-planes per
 * filter (WNQQ file format). */
WNQ_API wnq_status wnq_quantize_tensor(const wnq_tensor* t, wnq_method method,
                                       const wnq_quant_config* cfg,
                                       wnq_quantized** out);
/* Any filter ended with a negative learned level in the last call on this
 * thread (diagnostic; the solution is used as computed). */
WNQ_API int wnq_last_negative_alpha(void);

/* DoReFa lives on a fixed uniform grid, so it yields a plain tensor. */
WNQ_API wnq_status wnq_quantize_dorefa(const wnq_tensor* t, int bits,
                                       wnq_tensor** out);

WNQ_API wnq_status wnq_quantized_read(const char* path, wnq_quantized** out);
WNQ_API wnq_status wnq_quantized_write(const wnq_quantized* q,
                                       const char* path);
WNQ_API wnq_status wnq_quantized_dequantize(const wnq_quantized* q,
                                            wnq_tensor** out);
WNQ_API void wnq_quantized_free(wnq_quantized* q);

WNQ_API int wnq_quantized_bits(const wnq_quantized* q);
WNQ_API size_t wnq_quantized_filter_count(const wnq_quantized* q);
WNQ_API size_t wnq_quantized_filter_size(const wnq_quantized* q);

/* ---- diagnostics ---- */

/* Mean over filters of ||w_n - q_n||^2 / ||w_n||^2; zero-norm filters are
 * excluded. Requires matching filter structure (same N and M). */
WNQ_API wnq_status wnq_relative_mse(const wnq_tensor* w, const wnq_tensor* q,
                                    double* out);

/* One report line per layer (fixed key=value field order, see README).
 * `dequantized` may be NULL for a distribution-only report; `method` < 0
 * means no quantizer. Free the line with wnq_string_free. */
WNQ_API wnq_status wnq_report_line(const wnq_tensor* layer,
                                   const wnq_tensor* dequantized, int method,
                                   int bits, int bins, char** out_line);
WNQ_API void wnq_string_free(char* s);

/* ---- gradient checking ---- */

/* Draws a seeded filter (size m) and upstream gradient, enforces a unique
 * max-abs element with margin > 10 * eps, and compares the analytic
 * backward rule against central finite differences of the frozen-scale
 * surrogate. Writes the max element-wise deviation. */
WNQ_API wnq_status wnq_fd_check(size_t m, uint64_t seed, double eps,
                                double* max_deviation);

/* ---- demo training ---- */

typedef struct wnq_train_config {
  wnq_method method; /* WNQ_METHOD_FP disables quantization */
  int bits;
  double lr;
  double momentum;
  int steps;    /* steps with the configured method */
  int fp_steps; /* full-precision warm-up steps; 0 trains from scratch */
  int batch;
  int hidden;
  uint64_t seed;
  wnq_dataset dataset;
  wnq_net net;
  wnq_quant_config quant;
} wnq_train_config;

/* Defaults: wnq, 2 bits, lr 0.05, momentum 0.9, 2000+2000 steps, batch 64,
 * hidden 32, seed 1, blobs, fc2. */
WNQ_API void wnq_train_config_init(wnq_train_config* cfg);

#define WNQ_MAX_REPORT_LAYERS 8

typedef struct wnq_train_result {
  double final_loss;
  double final_accuracy;
  size_t layer_count;
  double layer_relative_mse[WNQ_MAX_REPORT_LAYERS];
  int layer_mse_defined[WNQ_MAX_REPORT_LAYERS];
  double layer_tail_ratio[WNQ_MAX_REPORT_LAYERS];
  int layer_tail_defined[WNQ_MAX_REPORT_LAYERS];
} wnq_train_result;

/* Deterministic training run; writes train_log.txt, summary.txt and the
 * final master/quantized weights into out_dir. `result` may be NULL. */
WNQ_API wnq_status wnq_demo_train(const wnq_train_config* cfg,
                                  const char* out_dir,
                                  wnq_train_result* result);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* WNQ_H_ */
