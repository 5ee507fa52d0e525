// Copyright 2026 The WNQ Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wnq/wnq.h"

#include <cstring>
#include <new>
#include <string>

#include "core/backward.hpp"
#include "core/errors.hpp"
#include "core/metrics.hpp"
#include "core/rng.hpp"
#include "core/tensor_io.hpp"
#include "core/train.hpp"

struct wnq_tensor {
  wnq::WeightTensor t;
};

struct wnq_quantized {
  wnq::QuantizedTensor q;
};

namespace {

thread_local std::string g_last_error;
thread_local int g_negative_alpha = 0;

wnq_status fail(wnq_status status, const char* what) {
  g_last_error = what;
  return status;
}

wnq_status from_io_status(wnq::IoStatus s) {
  switch (s) {
    case wnq::IoStatus::BadMagic: return WNQ_ERROR_BAD_MAGIC;
    case wnq::IoStatus::BadVersion: return WNQ_ERROR_BAD_VERSION;
    case wnq::IoStatus::Truncated: return WNQ_ERROR_TRUNCATED;
    case wnq::IoStatus::TrailingBytes:
    case wnq::IoStatus::DimKindMismatch:
    case wnq::IoStatus::FormatError: return WNQ_ERROR_FORMAT;
    default: return WNQ_ERROR_IO;
  }
}

// Runs fn, translating exceptions into status codes.
template <typename Fn>
wnq_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const wnq::IoError& e) {
    return fail(from_io_status(e.status()), e.what());
  } catch (const wnq::TrainError& e) {
    return fail(WNQ_ERROR_NUMERIC, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(WNQ_ERROR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(WNQ_ERROR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(WNQ_ERROR_INTERNAL, e.what());
  }
}

wnq_status require(bool ok, const char* what) {
  return ok ? WNQ_OK : fail(WNQ_ERROR_INVALID_ARGUMENT, what);
}

}  // namespace

extern "C" {

const char* wnq_version(void) { return "0.1.0"; }

const char* wnq_status_message(wnq_status status) {
  switch (status) {
    case WNQ_OK: return "ok";
    case WNQ_ERROR_INVALID_ARGUMENT: return "invalid argument";
    case WNQ_ERROR_IO: return "i/o error";
    case WNQ_ERROR_BAD_MAGIC: return "bad magic";
    case WNQ_ERROR_BAD_VERSION: return "unsupported format version";
    case WNQ_ERROR_TRUNCATED: return "truncated payload";
    case WNQ_ERROR_FORMAT: return "malformed file";
    case WNQ_ERROR_SHAPE_MISMATCH: return "shape mismatch";
    case WNQ_ERROR_NUMERIC: return "numeric failure";
    case WNQ_ERROR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* wnq_last_error(void) { return g_last_error.c_str(); }

wnq_status wnq_tensor_create(wnq_layer_kind kind, const uint64_t* dims,
                             size_t ndims, const float* data,
                             wnq_tensor** out) {
  if (wnq_status s = require(out && dims && ndims > 0, "null argument"))
    return s;
  return guarded([&] {
    std::vector<std::uint64_t> shape(dims, dims + ndims);
    std::uint64_t total = 1;
    for (std::uint64_t d : shape) total *= d;
    std::vector<float> values;
    if (data) values.assign(data, data + total);
    *out = new wnq_tensor{wnq::WeightTensor(
        kind == WNQ_KIND_CONV ? wnq::LayerKind::Conv
                              : wnq::LayerKind::FullyConnected,
        std::move(shape), std::move(values))};
    return WNQ_OK;
  });
}

wnq_status wnq_tensor_read(const char* path, wnq_tensor** out) {
  if (wnq_status s = require(path && out, "null argument")) return s;
  return guarded([&] {
    *out = new wnq_tensor{wnq::read_tensor(path)};
    return WNQ_OK;
  });
}

wnq_status wnq_tensor_write(const wnq_tensor* t, const char* path) {
  if (wnq_status s = require(t && path, "null argument")) return s;
  return guarded([&] {
    wnq::write_tensor(t->t, path);
    return WNQ_OK;
  });
}

void wnq_tensor_free(wnq_tensor* t) { delete t; }

size_t wnq_tensor_ndims(const wnq_tensor* t) { return t->t.shape().size(); }
uint64_t wnq_tensor_dim(const wnq_tensor* t, size_t i) {
  return i < t->t.shape().size() ? t->t.shape()[i] : 0;
}
wnq_layer_kind wnq_tensor_kind(const wnq_tensor* t) {
  return t->t.kind() == wnq::LayerKind::Conv ? WNQ_KIND_CONV : WNQ_KIND_FC;
}
size_t wnq_tensor_filter_count(const wnq_tensor* t) {
  return t->t.filter_count();
}
size_t wnq_tensor_filter_size(const wnq_tensor* t) {
  return t->t.filter_size();
}
size_t wnq_tensor_size(const wnq_tensor* t) { return t->t.size(); }
const float* wnq_tensor_data(const wnq_tensor* t) {
  return t->t.data().data();
}

void wnq_quant_config_init(wnq_quant_config* cfg) {
  if (!cfg) return;
  cfg->bits = 2;
  cfg->init_iters = 20;
  cfg->train_iters = 1;
  cfg->tol = 1e-8;
}

int wnq_last_negative_alpha(void) { return g_negative_alpha; }

wnq_status wnq_quantize_tensor(const wnq_tensor* t, wnq_method method,
                               const wnq_quant_config* cfg,
                               wnq_quantized** out) {
  if (wnq_status s = require(t && cfg && out, "null argument")) return s;
  if (method != WNQ_METHOD_WNQ && method != WNQ_METHOD_LQNET &&
      method != WNQ_METHOD_RESIDUAL)
    return fail(WNQ_ERROR_INVALID_ARGUMENT,
                "method must be wnq, lqnet or residual");
  return guarded([&] {
    wnq::QuantConfig qc{cfg->bits, cfg->init_iters, cfg->train_iters, cfg->tol};
    qc.validate();
    wnq::QuantizedTensor qt;
    qt.kind = t->t.kind();
    qt.bits = qc.bits;
    qt.filter_size = t->t.filter_size();
    g_negative_alpha = 0;
    for (std::size_t n = 0; n < t->t.filter_count(); ++n) {
      const auto wf = t->t.filter(n);
      std::vector<double> w(wf.begin(), wf.end());
      wnq::FilterQuantResult r =
          method == WNQ_METHOD_WNQ ? wnq::quantize_filter(w, qc)
          : method == WNQ_METHOD_LQNET
              ? wnq::quantize_lqnet(w, qc)
              : wnq::quantize_residual(w, qc.bits);
      if (r.negative_alpha) g_negative_alpha = 1;
      qt.filters.push_back(std::move(r.filter));
    }
    *out = new wnq_quantized{std::move(qt)};
    return WNQ_OK;
  });
}

wnq_status wnq_quantize_dorefa(const wnq_tensor* t, int bits,
                               wnq_tensor** out) {
  if (wnq_status s = require(t && out, "null argument")) return s;
  return guarded([&] {
    wnq::WeightTensor q(t->t.kind(), t->t.shape(),
                        std::vector<float>(t->t.size(), 0.0f));
    for (std::size_t n = 0; n < t->t.filter_count(); ++n) {
      const auto wf = t->t.filter(n);
      std::vector<double> w(wf.begin(), wf.end());
      wnq::DorefaResult r = wnq::quantize_dorefa(w, bits);
      std::copy(r.values.begin(), r.values.end(), q.filter(n).begin());
    }
    *out = new wnq_tensor{std::move(q)};
    return WNQ_OK;
  });
}

wnq_status wnq_quantized_read(const char* path, wnq_quantized** out) {
  if (wnq_status s = require(path && out, "null argument")) return s;
  return guarded([&] {
    *out = new wnq_quantized{wnq::read_quantized(path)};
    return WNQ_OK;
  });
}

wnq_status wnq_quantized_write(const wnq_quantized* q, const char* path) {
  if (wnq_status s = require(q && path, "null argument")) return s;
  return guarded([&] {
    wnq::write_quantized(q->q, path);
    return WNQ_OK;
  });
}

wnq_status wnq_quantized_dequantize(const wnq_quantized* q, wnq_tensor** out) {
  if (wnq_status s = require(q && out, "null argument")) return s;
  return guarded([&] {
    *out = new wnq_tensor{q->q.dequantize()};
    return WNQ_OK;
  });
}

void wnq_quantized_free(wnq_quantized* q) { delete q; }

int wnq_quantized_bits(const wnq_quantized* q) { return q->q.bits; }
size_t wnq_quantized_filter_count(const wnq_quantized* q) {
  return q->q.filter_count();
}
size_t wnq_quantized_filter_size(const wnq_quantized* q) {
  return static_cast<size_t>(q->q.filter_size);
}

wnq_status wnq_relative_mse(const wnq_tensor* w, const wnq_tensor* q,
                            double* out) {
  if (wnq_status s = require(w && q && out, "null argument")) return s;
  if (w->t.filter_count() != q->t.filter_count() ||
      w->t.filter_size() != q->t.filter_size())
    return fail(WNQ_ERROR_SHAPE_MISMATCH,
                "tensors disagree on filter count or size");
  return guarded([&] {
    *out = wnq::relative_mse(w->t, q->t);
    return WNQ_OK;
  });
}

wnq_status wnq_report_line(const wnq_tensor* layer,
                           const wnq_tensor* dequantized, int method, int bits,
                           int bins, char** out_line) {
  if (wnq_status s = require(layer && out_line, "null argument")) return s;
  if (dequantized && (layer->t.filter_count() != dequantized->t.filter_count() ||
                      layer->t.filter_size() != dequantized->t.filter_size()))
    return fail(WNQ_ERROR_SHAPE_MISMATCH,
                "tensors disagree on filter count or size");
  return guarded([&] {
    wnq::LayerReport report;
    if (dequantized) {
      report = wnq::report_against(layer->t, dequantized->t, bits, bins);
    } else {
      std::optional<wnq::Method> m;
      if (method >= 0 && method <= 3) m = static_cast<wnq::Method>(method);
      report = wnq::distribution_report(layer->t, m, bits, bins);
    }
    const std::string line = report.to_record();
    char* buf = new char[line.size() + 1];
    std::memcpy(buf, line.c_str(), line.size() + 1);
    *out_line = buf;
    return WNQ_OK;
  });
}

void wnq_string_free(char* s) { delete[] s; }

wnq_status wnq_fd_check(size_t m, uint64_t seed, double eps,
                        double* max_deviation) {
  if (wnq_status s = require(m > 0 && max_deviation, "invalid argument"))
    return s;
  return guarded([&] {
    // Deterministic per seed: redraw until the max-abs margin allows finite
    // differences at this eps.
    for (std::uint64_t attempt = 0;; ++attempt) {
      wnq::Rng rng(wnq::mix_seed(seed, attempt));
      std::vector<double> w(m), upstream(m);
      for (double& v : w) v = rng.normal();
      for (double& v : upstream) v = rng.normal();
      double mav = 0.0, second = 0.0;
      for (double v : w) {
        const double a = std::abs(v);
        if (a > mav) {
          second = mav;
          mav = a;
        } else if (a > second) {
          second = a;
        }
      }
      if (mav - second <= 10.0 * eps || mav <= 10.0 * eps) continue;
      *max_deviation = wnq::fd_check(w, upstream, eps);
      return WNQ_OK;
    }
  });
}

void wnq_train_config_init(wnq_train_config* cfg) {
  if (!cfg) return;
  cfg->method = WNQ_METHOD_WNQ;
  cfg->bits = 2;
  cfg->lr = 0.05;
  cfg->momentum = 0.9;
  cfg->steps = 2000;
  cfg->fp_steps = 2000;
  cfg->batch = 64;
  cfg->hidden = 32;
  cfg->seed = 1;
  cfg->dataset = WNQ_DATASET_BLOBS;
  cfg->net = WNQ_NET_FC2;
  wnq_quant_config_init(&cfg->quant);
}

wnq_status wnq_demo_train(const wnq_train_config* cfg, const char* out_dir,
                          wnq_train_result* result) {
  if (wnq_status s = require(cfg && out_dir, "null argument")) return s;
  if (cfg->method < WNQ_METHOD_WNQ || cfg->method > WNQ_METHOD_FP)
    return fail(WNQ_ERROR_INVALID_ARGUMENT, "unknown method");
  return guarded([&] {
    wnq::TrainConfig tc;
    if (cfg->method != WNQ_METHOD_FP)
      tc.method = static_cast<wnq::Method>(cfg->method);
    tc.bits = cfg->bits;
    tc.lr = cfg->lr;
    tc.momentum = cfg->momentum;
    tc.steps = cfg->steps;
    tc.fp_steps = cfg->fp_steps;
    tc.batch = cfg->batch;
    tc.hidden = cfg->hidden;
    tc.seed = cfg->seed;
    tc.dataset = cfg->dataset == WNQ_DATASET_SPIRALS
                     ? wnq::DatasetKind::TwoSpirals
                     : wnq::DatasetKind::GaussianBlobs;
    tc.net = cfg->net == WNQ_NET_CONV1 ? wnq::NetKind::Conv1 : wnq::NetKind::Fc2;
    tc.quant = wnq::QuantConfig{cfg->quant.bits, cfg->quant.init_iters,
                                cfg->quant.train_iters, cfg->quant.tol};
    wnq::RunResult r = wnq::demo_train(tc, out_dir);
    if (result) {
      *result = wnq_train_result{};
      result->final_loss = r.final_loss;
      result->final_accuracy = r.final_accuracy;
      result->layer_count =
          std::min<std::size_t>(r.reports.size(), WNQ_MAX_REPORT_LAYERS);
      for (std::size_t i = 0; i < result->layer_count; ++i) {
        result->layer_relative_mse[i] = r.reports[i].relative_mse;
        result->layer_mse_defined[i] = r.reports[i].mse_defined ? 1 : 0;
        result->layer_tail_ratio[i] = r.reports[i].tail_ratio;
        result->layer_tail_defined[i] = r.reports[i].tail_defined ? 1 : 0;
      }
    }
    return WNQ_OK;
  });
}

}  // extern "C"
