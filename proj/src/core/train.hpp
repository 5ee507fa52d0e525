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

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "core/datasets.hpp"
#include "core/metrics.hpp"
#include "core/quantizer.hpp"

namespace wnq {

// Hand-written layer primitives, double precision. Weight layouts match
// WeightTensor: FC weights are [out, in] row-major, conv weights are
// [c_out, c_in, s, s], inputs NCHW with stride-1 valid convolution.
void fc_forward(const double* w, const double* bias, const double* x,
                double* y, int batch, int in, int out);
void fc_backward(const double* w, const double* x, const double* dy,
                 double* dw, double* db, double* dx, int batch, int in,
                 int out);
void conv_forward(const double* w, const double* bias, const double* x,
                  double* y, int batch, int c_in, int h, int wdt, int c_out,
                  int s);
void conv_backward(const double* w, const double* x, const double* dy,
                   double* dw, double* db, double* dx, int batch, int c_in,
                   int h, int wdt, int c_out, int s);
void relu_forward(const double* x, double* y, std::size_t n);
void relu_backward(const double* x, const double* dy, double* dx,
                   std::size_t n);
void global_avg_pool_forward(const double* x, double* y, int batch, int c,
                             int h, int wdt);
void global_avg_pool_backward(const double* dy, double* dx, int batch, int c,
                              int h, int wdt);
// Mean softmax cross-entropy over the batch; fills probs (batch * classes)
// and returns the loss.
double softmax_ce_forward(const double* logits, const int* labels, int batch,
                          int classes, double* probs);
// d(loss)/d(logits) from cached probs.
void softmax_ce_backward(const double* probs, const int* labels, int batch,
                         int classes, double* dlogits);

enum class NetKind { Fc2 = 0, Conv1 = 1 };

const char* net_name(NetKind n);
std::optional<NetKind> parse_net(const std::string& name);

struct TrainConfig {
  std::optional<Method> method;  // nullopt: full-precision baseline
  int bits = 2;
  double lr = 0.05;
  double momentum = 0.9;
  int steps = 2000;     // steps with the configured method
  int fp_steps = 2000;  // full-precision warm-up phase; 0 trains from scratch
  int batch = 64;
  std::uint64_t seed = 1;
  DatasetKind dataset = DatasetKind::GaussianBlobs;
  NetKind net = NetKind::Fc2;
  int hidden = 32;
  QuantConfig quant;  // bits is taken from `bits` above

  void validate() const;
};

// One parametric layer. Master weights stay full precision for the whole
// run; each step quantizes them into forward_w without touching them.
struct ParamLayer {
  LayerKind kind = LayerKind::FullyConnected;
  std::vector<std::uint64_t> shape;  // FC: [out, in]; Conv: [out, in, s, s]
  std::vector<double> weights;       // master
  std::vector<double> bias;
  std::vector<double> w_vel, b_vel;  // momentum buffers
  std::vector<double> forward_w;     // weights used by the forward pass
  std::vector<BackwardContext> ctx;  // per filter, from the last quantization
  std::vector<std::vector<double>> warm_alpha;     // per filter
  std::vector<QuantizedFilter> qfilters;           // last packed form
  std::vector<double> frozen_scale;  // surrogate mode only

  std::size_t filter_count() const { return shape[0]; }
  std::size_t filter_size() const { return weights.size() / shape[0]; }

  WeightTensor master_tensor() const;
  WeightTensor forward_tensor() const;
};

struct TinyNet {
  NetKind kind = NetKind::Fc2;
  int in_dim = 2;
  int classes = 2;
  int hidden = 32;
  std::vector<ParamLayer> layers;
};

TinyNet build_net(NetKind kind, int in_dim, int classes, int hidden,
                  std::uint64_t seed);

// Quantizes every parametric layer per the method (no-op for full
// precision), consuming and refreshing the per-filter warm-start state.
// With surrogate = true the projection is skipped and the scale is frozen
// at the first call (finite-difference validation mode).
void quantize_net(TinyNet& net, std::optional<Method> method,
                  const QuantConfig& cfg, bool surrogate = false);

struct Batch {
  const double* x = nullptr;
  const int* y = nullptr;
  int size = 0;
  int dim = 0;
};

struct ForwardCache {
  int batch = 0;
  std::vector<double> in;      // batch x in_dim
  std::vector<double> pre0;    // first layer output, pre-activation
  std::vector<double> act0;    // post ReLU
  std::vector<double> pooled;  // Conv1 only
  std::vector<double> logits;
  std::vector<double> probs;
  double loss = 0.0;
  int correct = 0;
};

// Forward pass with the current forward weights. Throws TrainError if the
// loss is not finite.
double forward_step(const TinyNet& net, const Batch& batch,
                    ForwardCache& cache);

struct Grads {
  std::vector<std::vector<double>> dw;  // per layer, master-weight gradients
  std::vector<std::vector<double>> db;
};

// Backward pass: hand-written layer gradients produce dL/d(forward_w), which
// the method's rule maps onto the master weights (identity everywhere except
// the per-filter max element for Wnq).
void backward_step(const TinyNet& net, const Batch& batch,
                   const ForwardCache& cache, std::optional<Method> method,
                   Grads& grads);

void sgd_update(TinyNet& net, const Grads& grads, double lr, double momentum);

struct RunResult {
  double final_loss = 0.0;
  double final_accuracy = 0.0;
  std::vector<LayerReport> reports;  // one per parametric layer
  TinyNet net;                       // final state (masters + quantization)
};

// Full deterministic training run: an optional full-precision phase, then
// `steps` with the configured method, with step/epoch/report records
// streamed to `log` (ignored when null).
RunResult run_experiment(const TrainConfig& cfg, std::ostream* log);

// run_experiment plus artifacts on disk: train_log.txt, per-layer master
// weights (WNQT), quantized weights (WNQQ, or WNQT for DoReFa), and a
// summary.txt with the final report records.
RunResult demo_train(const TrainConfig& cfg,
                     const std::filesystem::path& out_dir);

}  // namespace wnq
