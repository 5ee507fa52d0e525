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

#include "core/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "core/backward.hpp"
#include "core/errors.hpp"
#include "core/rng.hpp"
#include "core/tensor_io.hpp"
#include "core/text.hpp"

namespace wnq {

void fc_forward(const double* w, const double* bias, const double* x,
                double* y, int batch, int in, int out) {
  for (int b = 0; b < batch; ++b) {
    for (int o = 0; o < out; ++o) {
      double acc = bias ? bias[o] : 0.0;
      for (int i = 0; i < in; ++i) acc += w[o * in + i] * x[b * in + i];
      y[b * out + o] = acc;
    }
  }
}

void fc_backward(const double* w, const double* x, const double* dy,
                 double* dw, double* db, double* dx, int batch, int in,
                 int out) {
  if (dw)
    for (int o = 0; o < out; ++o)
      for (int i = 0; i < in; ++i) {
        double acc = 0.0;
        for (int b = 0; b < batch; ++b) acc += dy[b * out + o] * x[b * in + i];
        dw[o * in + i] = acc;
      }
  if (db)
    for (int o = 0; o < out; ++o) {
      double acc = 0.0;
      for (int b = 0; b < batch; ++b) acc += dy[b * out + o];
      db[o] = acc;
    }
  if (dx)
    for (int b = 0; b < batch; ++b)
      for (int i = 0; i < in; ++i) {
        double acc = 0.0;
        for (int o = 0; o < out; ++o) acc += dy[b * out + o] * w[o * in + i];
        dx[b * in + i] = acc;
      }
}

void conv_forward(const double* w, const double* bias, const double* x,
                  double* y, int batch, int c_in, int h, int wdt, int c_out,
                  int s) {
  const int ho = h - s + 1, wo = wdt - s + 1;
  for (int b = 0; b < batch; ++b)
    for (int co = 0; co < c_out; ++co)
      for (int i = 0; i < ho; ++i)
        for (int j = 0; j < wo; ++j) {
          double acc = bias ? bias[co] : 0.0;
          for (int ci = 0; ci < c_in; ++ci)
            for (int u = 0; u < s; ++u)
              for (int v = 0; v < s; ++v)
                acc += w[((co * c_in + ci) * s + u) * s + v] *
                       x[((b * c_in + ci) * h + i + u) * wdt + j + v];
          y[((b * c_out + co) * ho + i) * wo + j] = acc;
        }
}

void conv_backward(const double* w, const double* x, const double* dy,
                   double* dw, double* db, double* dx, int batch, int c_in,
                   int h, int wdt, int c_out, int s) {
  const int ho = h - s + 1, wo = wdt - s + 1;
  if (dw)
    for (int co = 0; co < c_out; ++co)
      for (int ci = 0; ci < c_in; ++ci)
        for (int u = 0; u < s; ++u)
          for (int v = 0; v < s; ++v) {
            double acc = 0.0;
            for (int b = 0; b < batch; ++b)
              for (int i = 0; i < ho; ++i)
                for (int j = 0; j < wo; ++j)
                  acc += dy[((b * c_out + co) * ho + i) * wo + j] *
                         x[((b * c_in + ci) * h + i + u) * wdt + j + v];
            dw[((co * c_in + ci) * s + u) * s + v] = acc;
          }
  if (db)
    for (int co = 0; co < c_out; ++co) {
      double acc = 0.0;
      for (int b = 0; b < batch; ++b)
        for (int i = 0; i < ho; ++i)
          for (int j = 0; j < wo; ++j)
            acc += dy[((b * c_out + co) * ho + i) * wo + j];
      db[co] = acc;
    }
  if (dx) {
    std::fill(dx, dx + static_cast<std::size_t>(batch) * c_in * h * wdt, 0.0);
    for (int b = 0; b < batch; ++b)
      for (int co = 0; co < c_out; ++co)
        for (int i = 0; i < ho; ++i)
          for (int j = 0; j < wo; ++j) {
            const double g = dy[((b * c_out + co) * ho + i) * wo + j];
            for (int ci = 0; ci < c_in; ++ci)
              for (int u = 0; u < s; ++u)
                for (int v = 0; v < s; ++v)
                  dx[((b * c_in + ci) * h + i + u) * wdt + j + v] +=
                      g * w[((co * c_in + ci) * s + u) * s + v];
          }
  }
}

void relu_forward(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(const double* x, const double* dy, double* dx,
                   std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
}

void global_avg_pool_forward(const double* x, double* y, int batch, int c,
                             int h, int wdt) {
  const double inv = 1.0 / (static_cast<double>(h) * wdt);
  for (int b = 0; b < batch; ++b)
    for (int k = 0; k < c; ++k) {
      double acc = 0.0;
      for (int i = 0; i < h * wdt; ++i) acc += x[(b * c + k) * h * wdt + i];
      y[b * c + k] = acc * inv;
    }
}

void global_avg_pool_backward(const double* dy, double* dx, int batch, int c,
                              int h, int wdt) {
  const double inv = 1.0 / (static_cast<double>(h) * wdt);
  for (int b = 0; b < batch; ++b)
    for (int k = 0; k < c; ++k)
      for (int i = 0; i < h * wdt; ++i)
        dx[(b * c + k) * h * wdt + i] = dy[b * c + k] * inv;
}

double softmax_ce_forward(const double* logits, const int* labels, int batch,
                          int classes, double* probs) {
  double loss = 0.0;
  for (int b = 0; b < batch; ++b) {
    const double* row = logits + b * classes;
    double m = row[0];
    for (int k = 1; k < classes; ++k) m = std::max(m, row[k]);
    double z = 0.0;
    for (int k = 0; k < classes; ++k) {
      probs[b * classes + k] = std::exp(row[k] - m);
      z += probs[b * classes + k];
    }
    for (int k = 0; k < classes; ++k) probs[b * classes + k] /= z;
    loss -= std::log(probs[b * classes + labels[b]]);
  }
  return loss / batch;
}

void softmax_ce_backward(const double* probs, const int* labels, int batch,
                         int classes, double* dlogits) {
  const double inv = 1.0 / batch;
  for (int b = 0; b < batch; ++b)
    for (int k = 0; k < classes; ++k)
      dlogits[b * classes + k] =
          (probs[b * classes + k] - (labels[b] == k ? 1.0 : 0.0)) * inv;
}

const char* net_name(NetKind n) {
  return n == NetKind::Fc2 ? "fc2" : "conv1";
}

std::optional<NetKind> parse_net(const std::string& name) {
  if (name == "fc2") return NetKind::Fc2;
  if (name == "conv1") return NetKind::Conv1;
  return std::nullopt;
}

void TrainConfig::validate() const {
  QuantConfig qc = quant;
  qc.bits = bits;
  qc.validate();
  if (steps < 0 || fp_steps < 0)
    throw std::invalid_argument("step counts must be nonnegative");
  if (steps + fp_steps == 0) throw std::invalid_argument("no steps to run");
  if (batch < 1) throw std::invalid_argument("batch must be positive");
  if (!(lr > 0.0)) throw std::invalid_argument("lr must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw std::invalid_argument("momentum must be in [0, 1)");
  if (hidden < 1) throw std::invalid_argument("hidden must be positive");
}

WeightTensor ParamLayer::master_tensor() const {
  return WeightTensor(kind, shape,
                      std::vector<float>(weights.begin(), weights.end()));
}

WeightTensor ParamLayer::forward_tensor() const {
  return WeightTensor(kind, shape,
                      std::vector<float>(forward_w.begin(), forward_w.end()));
}

namespace {

ParamLayer make_fc_layer(int out, int in, Rng& rng) {
  ParamLayer l;
  l.kind = LayerKind::FullyConnected;
  l.shape = {static_cast<std::uint64_t>(out), static_cast<std::uint64_t>(in)};
  l.weights.resize(static_cast<std::size_t>(out) * in);
  const double scale = std::sqrt(2.0 / in);
  for (double& w : l.weights) w = scale * rng.normal();
  l.bias.assign(out, 0.0);
  l.w_vel.assign(l.weights.size(), 0.0);
  l.b_vel.assign(out, 0.0);
  l.forward_w = l.weights;
  l.warm_alpha.resize(out);
  return l;
}

ParamLayer make_conv_layer(int c_out, int c_in, int s, Rng& rng) {
  ParamLayer l;
  l.kind = LayerKind::Conv;
  l.shape = {static_cast<std::uint64_t>(c_out), static_cast<std::uint64_t>(c_in),
             static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(s)};
  l.weights.resize(static_cast<std::size_t>(c_out) * c_in * s * s);
  const double scale = std::sqrt(2.0 / (static_cast<double>(c_in) * s * s));
  for (double& w : l.weights) w = scale * rng.normal();
  l.bias.assign(c_out, 0.0);
  l.w_vel.assign(l.weights.size(), 0.0);
  l.b_vel.assign(c_out, 0.0);
  l.forward_w = l.weights;
  l.warm_alpha.resize(c_out);
  return l;
}

}  // namespace

TinyNet build_net(NetKind kind, int in_dim, int classes, int hidden,
                  std::uint64_t seed) {
  Rng rng(mix_seed(seed, 1));
  TinyNet net;
  net.kind = kind;
  net.in_dim = in_dim;
  net.classes = classes;
  net.hidden = hidden;
  if (kind == NetKind::Fc2) {
    net.layers.push_back(make_fc_layer(hidden, in_dim, rng));
  } else {
    net.layers.push_back(make_conv_layer(hidden, in_dim, /*s=*/1, rng));
  }
  net.layers.push_back(make_fc_layer(classes, hidden, rng));
  return net;
}

namespace {

void quantize_layer(ParamLayer& l, Method method, const QuantConfig& cfg,
                    bool surrogate) {
  const std::size_t n_filters = l.filter_count();
  const std::size_t m = l.filter_size();
  l.ctx.resize(n_filters);
  l.forward_w.resize(l.weights.size());

  if (surrogate) {
    // Frozen-scale smooth surrogate: projection dropped, rescale constant.
    if (l.frozen_scale.empty()) {
      l.frozen_scale.resize(n_filters);
      for (std::size_t n = 0; n < n_filters; ++n) {
        double mav = 0.0;
        for (std::size_t i = 0; i < m; ++i)
          mav = std::max(mav, std::abs(l.weights[n * m + i]));
        l.frozen_scale[n] = mav;
      }
    }
    for (std::size_t n = 0; n < n_filters; ++n) {
      std::span<const double> row(l.weights.data() + n * m, m);
      NormalizedFilter nf = normalize(row);
      l.ctx[n] = BackwardContext{{row.begin(), row.end()}, nf.max_index,
                                 nf.degenerate};
      for (std::size_t i = 0; i < m; ++i)
        l.forward_w[n * m + i] =
            nf.degenerate ? 0.0 : l.frozen_scale[n] * (row[i] / nf.mav);
    }
    return;
  }

  l.qfilters.clear();
  l.qfilters.reserve(n_filters);
  for (std::size_t n = 0; n < n_filters; ++n) {
    std::span<const double> row(l.weights.data() + n * m, m);
    std::vector<float> q;
    switch (method) {
      case Method::Wnq:
      case Method::LqNet: {
        std::span<const double> warm(l.warm_alpha[n]);
        FilterQuantResult r = method == Method::Wnq
                                  ? quantize_filter(row, cfg, warm)
                                  : quantize_lqnet(row, cfg, warm);
        l.warm_alpha[n] = std::move(r.alpha);
        l.ctx[n] = std::move(r.ctx);
        q = unpack_filter(r.filter);
        l.qfilters.push_back(std::move(r.filter));
        break;
      }
      case Method::Residual: {
        FilterQuantResult r = quantize_residual(row, cfg.bits);
        l.ctx[n] = std::move(r.ctx);
        q = unpack_filter(r.filter);
        l.qfilters.push_back(std::move(r.filter));
        break;
      }
      case Method::DoReFa: {
        DorefaResult r = quantize_dorefa(row, cfg.bits);
        l.ctx[n] = std::move(r.ctx);
        q = std::move(r.values);
        break;
      }
    }
    for (std::size_t i = 0; i < m; ++i)
      l.forward_w[n * m + i] = static_cast<double>(q[i]);
  }
}

}  // namespace

void quantize_net(TinyNet& net, std::optional<Method> method,
                  const QuantConfig& cfg, bool surrogate) {
  for (ParamLayer& l : net.layers) {
    if (!method.has_value()) {
      l.forward_w = l.weights;  // full precision: masters pass through
      l.ctx.clear();
      l.qfilters.clear();
      continue;
    }
    quantize_layer(l, *method, cfg, surrogate);
  }
}

double forward_step(const TinyNet& net, const Batch& batch,
                    ForwardCache& cache) {
  const int b = batch.size;
  const int hidden = net.hidden;
  const ParamLayer& l0 = net.layers[0];
  const ParamLayer& l1 = net.layers[1];

  cache.batch = b;
  cache.in.assign(batch.x, batch.x + static_cast<std::size_t>(b) * batch.dim);
  cache.pre0.resize(static_cast<std::size_t>(b) * hidden);
  cache.act0.resize(static_cast<std::size_t>(b) * hidden);
  cache.logits.resize(static_cast<std::size_t>(b) * net.classes);
  cache.probs.resize(static_cast<std::size_t>(b) * net.classes);

  const double* fc1_in = cache.act0.data();
  if (net.kind == NetKind::Fc2) {
    fc_forward(l0.forward_w.data(), l0.bias.data(), cache.in.data(),
               cache.pre0.data(), b, net.in_dim, hidden);
    relu_forward(cache.pre0.data(), cache.act0.data(), cache.pre0.size());
  } else {
    // 1x1 spatial input: conv -> relu -> global average pool
    conv_forward(l0.forward_w.data(), l0.bias.data(), cache.in.data(),
                 cache.pre0.data(), b, net.in_dim, 1, 1, hidden, 1);
    relu_forward(cache.pre0.data(), cache.act0.data(), cache.pre0.size());
    cache.pooled.resize(static_cast<std::size_t>(b) * hidden);
    global_avg_pool_forward(cache.act0.data(), cache.pooled.data(), b, hidden,
                            1, 1);
    fc1_in = cache.pooled.data();
  }
  fc_forward(l1.forward_w.data(), l1.bias.data(), fc1_in, cache.logits.data(),
             b, hidden, net.classes);
  cache.loss = softmax_ce_forward(cache.logits.data(), batch.y, b, net.classes,
                                  cache.probs.data());
  if (!std::isfinite(cache.loss))
    throw TrainError("loss is not finite (diverged); lower the learning rate");

  cache.correct = 0;
  for (int i = 0; i < b; ++i) {
    const double* row = cache.logits.data() + i * net.classes;
    int arg = 0;
    for (int k = 1; k < net.classes; ++k)
      if (row[k] > row[arg]) arg = k;
    if (arg == batch.y[i]) ++cache.correct;
  }
  return cache.loss;
}

namespace {

// Routes dL/d(forward weights) onto the master weights. Everything passes
// straight through except the per-filter max-abs element under Wnq.
void route_weight_grads(const ParamLayer& l, std::optional<Method> method,
                        std::vector<double>& dw) {
  if (!method.has_value() || *method != Method::Wnq) return;
  const std::size_t m = l.filter_size();
  for (std::size_t n = 0; n < l.filter_count(); ++n) {
    std::span<const double> up(dw.data() + n * m, m);
    std::vector<double> g = backward_wnq(l.ctx[n], up);
    std::copy(g.begin(), g.end(), dw.begin() + static_cast<long>(n * m));
  }
}

}  // namespace

void backward_step(const TinyNet& net, const Batch& batch,
                   const ForwardCache& cache, std::optional<Method> method,
                   Grads& grads) {
  const int b = cache.batch;
  const int hidden = net.hidden;
  const ParamLayer& l0 = net.layers[0];
  const ParamLayer& l1 = net.layers[1];

  grads.dw.assign(2, {});
  grads.db.assign(2, {});
  grads.dw[0].resize(l0.weights.size());
  grads.db[0].resize(l0.bias.size());
  grads.dw[1].resize(l1.weights.size());
  grads.db[1].resize(l1.bias.size());

  std::vector<double> dlogits(static_cast<std::size_t>(b) * net.classes);
  softmax_ce_backward(cache.probs.data(), batch.y, b, net.classes,
                      dlogits.data());

  const double* fc1_in =
      net.kind == NetKind::Fc2 ? cache.act0.data() : cache.pooled.data();
  std::vector<double> d_fc1_in(static_cast<std::size_t>(b) * hidden);
  fc_backward(l1.forward_w.data(), fc1_in, dlogits.data(), grads.dw[1].data(),
              grads.db[1].data(), d_fc1_in.data(), b, hidden, net.classes);

  std::vector<double> dpre0(static_cast<std::size_t>(b) * hidden);
  if (net.kind == NetKind::Fc2) {
    relu_backward(cache.pre0.data(), d_fc1_in.data(), dpre0.data(),
                  dpre0.size());
    fc_backward(l0.forward_w.data(), cache.in.data(), dpre0.data(),
                grads.dw[0].data(), grads.db[0].data(), nullptr, b, net.in_dim,
                hidden);
  } else {
    std::vector<double> dact0(static_cast<std::size_t>(b) * hidden);
    global_avg_pool_backward(d_fc1_in.data(), dact0.data(), b, hidden, 1, 1);
    relu_backward(cache.pre0.data(), dact0.data(), dpre0.data(), dpre0.size());
    conv_backward(l0.forward_w.data(), cache.in.data(), dpre0.data(),
                  grads.dw[0].data(), grads.db[0].data(), nullptr, b,
                  net.in_dim, 1, 1, hidden, 1);
  }

  route_weight_grads(l0, method, grads.dw[0]);
  route_weight_grads(l1, method, grads.dw[1]);
}

void sgd_update(TinyNet& net, const Grads& grads, double lr, double momentum) {
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    ParamLayer& l = net.layers[li];
    for (std::size_t i = 0; i < l.weights.size(); ++i) {
      l.w_vel[i] = momentum * l.w_vel[i] + grads.dw[li][i];
      l.weights[i] -= lr * l.w_vel[i];
    }
    for (std::size_t i = 0; i < l.bias.size(); ++i) {
      l.b_vel[i] = momentum * l.b_vel[i] + grads.db[li][i];
      l.bias[i] -= lr * l.b_vel[i];
    }
  }
}

namespace {

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
};

EvalResult evaluate(const TinyNet& net, const Dataset& data, int batch) {
  EvalResult res;
  ForwardCache cache;
  std::vector<double> x;
  std::vector<int> y;
  std::size_t pos = 0, correct = 0;
  double loss_sum = 0.0;
  while (pos < data.size()) {
    const std::size_t take =
        std::min<std::size_t>(batch, data.size() - pos);
    x.assign(data.x.begin() + static_cast<long>(pos * data.dim),
             data.x.begin() + static_cast<long>((pos + take) * data.dim));
    y.assign(data.y.begin() + static_cast<long>(pos),
             data.y.begin() + static_cast<long>(pos + take));
    Batch b{x.data(), y.data(), static_cast<int>(take),
            static_cast<int>(data.dim)};
    forward_step(net, b, cache);
    loss_sum += cache.loss * static_cast<double>(take);
    correct += static_cast<std::size_t>(cache.correct);
    pos += take;
  }
  res.loss = loss_sum / static_cast<double>(data.size());
  res.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  return res;
}

LayerReport snapshot_report(const ParamLayer& l, std::size_t index,
                            std::optional<Method> method, int bits) {
  const WeightTensor masters = l.master_tensor();
  LayerReport r;
  if (method.has_value()) {
    r = report_against(masters, l.forward_tensor(), bits);
    r.method = method;
    if (*method == Method::DoReFa) {
      const int grid = (1 << bits) - 1;
      for (int j = 0; j <= grid; ++j)
        r.mean_levels.push_back(2.0 * j / grid - 1.0);
    } else {
      QuantizedTensor qt{l.kind, bits, l.filter_size(), l.qfilters};
      r.mean_levels = mean_level_set(qt);
    }
  } else {
    r = distribution_report(masters, std::nullopt, 0);
  }
  r.layer = std::to_string(index);
  return r;
}

void log_line(std::ostream* log, const std::string& line) {
  if (log) *log << line << '\n';
}

struct Phase {
  const char* name;
  int steps;
  std::optional<Method> method;
};

}  // namespace

RunResult run_experiment(const TrainConfig& cfg, std::ostream* log) {
  cfg.validate();
  const Dataset data = make_dataset(cfg.dataset, cfg.seed);
  if (cfg.batch > static_cast<int>(data.size()))
    throw std::invalid_argument("batch larger than dataset");
  TinyNet net = build_net(cfg.net, static_cast<int>(data.dim), data.classes,
                          cfg.hidden, cfg.seed);
  Rng shuffle_rng(mix_seed(cfg.seed, 2));
  QuantConfig qc = cfg.quant;
  qc.bits = cfg.bits;

  log_line(log,
           std::string("run method=") +
               (cfg.method ? method_name(*cfg.method) : "fp") +
               " bits=" + std::to_string(cfg.bits) +
               " dataset=" + dataset_name(cfg.dataset) +
               " net=" + net_name(cfg.net) +
               " hidden=" + std::to_string(cfg.hidden) + " lr=" + fmt_g(cfg.lr) +
               " momentum=" + fmt_g(cfg.momentum) +
               " batch=" + std::to_string(cfg.batch) +
               " fp_steps=" + std::to_string(cfg.fp_steps) +
               " steps=" + std::to_string(cfg.steps) +
               " seed=" + std::to_string(cfg.seed));

  const int batches_per_epoch =
      std::max(1, static_cast<int>(data.size()) / cfg.batch);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<double> bx(static_cast<std::size_t>(cfg.batch) * data.dim);
  std::vector<int> by(cfg.batch);
  ForwardCache cache;
  Grads grads;

  const Phase phases[2] = {{"fp", cfg.fp_steps, std::nullopt},
                           {"train", cfg.steps, cfg.method}};
  std::optional<Method> last_method;
  for (const Phase& phase : phases) {
    last_method = phase.method;
    for (int step = 1; step <= phase.steps; ++step) {
      const int in_epoch = (step - 1) % batches_per_epoch;
      if (in_epoch == 0) shuffle_rng.shuffle(order);
      for (int i = 0; i < cfg.batch; ++i) {
        const std::size_t p = order[static_cast<std::size_t>(
            in_epoch * cfg.batch + i)];
        for (std::size_t d = 0; d < data.dim; ++d)
          bx[static_cast<std::size_t>(i) * data.dim + d] =
              data.x[p * data.dim + d];
        by[static_cast<std::size_t>(i)] = data.y[p];
      }
      Batch batch{bx.data(), by.data(), cfg.batch, static_cast<int>(data.dim)};

      quantize_net(net, phase.method, qc);
      forward_step(net, batch, cache);
      log_line(log, std::string("step phase=") + phase.name +
                        " step=" + std::to_string(step) +
                        " loss=" + fmt_g(cache.loss) + " acc=" +
                        fmt_g(static_cast<double>(cache.correct) / cfg.batch));
      backward_step(net, batch, cache, phase.method, grads);
      sgd_update(net, grads, cfg.lr, cfg.momentum);

      if (step % batches_per_epoch == 0 || step == phase.steps) {
        const int epoch = (step - 1) / batches_per_epoch + 1;
        // Quantize a copy so evaluation never disturbs the training state.
        TinyNet snapshot = net;
        quantize_net(snapshot, phase.method, qc);
        const EvalResult ev = evaluate(snapshot, data, cfg.batch);
        log_line(log, std::string("epoch phase=") + phase.name +
                          " epoch=" + std::to_string(epoch) +
                          " loss=" + fmt_g(ev.loss) +
                          " acc=" + fmt_g(ev.accuracy));
        for (std::size_t li = 0; li < snapshot.layers.size(); ++li) {
          LayerReport r = snapshot_report(snapshot.layers[li], li,
                                          phase.method, cfg.bits);
          log_line(log, std::string("report phase=") + phase.name +
                            " epoch=" + std::to_string(epoch) + " " +
                            r.to_record());
        }
      }
    }
  }

  // Final state: quantize the trained masters once more and evaluate.
  quantize_net(net, last_method, qc);
  const EvalResult ev = evaluate(net, data, cfg.batch);
  RunResult result;
  result.final_loss = ev.loss;
  result.final_accuracy = ev.accuracy;
  log_line(log, "final loss=" + fmt_g(ev.loss) + " acc=" + fmt_g(ev.accuracy));
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    LayerReport r = snapshot_report(net.layers[li], li, last_method, cfg.bits);
    log_line(log, "report phase=final " + r.to_record());
    result.reports.push_back(std::move(r));
  }
  result.net = std::move(net);
  return result;
}

RunResult demo_train(const TrainConfig& cfg,
                     const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::ofstream log(out_dir / "train_log.txt", std::ios::trunc);
  if (!log)
    throw IoError(IoStatus::WriteFailed,
                  "cannot open log in " + out_dir.string());
  RunResult result = run_experiment(cfg, &log);
  log.close();

  std::ofstream summary(out_dir / "summary.txt", std::ios::trunc);
  summary << "final loss=" << fmt_g(result.final_loss)
          << " acc=" << fmt_g(result.final_accuracy) << '\n';
  for (const LayerReport& r : result.reports) summary << r.to_record() << '\n';
  summary.close();

  for (std::size_t li = 0; li < result.net.layers.size(); ++li) {
    const ParamLayer& l = result.net.layers[li];
    const std::string base = "layer" + std::to_string(li);
    write_tensor(l.master_tensor(), out_dir / (base + ".wnqt"));
    if (!cfg.method.has_value()) continue;
    if (*cfg.method == Method::DoReFa) {
      write_tensor(l.forward_tensor(), out_dir / (base + ".quant.wnqt"));
    } else {
      QuantizedTensor qt{l.kind, cfg.bits, l.filter_size(), l.qfilters};
      write_quantized(qt, out_dir / (base + ".wnqq"));
    }
  }
  return result;
}

}  // namespace wnq
