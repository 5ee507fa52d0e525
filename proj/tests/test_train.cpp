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

#include <cmath>
#include <cstring>
#include <sstream>

#include "core/errors.hpp"
#include "core/rng.hpp"
#include "core/train.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace wnq;

namespace {

// Central finite differences of a scalar functional of a parameter vector.
template <typename Loss>
std::vector<double> fd_gradient(std::vector<double>& params, Loss&& loss,
                                double eps) {
  std::vector<double> grad(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + eps;
    const double lp = loss();
    params[i] = saved - eps;
    const double lm = loss();
    params[i] = saved;
    grad[i] = (lp - lm) / (2.0 * eps);
  }
  return grad;
}

Batch make_batch(const std::vector<double>& x, const std::vector<int>& y,
                 int dim) {
  return Batch{x.data(), y.data(), static_cast<int>(y.size()), dim};
}

}  // namespace

TEST_CASE("layer primitives match finite differences") {
  Rng rng(131);
  SUBCASE("fc") {
    const int batch = 3, in = 4, out = 2;
    std::vector<double> w(out * in), b(out), x(batch * in), dy(batch * out);
    for (auto& v : w) v = rng.normal();
    for (auto& v : b) v = rng.normal();
    for (auto& v : x) v = rng.normal();
    for (auto& v : dy) v = rng.normal();
    auto loss = [&] {
      std::vector<double> y(batch * out);
      fc_forward(w.data(), b.data(), x.data(), y.data(), batch, in, out);
      double l = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) l += dy[i] * y[i];
      return l;
    };
    std::vector<double> dw(out * in), db(out), dx(batch * in);
    std::vector<double> y(batch * out);
    fc_forward(w.data(), b.data(), x.data(), y.data(), batch, in, out);
    fc_backward(w.data(), x.data(), dy.data(), dw.data(), db.data(), dx.data(),
                batch, in, out);
    auto fd_w = fd_gradient(w, loss, 1e-6);
    for (std::size_t i = 0; i < dw.size(); ++i)
      CHECK(dw[i] == doctest::Approx(fd_w[i]).epsilon(1e-6));
    auto fd_x = fd_gradient(x, loss, 1e-6);
    for (std::size_t i = 0; i < dx.size(); ++i)
      CHECK(dx[i] == doctest::Approx(fd_x[i]).epsilon(1e-6));
    auto fd_b = fd_gradient(b, loss, 1e-6);
    for (std::size_t i = 0; i < db.size(); ++i)
      CHECK(db[i] == doctest::Approx(fd_b[i]).epsilon(1e-6));
  }
  SUBCASE("conv with a genuinely spatial input") {
    const int batch = 2, c_in = 2, h = 5, wdt = 4, c_out = 3, s = 3;
    const int ho = h - s + 1, wo = wdt - s + 1;
    std::vector<double> w(c_out * c_in * s * s), b(c_out),
        x(batch * c_in * h * wdt), dy(batch * c_out * ho * wo);
    for (auto& v : w) v = rng.normal();
    for (auto& v : b) v = rng.normal();
    for (auto& v : x) v = rng.normal();
    for (auto& v : dy) v = rng.normal();
    auto loss = [&] {
      std::vector<double> y(batch * c_out * ho * wo);
      conv_forward(w.data(), b.data(), x.data(), y.data(), batch, c_in, h, wdt,
                   c_out, s);
      double l = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) l += dy[i] * y[i];
      return l;
    };
    std::vector<double> dw(w.size()), db(c_out), dx(x.size());
    conv_backward(w.data(), x.data(), dy.data(), dw.data(), db.data(),
                  dx.data(), batch, c_in, h, wdt, c_out, s);
    auto fd_w = fd_gradient(w, loss, 1e-6);
    for (std::size_t i = 0; i < dw.size(); ++i)
      CHECK(dw[i] == doctest::Approx(fd_w[i]).epsilon(1e-6));
    auto fd_x = fd_gradient(x, loss, 1e-6);
    for (std::size_t i = 0; i < dx.size(); ++i)
      CHECK(dx[i] == doctest::Approx(fd_x[i]).epsilon(1e-6));
  }
  SUBCASE("global average pool") {
    const int batch = 2, c = 3, h = 2, wdt = 2;
    std::vector<double> x(batch * c * h * wdt), dy(batch * c);
    for (auto& v : x) v = rng.normal();
    for (auto& v : dy) v = rng.normal();
    auto loss = [&] {
      std::vector<double> y(batch * c);
      global_avg_pool_forward(x.data(), y.data(), batch, c, h, wdt);
      double l = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) l += dy[i] * y[i];
      return l;
    };
    std::vector<double> dx(x.size());
    global_avg_pool_backward(dy.data(), dx.data(), batch, c, h, wdt);
    auto fd_x = fd_gradient(x, loss, 1e-6);
    for (std::size_t i = 0; i < dx.size(); ++i)
      CHECK(dx[i] == doctest::Approx(fd_x[i]).epsilon(1e-8));
  }
  SUBCASE("softmax cross entropy") {
    const int batch = 4, classes = 3;
    std::vector<double> logits(batch * classes);
    std::vector<int> labels = {0, 2, 1, 2};
    for (auto& v : logits) v = rng.normal();
    auto loss = [&] {
      std::vector<double> probs(logits.size());
      return softmax_ce_forward(logits.data(), labels.data(), batch, classes,
                                probs.data());
    };
    std::vector<double> probs(logits.size());
    softmax_ce_forward(logits.data(), labels.data(), batch, classes,
                       probs.data());
    std::vector<double> dlogits(logits.size());
    softmax_ce_backward(probs.data(), labels.data(), batch, classes,
                        dlogits.data());
    auto fd = fd_gradient(logits, loss, 1e-6);
    for (std::size_t i = 0; i < dlogits.size(); ++i)
      CHECK(dlogits[i] == doctest::Approx(fd[i]).epsilon(1e-6));
  }
}

TEST_CASE("datasets are seeded and balanced") {
  Dataset d1 = make_dataset(DatasetKind::GaussianBlobs, 5);
  Dataset d2 = make_dataset(DatasetKind::GaussianBlobs, 5);
  CHECK(d1.x == d2.x);
  CHECK(d1.size() == 512);
  CHECK(d1.classes == 4);
  int counts[4] = {0, 0, 0, 0};
  for (int y : d1.y) ++counts[y];
  for (int c : counts) CHECK(c == 128);
  Dataset d3 = make_dataset(DatasetKind::GaussianBlobs, 6);
  CHECK(d1.x != d3.x);
  Dataset sp = make_dataset(DatasetKind::TwoSpirals, 5);
  CHECK(sp.classes == 2);
  CHECK(sp.size() == 512);
}

TEST_CASE("zero-weight net yields the uniform-softmax loss") {
  TinyNet net = build_net(NetKind::Fc2, 2, 2, 4, 1);
  for (ParamLayer& l : net.layers) {
    std::fill(l.weights.begin(), l.weights.end(), 0.0);
    std::fill(l.bias.begin(), l.bias.end(), 0.0);
    l.forward_w = l.weights;
  }
  const std::vector<double> x = {0.3, -1.0, 2.0, 0.5, -0.7, 0.1, 0.9, 0.9};
  const std::vector<int> y = {0, 1, 0, 1};
  ForwardCache cache;
  const double loss = forward_step(net, make_batch(x, y, 2), cache);
  CHECK(loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("high-bit quantization is near lossless") {
  const Dataset data = make_dataset(DatasetKind::GaussianBlobs, 3);
  TinyNet net = build_net(NetKind::Fc2, 2, data.classes, 16, 3);
  std::vector<double> x(data.x.begin(), data.x.begin() + 64 * 2);
  std::vector<int> y(data.y.begin(), data.y.begin() + 64);
  const Batch batch = make_batch(x, y, 2);

  ForwardCache cache;
  QuantConfig qc;
  quantize_net(net, std::nullopt, qc);
  const double fp_loss = forward_step(net, batch, cache);

  qc.bits = 8;
  quantize_net(net, Method::Wnq, qc);
  const double q_loss = forward_step(net, batch, cache);
  CHECK(std::abs(q_loss - fp_loss) / std::abs(fp_loss) < 1e-2);
}

TEST_CASE("wnq and lqnet share the forward at step 0") {
  const Dataset data = make_dataset(DatasetKind::GaussianBlobs, 9);
  std::vector<double> x(data.x.begin(), data.x.begin() + 64 * 2);
  std::vector<int> y(data.y.begin(), data.y.begin() + 64);
  const Batch batch = make_batch(x, y, 2);

  QuantConfig qc;
  qc.bits = 2;
  ForwardCache ca, cb;
  TinyNet a = build_net(NetKind::Fc2, 2, data.classes, 32, 9);
  TinyNet b = build_net(NetKind::Fc2, 2, data.classes, 32, 9);
  quantize_net(a, Method::Wnq, qc);
  quantize_net(b, Method::LqNet, qc);
  const double la = forward_step(a, batch, ca);
  const double lb = forward_step(b, batch, cb);
  // Same learned levels on matched warm starts; the packed float forms of
  // the two routes round independently, so agreement is up to rounding.
  CHECK(std::abs(la - lb) <= 1e-6 * std::abs(la));

  SUBCASE("backward routing differs only at per-filter max elements") {
    // Same net state and upstream: the routing rule is the only difference.
    Grads ga, gb;
    backward_step(a, batch, ca, Method::Wnq, ga);
    backward_step(a, batch, ca, Method::LqNet, gb);
    for (std::size_t li = 0; li < a.layers.size(); ++li) {
      const ParamLayer& l = a.layers[li];
      const std::size_t m = l.filter_size();
      bool some_difference = false;
      for (std::size_t n = 0; n < l.filter_count(); ++n) {
        for (std::size_t i = 0; i < m; ++i) {
          const std::size_t idx = n * m + i;
          if (i == l.ctx[n].max_index) {
            if (ga.dw[li][idx] != gb.dw[li][idx]) some_difference = true;
          } else {
            CHECK(ga.dw[li][idx] == gb.dw[li][idx]);
          }
        }
      }
      CHECK(some_difference);
    }
  }
}

TEST_CASE("quantization never touches the master weights") {
  const Dataset data = make_dataset(DatasetKind::GaussianBlobs, 4);
  TinyNet net = build_net(NetKind::Fc2, 2, data.classes, 8, 4);
  std::vector<double> x(data.x.begin(), data.x.begin() + 32 * 2);
  std::vector<int> y(data.y.begin(), data.y.begin() + 32);

  auto checksum = [&] {
    std::vector<double> all;
    for (const ParamLayer& l : net.layers) {
      all.insert(all.end(), l.weights.begin(), l.weights.end());
      all.insert(all.end(), l.bias.begin(), l.bias.end());
    }
    return all;
  };
  const auto before = checksum();
  QuantConfig qc;
  qc.bits = 2;
  for (Method m : {Method::Wnq, Method::LqNet, Method::Residual,
                   Method::DoReFa}) {
    quantize_net(net, m, qc);
    ForwardCache cache;
    forward_step(net, make_batch(x, y, 2), cache);
    CHECK(checksum() == before);
  }
}

TEST_CASE("backward through the quantized net matches finite differences") {
  // Frozen-scale surrogate: the projection is dropped and the per-filter
  // rescale is pinned at the base point, which is exactly the function the
  // analytic backward differentiates.
  const Dataset data = make_dataset(DatasetKind::GaussianBlobs, 21);
  TinyNet net = build_net(NetKind::Fc2, 2, data.classes, 6, 21);
  std::vector<double> x(data.x.begin(), data.x.begin() + 16 * 2);
  std::vector<int> y(data.y.begin(), data.y.begin() + 16);
  const Batch batch = make_batch(x, y, 2);

  QuantConfig qc;
  qc.bits = 2;
  quantize_net(net, Method::Wnq, qc, /*surrogate=*/true);
  ForwardCache cache;
  forward_step(net, batch, cache);
  Grads grads;
  backward_step(net, batch, cache, Method::Wnq, grads);

  const double eps = 1e-4;
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    auto loss_at = [&] {
      quantize_net(net, Method::Wnq, qc, /*surrogate=*/true);
      ForwardCache c2;
      return forward_step(net, batch, c2);
    };
    auto fd = fd_gradient(net.layers[li].weights, loss_at, eps);
    double max_dev = 0.0;
    for (std::size_t i = 0; i < fd.size(); ++i)
      max_dev = std::max(max_dev, std::abs(fd[i] - grads.dw[li][i]));
    CHECK(max_dev < 1e-3);
  }
}

TEST_CASE("sgd with zero momentum composes plain gradient steps") {
  const Dataset data = make_dataset(DatasetKind::GaussianBlobs, 13);
  std::vector<double> x(data.x.begin(), data.x.begin() + 32 * 2);
  std::vector<int> y(data.y.begin(), data.y.begin() + 32);
  const Batch batch = make_batch(x, y, 2);
  const double lr = 0.1;

  TinyNet a = build_net(NetKind::Fc2, 2, data.classes, 8, 13);
  TinyNet b = build_net(NetKind::Fc2, 2, data.classes, 8, 13);
  QuantConfig qc;

  for (int step = 0; step < 2; ++step) {
    quantize_net(a, std::nullopt, qc);
    ForwardCache cache;
    forward_step(a, batch, cache);
    Grads grads;
    backward_step(a, batch, cache, std::nullopt, grads);
    sgd_update(a, grads, lr, 0.0);

    quantize_net(b, std::nullopt, qc);
    ForwardCache cb;
    forward_step(b, batch, cb);
    Grads gb;
    backward_step(b, batch, cb, std::nullopt, gb);
    for (std::size_t li = 0; li < b.layers.size(); ++li) {
      for (std::size_t i = 0; i < b.layers[li].weights.size(); ++i)
        b.layers[li].weights[i] -= lr * gb.dw[li][i];
      for (std::size_t i = 0; i < b.layers[li].bias.size(); ++i)
        b.layers[li].bias[i] -= lr * gb.db[li][i];
    }
  }
  for (std::size_t li = 0; li < a.layers.size(); ++li) {
    CHECK(a.layers[li].weights == b.layers[li].weights);
    CHECK(a.layers[li].bias == b.layers[li].bias);
  }
}

TEST_CASE("full-precision training reaches 95 percent on blobs") {
  TrainConfig cfg;
  cfg.method = std::nullopt;
  cfg.fp_steps = 2000;
  cfg.steps = 0;
  cfg.seed = 1;
  RunResult r = run_experiment(cfg, nullptr);
  CHECK(r.final_accuracy >= 0.95);
}

TEST_CASE("conv1 topology trains on blobs") {
  TrainConfig cfg;
  cfg.net = NetKind::Conv1;
  cfg.method = std::nullopt;
  cfg.fp_steps = 600;
  cfg.steps = 0;
  cfg.seed = 2;
  RunResult r = run_experiment(cfg, nullptr);
  CHECK(r.final_accuracy >= 0.9);
}

TEST_CASE("identical configs produce identical logs") {
  TrainConfig cfg;
  cfg.method = Method::Wnq;
  cfg.fp_steps = 40;
  cfg.steps = 40;
  cfg.seed = 7;
  std::ostringstream log1, log2;
  run_experiment(cfg, &log1);
  run_experiment(cfg, &log2);
  CHECK(log1.str() == log2.str());
  CHECK(log1.str().find("run method=wnq") == 0);
  CHECK(log1.str().find("report phase=final") != std::string::npos);
}

TEST_CASE("diverging training aborts with a diagnostic") {
  TrainConfig cfg;
  cfg.method = std::nullopt;
  cfg.fp_steps = 200;
  cfg.steps = 0;
  cfg.lr = 1e18;
  CHECK_THROWS_AS(run_experiment(cfg, nullptr), TrainError);
}
