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

#include "core/baselines.hpp"

#include <cmath>
#include <stdexcept>

namespace wnq {

const char* method_name(Method m) {
  switch (m) {
    case Method::Wnq: return "wnq";
    case Method::LqNet: return "lqnet";
    case Method::Residual: return "residual";
    case Method::DoReFa: return "dorefa";
  }
  return "?";
}

std::optional<Method> parse_method(const std::string& name) {
  if (name == "wnq") return Method::Wnq;
  if (name == "lqnet") return Method::LqNet;
  if (name == "residual") return Method::Residual;
  if (name == "dorefa") return Method::DoReFa;
  return std::nullopt;
}

namespace {

BackwardContext make_context(std::span<const double> w) {
  BackwardContext ctx;
  ctx.saved_w.assign(w.begin(), w.end());
  double mav = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double a = std::abs(w[i]);
    if (a > mav) {
      mav = a;
      ctx.max_index = i;
    }
  }
  ctx.degenerate = mav == 0.0;
  return ctx;
}

}  // namespace

FilterQuantResult quantize_lqnet(std::span<const double> w,
                                 const QuantConfig& cfg,
                                 std::span<const double> warm_alpha) {
  cfg.validate();
  if (w.empty()) throw std::invalid_argument("empty filter");

  FilterQuantResult out;
  out.ctx = make_context(w);
  out.mav = 1.0;

  const int iters = warm_alpha.empty() ? cfg.init_iters : cfg.train_iters;
  AlternateResult ar = alternate(w, cfg.bits, iters, cfg.tol, warm_alpha);
  std::vector<std::uint8_t> labels = optimize_codes(w, ar.alpha);
  out.objective = quant_objective(w, labels, ar.alpha);
  ar.trace.push_back(out.objective);

  out.alpha = std::move(ar.alpha);
  out.trace = std::move(ar.trace);
  out.negative_alpha = ar.negative_alpha;
  std::vector<float> alpha_f(out.alpha.begin(), out.alpha.end());
  out.filter = pack_filter(alpha_f, labels, 1.0f);
  return out;
}

FilterQuantResult quantize_residual(std::span<const double> w, int bits) {
  if (w.empty()) throw std::invalid_argument("empty filter");
  FilterQuantResult out;
  out.ctx = make_context(w);
  out.mav = 1.0;
  out.alpha = residual_init(w, bits);
  std::vector<std::uint8_t> labels = residual_codes(w, bits);
  out.objective = quant_objective(w, labels, out.alpha);
  out.trace.push_back(out.objective);
  std::vector<float> alpha_f(out.alpha.begin(), out.alpha.end());
  out.filter = pack_filter(alpha_f, labels, 1.0f);
  return out;
}

double dorefa_qk(double x, int bits) {
  const double scale = static_cast<double>((1 << bits) - 1);
  const double r = std::round(scale * x);  // half away from zero
  return r / scale;
}

DorefaResult quantize_dorefa(std::span<const double> w, int bits) {
  if (bits < 1 || bits > kMaxBits)
    throw std::invalid_argument("bits must be in [1, 8]");
  if (w.empty()) throw std::invalid_argument("empty filter");

  DorefaResult out;
  out.ctx = make_context(w);
  out.values.resize(w.size());

  double max_tanh = 0.0;
  std::vector<double> t(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    t[i] = std::tanh(w[i]);
    max_tanh = std::max(max_tanh, std::abs(t[i]));
  }
  if (max_tanh == 0.0) return out;  // zero output for an all-zero filter

  for (std::size_t i = 0; i < w.size(); ++i) {
    const double x = t[i] / (2.0 * max_tanh) + 0.5;
    out.values[i] = static_cast<float>(2.0 * dorefa_qk(x, bits) - 1.0);
  }
  return out;
}

}  // namespace wnq
