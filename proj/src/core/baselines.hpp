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

#include <optional>
#include <string>

#include "core/quantizer.hpp"

namespace wnq {

enum class Method { Wnq = 0, LqNet = 1, Residual = 2, DoReFa = 3 };

const char* method_name(Method m);
std::optional<Method> parse_method(const std::string& name);

// LQ-Net-style quantization: the same alternating optimization applied to
// the raw weights, without the normalize/rescale steps. The packed filter
// stores mav = 1 with alphas on the weight scale; the forward output
// matches quantize_filter up to rounding, the backward is the identity.
// warm_alpha lives on the weight scale.
FilterQuantResult quantize_lqnet(std::span<const double> w,
                                 const QuantConfig& cfg,
                                 std::span<const double> warm_alpha = {});

// Pure residual quantization: greedy per-bit levels and stage-wise sign
// codes, no alternation. Identity backward.
FilterQuantResult quantize_residual(std::span<const double> w, int bits);

// DoReFa-style fixed-grid quantization:
//   w_q = 2 * q_k(tanh(w) / (2 max|tanh(w)|) + 1/2) - 1,
//   q_k(x) = round((2^k - 1) x) / (2^k - 1), round half away from zero.
// The output lives on a uniform grid in [-1, 1] and is not rescaled.
// Identity backward.
struct DorefaResult {
  std::vector<float> values;
  BackwardContext ctx;
};
DorefaResult quantize_dorefa(std::span<const double> w, int bits);

// Scalar uniform quantizer used by the DoReFa grid, exposed for tests.
double dorefa_qk(double x, int bits);

}  // namespace wnq
