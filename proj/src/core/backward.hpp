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

#include <span>
#include <vector>

#include "core/quantizer.hpp"

namespace wnq {

// Gradient of the loss with respect to the pre-quantization weights of one
// filter. Elements other than the max-abs one pass the upstream gradient
// through unchanged (straight-through estimator); the max-abs element
// receives -sum_{j != i} upstream[j] * w[j] / w[i]. A degenerate context
// (all-zero filter) passes everything through so the filter can recover.
std::vector<double> backward_wnq(const BackwardContext& ctx,
                                 std::span<const double> upstream);

// Baseline backward: identity pass-through for every element.
std::vector<double> backward_lqnet(const BackwardContext& ctx,
                                   std::span<const double> upstream);

// Validates the analytic backward against central finite differences of the
// smooth surrogate f(w) = c * w / max(|w|), with c frozen at the evaluation
// point's max value and the projection replaced by identity. Returns the
// max element-wise deviation between the analytic gradient and the finite
// differences of L(w) = upstream . f(w).
//
// Requires a unique max-abs element with margin > 10 * eps (finite
// differences must not change which element is the max); throws
// std::invalid_argument otherwise. A single-element filter always has
// sufficient margin as long as |w[0]| > 10 * eps.
double fd_check(std::span<const double> w, std::span<const double> upstream,
                double eps);

}  // namespace wnq
