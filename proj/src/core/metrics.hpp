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
#include <optional>
#include <string>
#include <vector>

#include "core/baselines.hpp"
#include "core/tensor.hpp"

namespace wnq {

inline constexpr int kDefaultHistogramBins = 101;

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::uint64_t> counts;
};

// Per-layer diagnostics: relative quantization error, weight histogram and
// tail statistics, and the layer's average quantization levels.
struct LayerReport {
  std::string layer;
  std::optional<Method> method;  // nullopt: no quantizer involved
  int bits = 0;

  bool mse_defined = false;
  double relative_mse = 0.0;  // mean of per_filter_mse over nonzero filters
  std::vector<double> per_filter_mse;
  std::size_t zero_filters = 0;

  Histogram histogram;

  bool tail_defined = false;  // false when std == 0
  double tail_ratio = 0.0;    // max|w| / std(w)

  std::vector<double> mean_levels;  // average level set, original scale

  // One line, fixed field order:
  //   layer=<id> method=<name|none> bits=<K> relative_mse=<v|na>
  //   tail_ratio=<v|na> zero_filters=<n> hist_lo=<v> hist_hi=<v>
  //   hist=<c0,c1,...> levels=<v0,v1,...|na>
  std::string to_record() const;
};

// Mean over filters of ||w_n - q_n||^2 / ||w_n||^2. Requires matching
// filter structure (same N and M); zero-norm filters are excluded from the
// mean (reported via zero_count when given). Throws std::invalid_argument
// on structure mismatch or when every filter is zero.
double relative_mse(const WeightTensor& w, const WeightTensor& q,
                    std::size_t* zero_count = nullptr);

// Histogram over all layer weights: `bins` uniform bins spanning
// [-max|w|, max|w|]. An all-zero layer collapses the span; everything then
// lands in the middle bin.
Histogram weight_histogram(const WeightTensor& t, int bins);

// max|w| / population std over all layer weights; undefined when std == 0.
std::optional<double> tail_ratio(const WeightTensor& t);

// Average sorted level set over the non-degenerate filters of a quantized
// layer, on the original weight scale.
std::vector<double> mean_level_set(const QuantizedTensor& qt);

// Quantizes the layer with the given method/bits (default config, init
// iterations) and reports the resulting error alongside the weight
// distribution. Without a method only the distribution fields are filled.
LayerReport distribution_report(const WeightTensor& layer,
                                std::optional<Method> method, int bits,
                                int bins = kDefaultHistogramBins);

// Report for an already-quantized companion tensor (e.g. loaded from disk).
LayerReport report_against(const WeightTensor& layer,
                           const WeightTensor& dequantized, int bits,
                           int bins = kDefaultHistogramBins);

}  // namespace wnq
