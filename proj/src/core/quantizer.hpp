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
#include <span>
#include <vector>

#include "core/packing.hpp"

namespace wnq {

struct QuantConfig {
  int bits = 2;         // K, in [1, 8]
  int init_iters = 20;  // alternating iterations when no warm start is given
  int train_iters = 1;  // alternating iterations per training step
  double tol = 1e-8;    // stop when the objective decrease falls below this

  void validate() const;
};

// Result of dividing a filter by its maximum absolute value (mav). When the
// filter is all zeros the normalization is degenerate: values stay zero and
// downstream stages skip the filter.
struct NormalizedFilter {
  std::vector<double> values;  // in [-1, 1]; |values[max_index]| == 1 exactly
  double mav = 0.0;
  std::size_t max_index = 0;   // first occurrence of the maximum
  bool degenerate = false;
};

NormalizedFilter normalize(std::span<const double> w);
NormalizedFilter normalize(std::span<const float> w);

// One representable quantization value alpha^T e together with its code
// label (bit k of the label set means e_k = +1).
struct Level {
  double value = 0.0;
  std::uint8_t label = 0;
};

// All 2^K values alpha^T e, sorted ascending by value; equal values keep
// lexicographic code order with -1 before +1 (e_0 compared first).
std::vector<Level> level_set(std::span<const double> alpha);

// Nearest level to x; exact distance ties go to the larger level value,
// and equal-valued duplicates resolve to the lexicographically smallest
// code. levels must be a sorted level_set output.
Level project(double x, std::span<const Level> levels);

// Least-squares levels for fixed codes: argmin_alpha ||values - B alpha||^2.
// Singular B^T B yields the minimum-norm solution.
std::vector<double> optimize_alpha(std::span<const double> values,
                                   std::span<const std::uint8_t> labels,
                                   int bits);

// Optimal codes for fixed alpha: per-element projection onto the level set.
std::vector<std::uint8_t> optimize_codes(std::span<const double> values,
                                         std::span<const double> alpha);

// Greedy per-bit levels: alpha_k = mean |r|, r -= alpha_k * sign(r), with
// sign(0) = +1. Used both as the alternation warm start and as the
// standalone residual baseline.
std::vector<double> residual_init(std::span<const double> values, int bits);

// Stage-wise residual codes matching residual_init's alphas.
std::vector<std::uint8_t> residual_codes(std::span<const double> values,
                                         int bits);

double quant_objective(std::span<const double> values,
                       std::span<const std::uint8_t> labels,
                       std::span<const double> alpha);

struct AlternateResult {
  std::vector<double> alpha;
  std::vector<std::uint8_t> labels;
  double objective = 0.0;
  std::vector<double> trace;  // objective after each iteration, non-increasing
  bool negative_alpha = false;
};

// Alternating optimization of min ||values - B alpha||^2: each iteration
// projects codes for the current alpha, then re-solves alpha for the new
// codes. Runs `iters` iterations or stops once the objective decrease
// drops below tol. Starts from warm_alpha when given, residual_init
// otherwise.
AlternateResult alternate(std::span<const double> values, int bits, int iters,
                          double tol, std::span<const double> warm_alpha = {});

// Context captured by the forward pass for the backward rules.
struct BackwardContext {
  std::vector<double> saved_w;
  std::size_t max_index = 0;
  bool degenerate = false;
};

struct FilterQuantResult {
  QuantizedFilter filter;     // float-precision packed form; dequantize with
                              // unpack_filter
  std::vector<double> alpha;  // full-precision levels (warm start state)
  double mav = 0.0;           // full-precision stored scale (1 for lqnet)
  BackwardContext ctx;
  double objective = 0.0;
  std::vector<double> trace;
  bool negative_alpha = false;

  // Dequantization at full precision (mav * alpha^T e per element), before
  // any float rounding from the packed form.
  std::vector<double> dequantized() const;
};

// Full forward quantization of one filter: normalize by mav, learn levels
// on the normalized values (warm-started alternation), project, then scale
// the result back by mav (stored, not differentiated). A degenerate filter
// quantizes to zeros. Uses cfg.train_iters iterations when warm_alpha is
// given, cfg.init_iters otherwise; warm_alpha lives on the normalized scale.
FilterQuantResult quantize_filter(std::span<const double> w,
                                  const QuantConfig& cfg,
                                  std::span<const double> warm_alpha = {});
FilterQuantResult quantize_filter(std::span<const float> w,
                                  const QuantConfig& cfg,
                                  std::span<const double> warm_alpha = {});

}  // namespace wnq
