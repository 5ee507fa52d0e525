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

#include "core/tensor.hpp"

namespace wnq {

// Upper bound on the bit-width accepted by the packed representation and
// the WNQQ format.
inline constexpr int kMaxBits = 8;

// One quantized filter: K level parameters alpha, K bit-planes of M sign
// bits (bit = 1 means code +1, bit = 0 means code -1), and the stored
// scale mav. Element i dequantizes to mav * sum_k alpha[k] * sign(k, i).
//
// Planes are stored plane-major: plane k occupies plane_bytes() consecutive
// bytes starting at k * plane_bytes(), LSB-first within each byte. Padding
// bits in the last byte of a plane are zero on writes and ignored on reads.
struct QuantizedFilter {
  std::vector<float> alpha;
  std::vector<std::uint8_t> planes;
  float mav = 0.0f;
  std::uint64_t m = 0;

  int bits() const { return static_cast<int>(alpha.size()); }
  std::size_t plane_bytes() const {
    return static_cast<std::size_t>((m + 7) / 8);
  }

  // Sign bit of plane k for element i.
  bool code_bit(int k, std::uint64_t i) const {
    const std::uint8_t byte =
        planes[static_cast<std::size_t>(k) * plane_bytes() + (i >> 3)];
    return (byte >> (i & 7)) & 1;
  }

  // Code label of element i: bit k of the label is the sign of plane k.
  std::uint8_t label(std::uint64_t i) const;
};

// Packs per-element code labels (bit k of labels[i] set means +1 on plane k)
// into bit-planes. alpha carries K entries, K in [1, 8]; labels must be
// nonempty. Throws std::invalid_argument otherwise.
QuantizedFilter pack_filter(std::span<const float> alpha,
                            std::span<const std::uint8_t> labels, float mav);

// Dequantizes: element i = mav * sum_k alpha[k] * (code_bit(k, i) ? +1 : -1),
// accumulated in double and rounded to float once.
std::vector<float> unpack_filter(const QuantizedFilter& qf);

// A whole quantized layer: N filters sharing K and M.
struct QuantizedTensor {
  LayerKind kind = LayerKind::FullyConnected;
  int bits = 0;
  std::uint64_t filter_size = 0;  // M
  std::vector<QuantizedFilter> filters;

  std::size_t filter_count() const { return filters.size(); }

  // Materializes the dequantized weights. The packed format keeps only
  // N and M, so a Conv layer comes back as [N, M, 1, 1] and a
  // fully-connected layer as [N, M].
  WeightTensor dequantize() const;
};

}  // namespace wnq
