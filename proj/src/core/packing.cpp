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

#include "core/packing.hpp"

#include <stdexcept>

namespace wnq {

std::uint8_t QuantizedFilter::label(std::uint64_t i) const {
  std::uint8_t l = 0;
  for (int k = 0; k < bits(); ++k)
    if (code_bit(k, i)) l |= static_cast<std::uint8_t>(1u << k);
  return l;
}

QuantizedFilter pack_filter(std::span<const float> alpha,
                            std::span<const std::uint8_t> labels, float mav) {
  const int k_bits = static_cast<int>(alpha.size());
  if (k_bits < 1 || k_bits > kMaxBits)
    throw std::invalid_argument("bit-width must be in [1, 8]");
  if (labels.empty())
    throw std::invalid_argument("filter must have at least one element");

  QuantizedFilter qf;
  qf.alpha.assign(alpha.begin(), alpha.end());
  qf.mav = mav;
  qf.m = labels.size();
  qf.planes.assign(static_cast<std::size_t>(k_bits) * qf.plane_bytes(), 0);
  for (std::uint64_t i = 0; i < qf.m; ++i) {
    const std::uint8_t l = labels[static_cast<std::size_t>(i)];
    for (int k = 0; k < k_bits; ++k) {
      if ((l >> k) & 1) {
        qf.planes[static_cast<std::size_t>(k) * qf.plane_bytes() + (i >> 3)] |=
            static_cast<std::uint8_t>(1u << (i & 7));
      }
    }
  }
  return qf;
}

std::vector<float> unpack_filter(const QuantizedFilter& qf) {
  std::vector<float> out(static_cast<std::size_t>(qf.m));
  for (std::uint64_t i = 0; i < qf.m; ++i) {
    double v = 0.0;
    for (int k = 0; k < qf.bits(); ++k) {
      const double a = static_cast<double>(qf.alpha[static_cast<std::size_t>(k)]);
      v += qf.code_bit(k, i) ? a : -a;
    }
    out[static_cast<std::size_t>(i)] =
        static_cast<float>(static_cast<double>(qf.mav) * v);
  }
  return out;
}

WeightTensor QuantizedTensor::dequantize() const {
  const std::uint64_t n = filters.size();
  std::vector<float> data;
  data.reserve(static_cast<std::size_t>(n * filter_size));
  for (const QuantizedFilter& qf : filters) {
    std::vector<float> values = unpack_filter(qf);
    data.insert(data.end(), values.begin(), values.end());
  }
  if (kind == LayerKind::Conv)
    return WeightTensor::conv(n, filter_size, 1, 1, std::move(data));
  return WeightTensor::fully_connected(n, filter_size, std::move(data));
}

}  // namespace wnq
