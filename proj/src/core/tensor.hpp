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

namespace wnq {

enum class LayerKind : std::uint8_t { FullyConnected = 0, Conv = 1 };

// Dense real-valued weight tensor, row-major. Filters are the quantization
// group: row n of a fully-connected layer (shape N x C) or output channel n
// of a convolution layer (shape N x C x s x s). Immutable shape; data is
// mutable in place but never resized.
class WeightTensor {
 public:
  WeightTensor(LayerKind kind, std::vector<std::uint64_t> shape,
               std::vector<float> data);

  static WeightTensor fully_connected(std::uint64_t rows, std::uint64_t cols,
                                      std::vector<float> data = {});
  static WeightTensor conv(std::uint64_t n, std::uint64_t c, std::uint64_t kh,
                           std::uint64_t kw, std::vector<float> data = {});

  LayerKind kind() const { return kind_; }
  const std::vector<std::uint64_t>& shape() const { return shape_; }

  // N: number of filters (first dimension).
  std::size_t filter_count() const { return static_cast<std::size_t>(shape_[0]); }
  // M: elements per filter (product of the remaining dimensions).
  std::size_t filter_size() const { return filter_size_; }
  std::size_t size() const { return data_.size(); }

  std::span<float> filter(std::size_t n);
  std::span<const float> filter(std::size_t n) const;

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

 private:
  LayerKind kind_;
  std::vector<std::uint64_t> shape_;
  std::vector<float> data_;
  std::size_t filter_size_ = 0;
};

// Read-only view of one filter.
struct FilterView {
  std::size_t index = 0;
  std::span<const float> values;
};

// All N filter views in index order; concatenated they cover the tensor
// data exactly once.
std::vector<FilterView> filter_views(const WeightTensor& t);

}  // namespace wnq
