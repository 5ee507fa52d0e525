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

#include "core/tensor.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace wnq {

namespace {

std::size_t checked_element_count(const std::vector<std::uint64_t>& shape) {
  std::uint64_t total = 1;
  for (std::uint64_t d : shape) {
    if (d == 0) throw std::invalid_argument("tensor dimension must be positive");
    if (total > std::numeric_limits<std::uint64_t>::max() / d)
      throw std::invalid_argument("tensor shape overflows element count");
    total *= d;
  }
  if (total > (std::uint64_t{1} << 31))
    throw std::invalid_argument("tensor too large");
  return static_cast<std::size_t>(total);
}

}  // namespace

WeightTensor::WeightTensor(LayerKind kind, std::vector<std::uint64_t> shape,
                           std::vector<float> data)
    : kind_(kind), shape_(std::move(shape)), data_(std::move(data)) {
  const std::size_t expected_dims = kind_ == LayerKind::Conv ? 4 : 2;
  if (shape_.size() != expected_dims)
    throw std::invalid_argument(
        "tensor rank does not match layer kind: got " +
        std::to_string(shape_.size()) + " dims");
  const std::size_t total = checked_element_count(shape_);
  if (data_.empty()) data_.assign(total, 0.0f);
  if (data_.size() != total)
    throw std::invalid_argument("tensor data length does not match shape");
  filter_size_ = total / static_cast<std::size_t>(shape_[0]);
}

WeightTensor WeightTensor::fully_connected(std::uint64_t rows,
                                           std::uint64_t cols,
                                           std::vector<float> data) {
  return WeightTensor(LayerKind::FullyConnected, {rows, cols}, std::move(data));
}

WeightTensor WeightTensor::conv(std::uint64_t n, std::uint64_t c,
                                std::uint64_t kh, std::uint64_t kw,
                                std::vector<float> data) {
  return WeightTensor(LayerKind::Conv, {n, c, kh, kw}, std::move(data));
}

std::span<float> WeightTensor::filter(std::size_t n) {
  if (n >= filter_count()) throw std::out_of_range("filter index");
  return std::span<float>(data_.data() + n * filter_size_, filter_size_);
}

std::span<const float> WeightTensor::filter(std::size_t n) const {
  if (n >= filter_count()) throw std::out_of_range("filter index");
  return std::span<const float>(data_.data() + n * filter_size_, filter_size_);
}

std::vector<FilterView> filter_views(const WeightTensor& t) {
  std::vector<FilterView> views;
  views.reserve(t.filter_count());
  for (std::size_t n = 0; n < t.filter_count(); ++n)
    views.push_back(FilterView{n, t.filter(n)});
  return views;
}

}  // namespace wnq
