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

namespace wnq {

enum class DatasetKind { GaussianBlobs = 0, TwoSpirals = 1 };

const char* dataset_name(DatasetKind d);
std::optional<DatasetKind> parse_dataset(const std::string& name);

// Synthetic 2-D classification data, fully determined by the seed.
//   GaussianBlobs: 4 classes, 512 points, isotropic blobs at (+-2, +-2).
//   TwoSpirals:    2 classes, 512 points, interleaved spirals.
struct Dataset {
  std::size_t dim = 2;
  int classes = 0;
  std::vector<double> x;  // size * dim, row-major
  std::vector<int> y;

  std::size_t size() const { return y.size(); }
  const double* point(std::size_t i) const { return x.data() + i * dim; }
};

Dataset make_dataset(DatasetKind kind, std::uint64_t seed);

}  // namespace wnq
