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

#include "core/datasets.hpp"

#include <cmath>

#include "core/rng.hpp"

namespace wnq {

const char* dataset_name(DatasetKind d) {
  switch (d) {
    case DatasetKind::GaussianBlobs: return "blobs";
    case DatasetKind::TwoSpirals: return "spirals";
  }
  return "?";
}

std::optional<DatasetKind> parse_dataset(const std::string& name) {
  if (name == "blobs") return DatasetKind::GaussianBlobs;
  if (name == "spirals") return DatasetKind::TwoSpirals;
  return std::nullopt;
}

namespace {

constexpr std::size_t kPoints = 512;

Dataset make_blobs(Rng& rng) {
  Dataset d;
  d.classes = 4;
  d.x.reserve(kPoints * 2);
  d.y.reserve(kPoints);
  static constexpr double kCenters[4][2] = {
      {2.0, 2.0}, {-2.0, 2.0}, {-2.0, -2.0}, {2.0, -2.0}};
  constexpr double kSigma = 0.6;
  for (std::size_t i = 0; i < kPoints; ++i) {
    const int c = static_cast<int>(i % 4);
    d.x.push_back(kCenters[c][0] + kSigma * rng.normal());
    d.x.push_back(kCenters[c][1] + kSigma * rng.normal());
    d.y.push_back(c);
  }
  return d;
}

Dataset make_spirals(Rng& rng) {
  Dataset d;
  d.classes = 2;
  d.x.reserve(kPoints * 2);
  d.y.reserve(kPoints);
  constexpr double kTurns = 1.5;
  constexpr double kNoise = 0.05;
  for (std::size_t i = 0; i < kPoints; ++i) {
    const int c = static_cast<int>(i % 2);
    const double u = rng.uniform();
    const double phi = kTurns * 2.0 * M_PI * u + (c == 0 ? 0.0 : M_PI);
    const double r = 0.3 + 1.7 * u;
    d.x.push_back(r * std::cos(phi) + kNoise * rng.normal());
    d.x.push_back(r * std::sin(phi) + kNoise * rng.normal());
    d.y.push_back(c);
  }
  return d;
}

}  // namespace

Dataset make_dataset(DatasetKind kind, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0));
  return kind == DatasetKind::GaussianBlobs ? make_blobs(rng)
                                            : make_spirals(rng);
}

}  // namespace wnq
