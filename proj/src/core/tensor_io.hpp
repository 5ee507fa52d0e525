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

#include <filesystem>

#include "core/errors.hpp"
#include "core/packing.hpp"
#include "core/tensor.hpp"

namespace wnq {

// WNQT float-tensor file, little-endian throughout:
//   magic "WNQT" | version 0x01 | kind byte (0 = FC, 1 = Conv) |
//   dim-count byte | dims as u64 | data as f32, row-major.
//
// WNQQ quantized file:
//   magic "WNQQ" | version 0x01 | kind byte | K byte | N u64 | M u64 |
//   then per filter: mav f32, K alphas f32, K bit-planes of ceil(M/8)
//   bytes each, LSB-first.
//
// Readers throw IoError with a distinct IoStatus per failure class.

WeightTensor read_tensor(const std::filesystem::path& path);
void write_tensor(const WeightTensor& t, const std::filesystem::path& path);

QuantizedTensor read_quantized(const std::filesystem::path& path);
void write_quantized(const QuantizedTensor& qt,
                     const std::filesystem::path& path);

}  // namespace wnq
