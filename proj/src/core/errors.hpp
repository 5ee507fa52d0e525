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

#include <stdexcept>
#include <string>

namespace wnq {

// Distinct failure classes for the binary file formats. Each maps to its
// own status code at the C boundary.
enum class IoStatus {
  Ok = 0,
  OpenFailed,
  BadMagic,
  BadVersion,
  Truncated,
  TrailingBytes,
  DimKindMismatch,
  FormatError,  // invalid header fields (zero dims, K out of range, ...)
  WriteFailed,
};

class IoError : public std::runtime_error {
 public:
  IoError(IoStatus status, const std::string& what)
      : std::runtime_error(what), status_(status) {}
  IoStatus status() const { return status_; }

 private:
  IoStatus status_;
};

// Raised when a training run becomes numerically invalid (NaN/inf loss).
class TrainError : public std::runtime_error {
 public:
  explicit TrainError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace wnq
