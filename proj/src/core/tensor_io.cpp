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

#include "core/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <vector>

namespace wnq {

namespace {

constexpr char kTensorMagic[4] = {'W', 'N', 'Q', 'T'};
constexpr char kQuantMagic[4] = {'W', 'N', 'Q', 'Q'};
constexpr std::uint8_t kVersion = 0x01;

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");
static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

class Reader {
 public:
  Reader(const std::filesystem::path& path) : path_(path.string()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(IoStatus::OpenFailed, "cannot open " + path_);
    in.seekg(0, std::ios::end);
    buf_.resize(static_cast<std::size_t>(in.tellg()));
    in.seekg(0, std::ios::beg);
    in.read(reinterpret_cast<char*>(buf_.data()),
            static_cast<std::streamsize>(buf_.size()));
    if (!in) throw IoError(IoStatus::OpenFailed, "cannot read " + path_);
  }

  void expect_magic(const char (&magic)[4]) {
    if (buf_.size() < 4 || std::memcmp(buf_.data(), magic, 4) != 0)
      throw IoError(IoStatus::BadMagic, path_ + ": bad magic");
    pos_ = 4;
  }

  std::uint8_t u8() {
    need(1);
    return buf_[pos_++];
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v;
    std::memcpy(&v, buf_.data() + pos_, 8);
    pos_ += 8;
    return v;
  }

  float f32() {
    need(4);
    float v;
    std::memcpy(&v, buf_.data() + pos_, 4);
    pos_ += 4;
    return v;
  }

  void bytes(std::uint8_t* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, buf_.data() + pos_, n);
    pos_ += n;
  }

  std::size_t remaining() const { return buf_.size() - pos_; }

  void expect_end() const {
    if (pos_ != buf_.size())
      throw IoError(IoStatus::TrailingBytes, path_ + ": trailing bytes");
  }

  const std::string& path() const { return path_; }

 private:
  void need(std::size_t n) {
    if (remaining() < n)
      throw IoError(IoStatus::Truncated, path_ + ": truncated payload");
  }

  std::string path_;
  std::vector<std::uint8_t> buf_;
  std::size_t pos_ = 0;
};

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path)
      : path_(path.string()), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError(IoStatus::WriteFailed, "cannot open " + path_);
  }

  void magic(const char (&m)[4]) { out_.write(m, 4); }
  void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
  void u64(std::uint64_t v) { out_.write(reinterpret_cast<const char*>(&v), 8); }
  void f32(float v) { out_.write(reinterpret_cast<const char*>(&v), 4); }
  void bytes(const std::uint8_t* src, std::size_t n) {
    out_.write(reinterpret_cast<const char*>(src),
               static_cast<std::streamsize>(n));
  }

  void finish() {
    out_.flush();
    if (!out_) throw IoError(IoStatus::WriteFailed, "write failed: " + path_);
  }

 private:
  std::string path_;
  std::ofstream out_;
};

LayerKind decode_kind(std::uint8_t b, const std::string& path) {
  if (b == 0) return LayerKind::FullyConnected;
  if (b == 1) return LayerKind::Conv;
  throw IoError(IoStatus::FormatError, path + ": unknown layer kind byte");
}

}  // namespace

WeightTensor read_tensor(const std::filesystem::path& path) {
  Reader r(path);
  r.expect_magic(kTensorMagic);
  if (r.u8() != kVersion)
    throw IoError(IoStatus::BadVersion, r.path() + ": unsupported version");
  const LayerKind kind = decode_kind(r.u8(), r.path());
  const std::uint8_t ndims = r.u8();
  const std::uint8_t expected = kind == LayerKind::Conv ? 4 : 2;
  if (ndims != expected)
    throw IoError(IoStatus::DimKindMismatch,
                  r.path() + ": dim count does not match layer kind");

  std::vector<std::uint64_t> shape(ndims);
  std::uint64_t total = 1;
  for (auto& d : shape) {
    d = r.u64();
    if (d == 0)
      throw IoError(IoStatus::FormatError, r.path() + ": zero dimension");
    if (total > (std::uint64_t{1} << 31) / d)
      throw IoError(IoStatus::FormatError, r.path() + ": tensor too large");
    total *= d;
  }
  if (r.remaining() < total * 4)
    throw IoError(IoStatus::Truncated, r.path() + ": truncated payload");

  std::vector<float> data(static_cast<std::size_t>(total));
  for (auto& v : data) v = r.f32();
  r.expect_end();
  return WeightTensor(kind, std::move(shape), std::move(data));
}

void write_tensor(const WeightTensor& t, const std::filesystem::path& path) {
  Writer w(path);
  w.magic(kTensorMagic);
  w.u8(kVersion);
  w.u8(static_cast<std::uint8_t>(t.kind()));
  w.u8(static_cast<std::uint8_t>(t.shape().size()));
  for (std::uint64_t d : t.shape()) w.u64(d);
  for (float v : t.data()) w.f32(v);
  w.finish();
}

QuantizedTensor read_quantized(const std::filesystem::path& path) {
  Reader r(path);
  r.expect_magic(kQuantMagic);
  if (r.u8() != kVersion)
    throw IoError(IoStatus::BadVersion, r.path() + ": unsupported version");

  QuantizedTensor qt;
  qt.kind = decode_kind(r.u8(), r.path());
  const std::uint8_t k_bits = r.u8();
  if (k_bits < 1 || k_bits > kMaxBits)
    throw IoError(IoStatus::FormatError, r.path() + ": bit-width out of range");
  qt.bits = k_bits;
  const std::uint64_t n = r.u64();
  qt.filter_size = r.u64();
  if (n == 0 || qt.filter_size == 0)
    throw IoError(IoStatus::FormatError, r.path() + ": empty tensor");
  if (n > (std::uint64_t{1} << 31) / qt.filter_size)
    throw IoError(IoStatus::FormatError, r.path() + ": tensor too large");

  const std::size_t plane_bytes =
      static_cast<std::size_t>((qt.filter_size + 7) / 8);
  qt.filters.reserve(static_cast<std::size_t>(n));
  for (std::uint64_t i = 0; i < n; ++i) {
    QuantizedFilter qf;
    qf.m = qt.filter_size;
    qf.mav = r.f32();
    qf.alpha.resize(k_bits);
    for (auto& a : qf.alpha) a = r.f32();
    qf.planes.resize(static_cast<std::size_t>(k_bits) * plane_bytes);
    r.bytes(qf.planes.data(), qf.planes.size());
    qt.filters.push_back(std::move(qf));
  }
  r.expect_end();
  return qt;
}

void write_quantized(const QuantizedTensor& qt,
                     const std::filesystem::path& path) {
  Writer w(path);
  w.magic(kQuantMagic);
  w.u8(kVersion);
  w.u8(static_cast<std::uint8_t>(qt.kind));
  w.u8(static_cast<std::uint8_t>(qt.bits));
  w.u64(qt.filters.size());
  w.u64(qt.filter_size);
  for (const QuantizedFilter& qf : qt.filters) {
    w.f32(qf.mav);
    for (float a : qf.alpha) w.f32(a);
    w.bytes(qf.planes.data(), qf.planes.size());
  }
  w.finish();
}

}  // namespace wnq
