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

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "core/rng.hpp"
#include "core/tensor.hpp"
#include "core/tensor_io.hpp"
#include "doctest.h"

using namespace wnq;

namespace {

std::filesystem::path temp_file(const char* tag) {
  static int counter = 0;
  return std::filesystem::temp_directory_path() /
         ("wnq_test_" + std::to_string(::getpid()) + "_" + tag + "_" +
          std::to_string(counter++));
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void spit(const std::filesystem::path& p, const std::vector<std::uint8_t>& b) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(b.data()),
            static_cast<std::streamsize>(b.size()));
}

}  // namespace

TEST_CASE("filter views partition the tensor") {
  SUBCASE("conv 2x3x1x1") {
    WeightTensor t = WeightTensor::conv(2, 3, 1, 1, {1, 2, 3, 4, 5, 6});
    auto views = filter_views(t);
    REQUIRE(views.size() == 2);
    CHECK(views[0].values.size() == 3);
    CHECK(views[0].values[0] == 1.0f);
    CHECK(views[0].values[2] == 3.0f);
    CHECK(views[1].values[0] == 4.0f);
    CHECK(views[1].values[2] == 6.0f);
  }
  SUBCASE("fc single row") {
    WeightTensor t = WeightTensor::fully_connected(1, 4, {1, 2, 3, 4});
    auto views = filter_views(t);
    REQUIRE(views.size() == 1);
    CHECK(views[0].values.size() == 4);
  }
  SUBCASE("conv 2x2x3x3 has M = 18") {
    WeightTensor t = WeightTensor::conv(2, 2, 3, 3);
    CHECK(t.filter_size() == 18);
    CHECK(filter_views(t).size() == 2);
  }
  SUBCASE("every element appears in exactly one view") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
      const auto n = 1 + rng.bounded(5);
      const auto c = 1 + rng.bounded(4);
      const auto s = 1 + rng.bounded(3);
      WeightTensor t = WeightTensor::conv(n, c, s, s);
      for (std::size_t i = 0; i < t.size(); ++i)
        t.data()[i] = static_cast<float>(i);
      std::size_t covered = 0;
      float expect = 0.0f;
      for (const FilterView& v : filter_views(t))
        for (float x : v.values) {
          CHECK(x == expect);
          expect += 1.0f;
          ++covered;
        }
      CHECK(covered == t.size());
    }
  }
}

TEST_CASE("tensor construction enforces invariants") {
  CHECK_THROWS_AS(WeightTensor(LayerKind::Conv, {2, 3}, {}),
                  std::invalid_argument);
  CHECK_THROWS_AS(WeightTensor(LayerKind::FullyConnected, {2, 3, 1, 1}, {}),
                  std::invalid_argument);
  CHECK_THROWS_AS(WeightTensor::fully_connected(2, 3, {1.0f}),
                  std::invalid_argument);
  CHECK_THROWS_AS(WeightTensor(LayerKind::FullyConnected, {0, 3}, {}),
                  std::invalid_argument);
}

TEST_CASE("wnqt round trip is byte identical") {
  WeightTensor t =
      WeightTensor::fully_connected(2, 3, {0.5f, -1.25f, 3e-7f, 0.0f, 8.f, 2.f});
  const auto p1 = temp_file("rt1");
  const auto p2 = temp_file("rt2");
  write_tensor(t, p1);
  WeightTensor back = read_tensor(p1);
  CHECK(back.kind() == t.kind());
  CHECK(back.shape() == t.shape());
  write_tensor(back, p2);
  CHECK(slurp(p1) == slurp(p2));
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST_CASE("wnqt reader rejects malformed files") {
  WeightTensor t = WeightTensor::fully_connected(2, 3);
  const auto p = temp_file("bad");
  write_tensor(t, p);
  auto bytes = slurp(p);

  SUBCASE("bad magic") {
    auto bad = bytes;
    bad[0] = 'X';
    bad[1] = 'X';
    spit(p, bad);
    try {
      read_tensor(p);
      FAIL("expected IoError");
    } catch (const IoError& e) {
      CHECK(e.status() == IoStatus::BadMagic);
    }
  }
  SUBCASE("truncated payload") {
    auto bad = bytes;
    bad.resize(bad.size() - 5);
    spit(p, bad);
    try {
      read_tensor(p);
      FAIL("expected IoError");
    } catch (const IoError& e) {
      CHECK(e.status() == IoStatus::Truncated);
    }
  }
  SUBCASE("dim count does not match kind") {
    auto bad = bytes;
    bad[6] = 4;  // kind stays FC but claims 4 dims
    spit(p, bad);
    try {
      read_tensor(p);
      FAIL("expected IoError");
    } catch (const IoError& e) {
      CHECK(e.status() == IoStatus::DimKindMismatch);
    }
  }
  SUBCASE("trailing bytes") {
    auto bad = bytes;
    bad.push_back(0);
    spit(p, bad);
    try {
      read_tensor(p);
      FAIL("expected IoError");
    } catch (const IoError& e) {
      CHECK(e.status() == IoStatus::TrailingBytes);
    }
  }
  SUBCASE("bad version") {
    auto bad = bytes;
    bad[4] = 0x02;
    spit(p, bad);
    try {
      read_tensor(p);
      FAIL("expected IoError");
    } catch (const IoError& e) {
      CHECK(e.status() == IoStatus::BadVersion);
    }
  }
  std::filesystem::remove(p);
}

TEST_CASE("pack and unpack filters") {
  SUBCASE("single bit, two elements") {
    const float alpha[] = {0.5f};
    const std::uint8_t labels[] = {1, 0};  // +1, -1
    QuantizedFilter qf = pack_filter(alpha, labels, 2.0f);
    auto values = unpack_filter(qf);
    REQUIRE(values.size() == 2);
    CHECK(values[0] == 1.0f);
    CHECK(values[1] == -1.0f);
  }
  SUBCASE("two bits, code (+1, -1)") {
    const float alpha[] = {0.5f, 0.25f};
    const std::uint8_t labels[] = {0b01};
    QuantizedFilter qf = pack_filter(alpha, labels, 1.0f);
    CHECK(unpack_filter(qf)[0] == 0.25f);
  }
  SUBCASE("plane storage is ceil(M/8) bytes per plane") {
    const float alpha[] = {0.5f, 0.25f};
    std::vector<std::uint8_t> labels(10, 0b11);
    QuantizedFilter qf = pack_filter(alpha, labels, 1.0f);
    CHECK(qf.plane_bytes() == 2);
    CHECK(qf.planes.size() == 4);
  }
  SUBCASE("K out of range and empty filters are rejected") {
    std::vector<float> alpha9(9, 0.1f);
    const std::uint8_t labels[] = {0};
    CHECK_THROWS_AS(pack_filter(alpha9, labels, 1.0f), std::invalid_argument);
    const float alpha[] = {0.5f};
    CHECK_THROWS_AS(pack_filter(alpha, {}, 1.0f), std::invalid_argument);
  }
  SUBCASE("labels survive pack round trips, exhaustive small cases") {
    for (int bits = 1; bits <= 3; ++bits) {
      for (std::size_t m = 1; m <= 5; ++m) {
        Rng rng(static_cast<std::uint64_t>(bits * 100 + m));
        std::vector<float> alpha(static_cast<std::size_t>(bits));
        for (auto& a : alpha) a = static_cast<float>(rng.uniform(-1, 1));
        std::vector<std::uint8_t> labels(m);
        for (int trial = 0; trial < 32; ++trial) {
          for (auto& l : labels)
            l = static_cast<std::uint8_t>(rng.bounded(1u << bits));
          QuantizedFilter qf = pack_filter(alpha, labels, 0.75f);
          for (std::size_t i = 0; i < m; ++i) CHECK(qf.label(i) == labels[i]);
          CHECK(qf.mav == 0.75f);
          CHECK(qf.alpha == alpha);
        }
      }
    }
  }
}

TEST_CASE("wnqq round trip is byte identical") {
  Rng rng(11);
  QuantizedTensor qt;
  qt.kind = LayerKind::Conv;
  qt.bits = 3;
  qt.filter_size = 10;
  for (int n = 0; n < 4; ++n) {
    std::vector<float> alpha(3);
    for (auto& a : alpha) a = static_cast<float>(rng.uniform(0, 1));
    std::vector<std::uint8_t> labels(10);
    for (auto& l : labels) l = static_cast<std::uint8_t>(rng.bounded(8));
    qt.filters.push_back(
        pack_filter(alpha, labels, static_cast<float>(rng.uniform(0, 2))));
  }
  const auto p1 = temp_file("q1");
  const auto p2 = temp_file("q2");
  write_quantized(qt, p1);
  QuantizedTensor back = read_quantized(p1);
  CHECK(back.bits == qt.bits);
  CHECK(back.kind == qt.kind);
  CHECK(back.filter_size == qt.filter_size);
  write_quantized(back, p2);
  CHECK(slurp(p1) == slurp(p2));

  // Dequantized conv comes back as [N, M, 1, 1].
  WeightTensor deq = back.dequantize();
  CHECK(deq.kind() == LayerKind::Conv);
  CHECK(deq.shape() == std::vector<std::uint64_t>{4, 10, 1, 1});

  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST_CASE("wnqq reader rejects malformed files") {
  QuantizedTensor qt;
  qt.kind = LayerKind::FullyConnected;
  qt.bits = 2;
  qt.filter_size = 3;
  const float alpha[] = {0.5f, 0.25f};
  const std::uint8_t labels[] = {0, 1, 2};
  qt.filters.push_back(pack_filter(alpha, labels, 1.0f));
  const auto p = temp_file("qbad");
  write_quantized(qt, p);
  auto bytes = slurp(p);

  SUBCASE("bad magic") {
    bytes[3] = 'X';
    spit(p, bytes);
    try {
      read_quantized(p);
      FAIL("expected IoError");
    } catch (const IoError& e) {
      CHECK(e.status() == IoStatus::BadMagic);
    }
  }
  SUBCASE("bit width out of range") {
    bytes[6] = 9;
    spit(p, bytes);
    try {
      read_quantized(p);
      FAIL("expected IoError");
    } catch (const IoError& e) {
      CHECK(e.status() == IoStatus::FormatError);
    }
  }
  SUBCASE("truncation") {
    bytes.pop_back();
    spit(p, bytes);
    try {
      read_quantized(p);
      FAIL("expected IoError");
    } catch (const IoError& e) {
      CHECK(e.status() == IoStatus::Truncated);
    }
  }
  std::filesystem::remove(p);
}

// Golden files are produced by an independent writer (tests/golden/) so the
// reader is checked against the documented byte layout, not this library's
// own writer.
TEST_CASE("golden files parse to the documented contents") {
  const std::filesystem::path dir = WNQ_GOLDEN_DIR;

  SUBCASE("fc tensor") {
    WeightTensor t = read_tensor(dir / "fc_2x3.wnqt");
    CHECK(t.kind() == LayerKind::FullyConnected);
    CHECK(t.shape() == std::vector<std::uint64_t>{2, 3});
    const float expect[] = {0.2f, -0.5f, 0.1f, 1.5f, 0.0f, -2.25f};
    for (int i = 0; i < 6; ++i) CHECK(t.data()[i] == expect[i]);
    const auto p = temp_file("golden_fc");
    write_tensor(t, p);
    CHECK(slurp(p) == slurp(dir / "fc_2x3.wnqt"));
    std::filesystem::remove(p);
  }
  SUBCASE("conv tensor") {
    WeightTensor t = read_tensor(dir / "conv_2x2x3x3.wnqt");
    CHECK(t.kind() == LayerKind::Conv);
    CHECK(t.shape() == std::vector<std::uint64_t>{2, 2, 3, 3});
    CHECK(t.data()[0] == 0.0f);
    CHECK(t.data()[35] == doctest::Approx(3.5).epsilon(1e-7));
    const auto p = temp_file("golden_conv");
    write_tensor(t, p);
    CHECK(slurp(p) == slurp(dir / "conv_2x2x3x3.wnqt"));
    std::filesystem::remove(p);
  }
  SUBCASE("quantized tensor") {
    QuantizedTensor qt = read_quantized(dir / "quant_k2.wnqq");
    CHECK(qt.kind == LayerKind::FullyConnected);
    CHECK(qt.bits == 2);
    CHECK(qt.filter_count() == 2);
    CHECK(qt.filter_size == 10);
    CHECK(qt.filters[0].mav == 0.5f);
    CHECK(qt.filters[0].alpha[0] == 0.75f);
    CHECK(qt.filters[0].alpha[1] == 0.25f);
    // Filter 0 labels cycle 0,1,2,3; filter 1 is all (+1,+1).
    for (int i = 0; i < 10; ++i) {
      CHECK(qt.filters[0].label(i) == i % 4);
      CHECK(qt.filters[1].label(i) == 3);
    }
    const auto p = temp_file("golden_q");
    write_quantized(qt, p);
    CHECK(slurp(p) == slurp(dir / "quant_k2.wnqq"));
    std::filesystem::remove(p);
  }
}
