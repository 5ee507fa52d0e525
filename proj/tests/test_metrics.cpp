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

#include <cmath>
#include <stdexcept>
#include <numeric>

#include "core/metrics.hpp"
#include "core/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace wnq;

TEST_CASE("relative_mse") {
  SUBCASE("single filter worked example") {
    WeightTensor w = WeightTensor::fully_connected(1, 2, {1.0f, 0.0f});
    WeightTensor q = WeightTensor::fully_connected(1, 2, {0.5f, 0.0f});
    CHECK(relative_mse(w, q) == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("identity gives zero") {
    WeightTensor w = WeightTensor::fully_connected(2, 2, {1, 2, 3, 4});
    CHECK(relative_mse(w, w) == 0.0);
  }
  SUBCASE("mean over filters") {
    // Filter errors 0.1 and 0.3.
    WeightTensor w = WeightTensor::fully_connected(2, 1, {1.0f, 1.0f});
    const float e1 = 1.0f - std::sqrt(0.1f);
    const float e2 = 1.0f - std::sqrt(0.3f);
    WeightTensor q = WeightTensor::fully_connected(2, 1, {e1, e2});
    CHECK(relative_mse(w, q) == doctest::Approx(0.2).epsilon(1e-6));
  }
  SUBCASE("zero filters are excluded and counted") {
    WeightTensor w = WeightTensor::fully_connected(2, 2, {0, 0, 1, 0});
    WeightTensor q = WeightTensor::fully_connected(2, 2, {0, 0, 0.5f, 0});
    std::size_t zeros = 0;
    CHECK(relative_mse(w, q, &zeros) == doctest::Approx(0.25));
    CHECK(zeros == 1);
  }
  SUBCASE("all-zero tensor is an error") {
    WeightTensor w = WeightTensor::fully_connected(1, 2, {0, 0});
    CHECK_THROWS_AS(relative_mse(w, w), std::invalid_argument);
  }
  SUBCASE("structure mismatch is an error") {
    WeightTensor w = WeightTensor::fully_connected(1, 2, {1, 2});
    WeightTensor q = WeightTensor::fully_connected(2, 1, {1, 2});
    CHECK_THROWS_AS(relative_mse(w, q), std::invalid_argument);
  }
  SUBCASE("invariant under exact rescaling") {
    Rng rng(107);
    for (int t = 0; t < 20; ++t) {
      std::vector<float> wv(12), qv(12);
      for (auto& v : wv) v = static_cast<float>(rng.normal());
      for (std::size_t i = 0; i < 12; ++i)
        qv[i] = wv[i] + 0.1f * static_cast<float>(rng.normal());
      WeightTensor w = WeightTensor::fully_connected(3, 4, wv);
      WeightTensor q = WeightTensor::fully_connected(3, 4, qv);
      const double base = relative_mse(w, q);
      for (float c : {0.5f, 2.0f, -4.0f, 1024.0f}) {
        std::vector<float> cw(wv), cq(qv);
        for (auto& v : cw) v *= c;
        for (auto& v : cq) v *= c;
        const double scaled =
            relative_mse(WeightTensor::fully_connected(3, 4, cw),
                         WeightTensor::fully_connected(3, 4, cq));
        CHECK(oracles::double_distance(base, scaled) <= 4);
      }
    }
  }
  SUBCASE("nonnegative, zero only at equality") {
    Rng rng(109);
    std::vector<float> wv(8), qv(8);
    for (auto& v : wv) v = static_cast<float>(rng.normal());
    qv = wv;
    qv[3] += 1e-3f;
    WeightTensor w = WeightTensor::fully_connected(2, 4, wv);
    WeightTensor q = WeightTensor::fully_connected(2, 4, qv);
    CHECK(relative_mse(w, q) > 0.0);
  }
}

TEST_CASE("weight_histogram") {
  SUBCASE("counts sum to the element count and span is symmetric") {
    Rng rng(113);
    std::vector<float> v(60);
    for (auto& x : v) x = static_cast<float>(rng.normal());
    WeightTensor t = WeightTensor::fully_connected(6, 10, v);
    Histogram h = weight_histogram(t, 101);
    CHECK(h.counts.size() == 101);
    CHECK(std::accumulate(h.counts.begin(), h.counts.end(), std::uint64_t{0}) ==
          60);
    CHECK(h.lo == -h.hi);
    double mav = 0.0;
    for (float x : v) mav = std::max(mav, std::abs(static_cast<double>(x)));
    CHECK(h.hi == doctest::Approx(mav));
  }
  SUBCASE("all-zero layer collapses to the middle bin") {
    WeightTensor t = WeightTensor::fully_connected(1, 5);
    Histogram h = weight_histogram(t, 101);
    CHECK(h.counts[50] == 5);
  }
}

TEST_CASE("tail_ratio") {
  SUBCASE("closed form for an equally spaced grid") {
    // Values -a, -a+d, ..., a with d = 2a/(n-1): variance = d^2 (n^2 - 1)/12.
    const int n = 11;
    const double a = 2.0;
    const double d = 2.0 * a / (n - 1);
    std::vector<float> v(n);
    for (int i = 0; i < n; ++i) v[i] = static_cast<float>(-a + i * d);
    WeightTensor t = WeightTensor::fully_connected(1, n, v);
    const double want = a / std::sqrt(d * d * (n * n - 1.0) / 12.0);
    auto got = tail_ratio(t);
    REQUIRE(got.has_value());
    CHECK(*got == doctest::Approx(want).epsilon(1e-6));
  }
  SUBCASE("constant layer is undefined") {
    WeightTensor t = WeightTensor::fully_connected(1, 4, {2, 2, 2, 2});
    CHECK_FALSE(tail_ratio(t).has_value());
  }
}

TEST_CASE("distribution_report") {
  Rng rng(127);
  std::vector<float> v(64);
  for (auto& x : v) x = static_cast<float>(rng.normal());
  WeightTensor t = WeightTensor::fully_connected(4, 16, v);

  SUBCASE("no method: distribution only") {
    LayerReport r = distribution_report(t, std::nullopt, 0);
    CHECK_FALSE(r.mse_defined);
    CHECK(r.tail_defined);
    CHECK(r.mean_levels.empty());
    CHECK(r.histogram.counts.size() == 101);
  }
  SUBCASE("quantized report concentrates on 2^K values per filter") {
    LayerReport r = distribution_report(t, Method::Wnq, 2);
    CHECK(r.mse_defined);
    CHECK(r.relative_mse > 0.0);
    CHECK(r.per_filter_mse.size() == 4);
    CHECK(r.mean_levels.size() == 4);
    // relative_mse equals the mean of the per-filter values.
    const double mean = std::accumulate(r.per_filter_mse.begin(),
                                        r.per_filter_mse.end(), 0.0) /
                        4.0;
    CHECK(r.relative_mse == doctest::Approx(mean).epsilon(1e-12));
  }
  SUBCASE("dorefa report uses the fixed grid") {
    LayerReport r = distribution_report(t, Method::DoReFa, 2);
    REQUIRE(r.mean_levels.size() == 4);
    CHECK(r.mean_levels[0] == -1.0);
    CHECK(r.mean_levels[3] == 1.0);
    CHECK(r.mse_defined);
  }
  SUBCASE("record line has the documented field order") {
    WeightTensor small = WeightTensor::fully_connected(1, 2, {0.5f, -0.25f});
    LayerReport r = distribution_report(small, std::nullopt, 0, 5);
    r.layer = "demo";
    const std::string line = r.to_record();
    // Hand-computed: mean 0.125, population std 0.375, max 0.5.
    CHECK(line ==
          "layer=demo method=none bits=0 relative_mse=na tail_ratio=1.33333333"
          " zero_filters=0 hist_lo=-0.5 hist_hi=0.5 hist=0,1,0,0,1 levels=na");
  }
}

TEST_CASE("report_against fills mse from a dequantized companion") {
  WeightTensor w = WeightTensor::fully_connected(1, 2, {1.0f, 0.0f});
  WeightTensor q = WeightTensor::fully_connected(1, 2, {0.5f, 0.0f});
  LayerReport r = report_against(w, q, 1);
  CHECK(r.mse_defined);
  CHECK(r.relative_mse == doctest::Approx(0.25));
  CHECK(r.bits == 1);
}
