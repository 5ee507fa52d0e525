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

#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "core/text.hpp"

namespace wnq {

namespace {

struct MseResult {
  std::vector<double> per_filter;  // nonzero filters only, in filter order
  std::size_t zero_filters = 0;
  double mean = 0.0;
  bool defined = false;
};

MseResult per_filter_mse(const WeightTensor& w, const WeightTensor& q) {
  if (w.filter_count() != q.filter_count() ||
      w.filter_size() != q.filter_size())
    throw std::invalid_argument("filter structure mismatch (N or M differ)");
  MseResult res;
  double sum = 0.0;
  for (std::size_t n = 0; n < w.filter_count(); ++n) {
    const auto wf = w.filter(n);
    const auto qf = q.filter(n);
    double err = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < wf.size(); ++i) {
      const double wi = wf[i];
      const double d = wi - static_cast<double>(qf[i]);
      err += d * d;
      norm += wi * wi;
    }
    if (norm == 0.0) {
      ++res.zero_filters;
      continue;
    }
    res.per_filter.push_back(err / norm);
    sum += err / norm;
  }
  if (!res.per_filter.empty()) {
    res.mean = sum / static_cast<double>(res.per_filter.size());
    res.defined = true;
  }
  return res;
}

void fill_mse(LayerReport& report, const WeightTensor& w,
              const WeightTensor& q) {
  MseResult res = per_filter_mse(w, q);
  report.per_filter_mse = std::move(res.per_filter);
  report.zero_filters = res.zero_filters;
  report.relative_mse = res.mean;
  report.mse_defined = res.defined;
}

LayerReport base_report(const WeightTensor& layer, int bins) {
  if (layer.size() == 0) throw std::invalid_argument("empty layer");
  LayerReport report;
  report.histogram = weight_histogram(layer, bins);
  if (auto t = tail_ratio(layer)) {
    report.tail_defined = true;
    report.tail_ratio = *t;
  }
  return report;
}

}  // namespace

std::vector<double> mean_level_set(const QuantizedTensor& qt) {
  std::vector<double> mean;
  std::size_t counted = 0;
  for (const QuantizedFilter& qf : qt.filters) {
    bool all_zero = true;
    for (float a : qf.alpha) all_zero &= a == 0.0f;
    if (all_zero) continue;  // degenerate filter, no information
    std::vector<double> alpha(qf.alpha.begin(), qf.alpha.end());
    std::vector<Level> levels = level_set(alpha);
    if (mean.empty()) mean.assign(levels.size(), 0.0);
    for (std::size_t l = 0; l < levels.size(); ++l)
      mean[l] += static_cast<double>(qf.mav) * levels[l].value;
    ++counted;
  }
  if (counted > 0)
    for (double& v : mean) v /= static_cast<double>(counted);
  return mean;
}

double relative_mse(const WeightTensor& w, const WeightTensor& q,
                    std::size_t* zero_count) {
  MseResult res = per_filter_mse(w, q);
  if (zero_count) *zero_count = res.zero_filters;
  if (!res.defined)
    throw std::invalid_argument("relative mse undefined: all filters zero");
  return res.mean;
}

Histogram weight_histogram(const WeightTensor& t, int bins) {
  if (bins < 1) throw std::invalid_argument("bins must be positive");
  Histogram h;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  double mav = 0.0;
  for (float v : t.data()) mav = std::max(mav, std::abs(static_cast<double>(v)));
  h.lo = -mav;
  h.hi = mav;
  if (mav == 0.0) {
    h.counts[static_cast<std::size_t>(bins / 2)] = t.size();
    return h;
  }
  const double width = (h.hi - h.lo) / static_cast<double>(bins);
  for (float v : t.data()) {
    auto idx = static_cast<long>((static_cast<double>(v) - h.lo) / width);
    idx = std::clamp<long>(idx, 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(idx)];
  }
  return h;
}

std::optional<double> tail_ratio(const WeightTensor& t) {
  if (t.size() == 0) throw std::invalid_argument("empty layer");
  double mean = 0.0, mav = 0.0;
  for (float v : t.data()) {
    mean += static_cast<double>(v);
    mav = std::max(mav, std::abs(static_cast<double>(v)));
  }
  mean /= static_cast<double>(t.size());
  double var = 0.0;
  for (float v : t.data()) {
    const double d = static_cast<double>(v) - mean;
    var += d * d;
  }
  var /= static_cast<double>(t.size());
  if (var == 0.0) return std::nullopt;
  return mav / std::sqrt(var);
}

LayerReport distribution_report(const WeightTensor& layer,
                                std::optional<Method> method, int bits,
                                int bins) {
  LayerReport report = base_report(layer, bins);
  report.method = method;
  report.bits = method.has_value() ? bits : 0;
  if (!method.has_value()) return report;

  QuantConfig cfg;
  cfg.bits = bits;

  if (*method == Method::DoReFa) {
    WeightTensor q(layer.kind(), layer.shape(),
                   std::vector<float>(layer.size(), 0.0f));
    for (std::size_t n = 0; n < layer.filter_count(); ++n) {
      const auto wf = layer.filter(n);
      std::vector<double> w(wf.begin(), wf.end());
      DorefaResult dr = quantize_dorefa(w, bits);
      std::copy(dr.values.begin(), dr.values.end(), q.filter(n).begin());
    }
    fill_mse(report, layer, q);
    // Fixed uniform grid in [-1, 1], identical for every filter.
    const int grid = (1 << bits) - 1;
    for (int j = 0; j <= grid; ++j)
      report.mean_levels.push_back(2.0 * j / grid - 1.0);
    return report;
  }

  QuantizedTensor qt;
  qt.kind = layer.kind();
  qt.bits = bits;
  qt.filter_size = layer.filter_size();
  for (std::size_t n = 0; n < layer.filter_count(); ++n) {
    const auto wf = layer.filter(n);
    std::vector<double> w(wf.begin(), wf.end());
    FilterQuantResult r = *method == Method::Wnq ? quantize_filter(w, cfg)
                          : *method == Method::LqNet
                              ? quantize_lqnet(w, cfg)
                              : quantize_residual(w, bits);
    qt.filters.push_back(std::move(r.filter));
  }
  WeightTensor deq = qt.dequantize();
  fill_mse(report, layer, deq);
  report.mean_levels = mean_level_set(qt);
  return report;
}

LayerReport report_against(const WeightTensor& layer,
                           const WeightTensor& dequantized, int bits,
                           int bins) {
  LayerReport report = base_report(layer, bins);
  report.bits = bits;
  fill_mse(report, layer, dequantized);
  return report;
}

std::string LayerReport::to_record() const {
  std::string line = "layer=" + layer;
  line += " method=";
  line += method.has_value() ? method_name(*method) : "none";
  line += " bits=" + std::to_string(bits);
  line += " relative_mse=";
  line += mse_defined ? fmt_g(relative_mse) : "na";
  line += " tail_ratio=";
  line += tail_defined ? fmt_g(tail_ratio) : "na";
  line += " zero_filters=" + std::to_string(zero_filters);
  line += " hist_lo=" + fmt_g(histogram.lo);
  line += " hist_hi=" + fmt_g(histogram.hi);
  line += " hist=";
  for (std::size_t i = 0; i < histogram.counts.size(); ++i) {
    if (i) line += ',';
    line += std::to_string(histogram.counts[i]);
  }
  line += " levels=";
  if (mean_levels.empty()) {
    line += "na";
  } else {
    for (std::size_t i = 0; i < mean_levels.size(); ++i) {
      if (i) line += ',';
      line += fmt_g(mean_levels[i]);
    }
  }
  return line;
}

}  // namespace wnq
