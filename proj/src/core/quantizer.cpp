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

#include "core/quantizer.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wnq {

void QuantConfig::validate() const {
  if (bits < 1 || bits > kMaxBits)
    throw std::invalid_argument("bits must be in [1, 8]");
  if (init_iters < 1) throw std::invalid_argument("init_iters must be >= 1");
  if (train_iters < 1) throw std::invalid_argument("train_iters must be >= 1");
  if (!(tol >= 0.0)) throw std::invalid_argument("tol must be nonnegative");
}

namespace {

template <typename T>
NormalizedFilter normalize_impl(std::span<const T> w) {
  if (w.empty()) throw std::invalid_argument("empty filter");
  NormalizedFilter nf;
  nf.values.resize(w.size());
  double mav = 0.0;
  std::size_t max_index = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double a = std::abs(static_cast<double>(w[i]));
    if (a > mav) {
      mav = a;
      max_index = i;
    }
  }
  nf.mav = mav;
  nf.max_index = max_index;
  if (mav == 0.0) {
    nf.degenerate = true;
    return nf;  // values stay zero
  }
  for (std::size_t i = 0; i < w.size(); ++i)
    nf.values[i] = static_cast<double>(w[i]) / mav;
  return nf;
}

// Lexicographic code order with -1 before +1, comparing e_0 first.
bool label_lex_less(std::uint8_t a, std::uint8_t b, int bits) {
  for (int k = 0; k < bits; ++k) {
    const int ba = (a >> k) & 1;
    const int bb = (b >> k) & 1;
    if (ba != bb) return ba < bb;
  }
  return false;
}

std::vector<std::uint8_t> zero_labels(std::size_t m) {
  return std::vector<std::uint8_t>(m, 0);
}

}  // namespace

NormalizedFilter normalize(std::span<const double> w) {
  return normalize_impl<double>(w);
}

NormalizedFilter normalize(std::span<const float> w) {
  return normalize_impl<float>(w);
}

std::vector<Level> level_set(std::span<const double> alpha) {
  const int bits = static_cast<int>(alpha.size());
  if (bits < 1 || bits > kMaxBits)
    throw std::invalid_argument("bits must be in [1, 8]");
  std::vector<Level> levels(std::size_t{1} << bits);
  for (std::uint32_t l = 0; l < levels.size(); ++l) {
    double v = 0.0;
    for (int k = 0; k < bits; ++k)
      v += ((l >> k) & 1) ? alpha[static_cast<std::size_t>(k)]
                          : -alpha[static_cast<std::size_t>(k)];
    levels[l] = Level{v, static_cast<std::uint8_t>(l)};
  }
  std::sort(levels.begin(), levels.end(), [bits](const Level& a, const Level& b) {
    if (a.value != b.value) return a.value < b.value;
    return label_lex_less(a.label, b.label, bits);
  });
  return levels;
}

Level project(double x, std::span<const Level> levels) {
  if (levels.empty()) throw std::invalid_argument("empty level set");
  Level best = levels[0];
  double best_dist = std::abs(x - best.value);
  for (std::size_t i = 1; i < levels.size(); ++i) {
    const double d = std::abs(x - levels[i].value);
    if (d < best_dist || (d == best_dist && levels[i].value > best.value)) {
      best = levels[i];
      best_dist = d;
    }
  }
  return best;
}

std::vector<double> optimize_alpha(std::span<const double> values,
                                   std::span<const std::uint8_t> labels,
                                   int bits) {
  if (bits < 1 || bits > kMaxBits)
    throw std::invalid_argument("bits must be in [1, 8]");
  if (values.empty() || values.size() != labels.size())
    throw std::invalid_argument("values/labels size mismatch");
  const auto m = static_cast<Eigen::Index>(values.size());
  Eigen::MatrixXd b(m, bits);
  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    y(i) = values[static_cast<std::size_t>(i)];
    const std::uint8_t l = labels[static_cast<std::size_t>(i)];
    for (int k = 0; k < bits; ++k) b(i, k) = ((l >> k) & 1) ? 1.0 : -1.0;
  }
  // Complete orthogonal decomposition: least-squares solution, and the
  // minimum-norm one when B^T B is singular (duplicate code columns).
  Eigen::VectorXd a = b.completeOrthogonalDecomposition().solve(y);
  return std::vector<double>(a.data(), a.data() + bits);
}

std::vector<std::uint8_t> optimize_codes(std::span<const double> values,
                                         std::span<const double> alpha) {
  const std::vector<Level> levels = level_set(alpha);
  std::vector<std::uint8_t> labels(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    labels[i] = project(values[i], levels).label;
  return labels;
}

std::vector<double> residual_init(std::span<const double> values, int bits) {
  if (bits < 1 || bits > kMaxBits)
    throw std::invalid_argument("bits must be in [1, 8]");
  if (values.empty()) throw std::invalid_argument("empty filter");
  std::vector<double> r(values.begin(), values.end());
  std::vector<double> alpha(static_cast<std::size_t>(bits));
  for (int k = 0; k < bits; ++k) {
    double sum = 0.0;
    for (double v : r) sum += std::abs(v);
    const double a = sum / static_cast<double>(r.size());
    alpha[static_cast<std::size_t>(k)] = a;
    for (double& v : r) v -= (v < 0.0 ? -a : a);  // sign(0) = +1
  }
  return alpha;
}

std::vector<std::uint8_t> residual_codes(std::span<const double> values,
                                         int bits) {
  if (bits < 1 || bits > kMaxBits)
    throw std::invalid_argument("bits must be in [1, 8]");
  std::vector<double> r(values.begin(), values.end());
  std::vector<std::uint8_t> labels(values.size(), 0);
  for (int k = 0; k < bits; ++k) {
    double sum = 0.0;
    for (double v : r) sum += std::abs(v);
    const double a = sum / static_cast<double>(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
      const bool positive = !(r[i] < 0.0);
      if (positive) labels[i] |= static_cast<std::uint8_t>(1u << k);
      r[i] -= positive ? a : -a;
    }
  }
  return labels;
}

double quant_objective(std::span<const double> values,
                       std::span<const std::uint8_t> labels,
                       std::span<const double> alpha) {
  double obj = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    double v = 0.0;
    for (std::size_t k = 0; k < alpha.size(); ++k)
      v += ((labels[i] >> k) & 1) ? alpha[k] : -alpha[k];
    const double d = values[i] - v;
    obj += d * d;
  }
  return obj;
}

AlternateResult alternate(std::span<const double> values, int bits, int iters,
                          double tol, std::span<const double> warm_alpha) {
  if (iters < 1) throw std::invalid_argument("iters must be >= 1");
  AlternateResult res;
  res.alpha = warm_alpha.empty()
                  ? residual_init(values, bits)
                  : std::vector<double>(warm_alpha.begin(), warm_alpha.end());
  if (static_cast<int>(res.alpha.size()) != bits)
    throw std::invalid_argument("warm start size does not match bits");

  double prev = 0.0;
  for (int it = 0; it < iters; ++it) {
    res.labels = optimize_codes(values, res.alpha);
    res.alpha = optimize_alpha(values, res.labels, bits);
    res.objective = quant_objective(values, res.labels, res.alpha);
    res.trace.push_back(res.objective);
    if (it > 0 && prev - res.objective < tol) break;
    prev = res.objective;
  }
  for (double a : res.alpha)
    if (a < 0.0) res.negative_alpha = true;
  return res;
}

std::vector<double> FilterQuantResult::dequantized() const {
  std::vector<double> out(static_cast<std::size_t>(filter.m));
  for (std::uint64_t i = 0; i < filter.m; ++i) {
    double v = 0.0;
    const std::uint8_t l = filter.label(i);
    for (std::size_t k = 0; k < alpha.size(); ++k)
      v += ((l >> k) & 1) ? alpha[k] : -alpha[k];
    out[static_cast<std::size_t>(i)] = mav * v;
  }
  return out;
}

namespace {

FilterQuantResult quantize_normalized(const NormalizedFilter& nf,
                                      std::vector<double> saved_w,
                                      const QuantConfig& cfg,
                                      std::span<const double> warm_alpha) {
  cfg.validate();
  FilterQuantResult out;
  out.ctx.saved_w = std::move(saved_w);
  out.ctx.max_index = nf.max_index;
  out.ctx.degenerate = nf.degenerate;

  if (nf.degenerate) {
    out.alpha.assign(static_cast<std::size_t>(cfg.bits), 0.0);
    out.mav = 0.0;
    std::vector<float> alpha_f(static_cast<std::size_t>(cfg.bits), 0.0f);
    out.filter =
        pack_filter(alpha_f, zero_labels(nf.values.size()), 0.0f);
    return out;
  }
  out.mav = nf.mav;

  const int iters = warm_alpha.empty() ? cfg.init_iters : cfg.train_iters;
  AlternateResult ar =
      alternate(nf.values, cfg.bits, iters, cfg.tol, warm_alpha);

  // Final forward projection with the learned levels.
  std::vector<std::uint8_t> labels = optimize_codes(nf.values, ar.alpha);
  out.objective = quant_objective(nf.values, labels, ar.alpha);
  ar.trace.push_back(out.objective);

  out.alpha = std::move(ar.alpha);
  out.trace = std::move(ar.trace);
  out.negative_alpha = ar.negative_alpha;
  std::vector<float> alpha_f(out.alpha.begin(), out.alpha.end());
  out.filter = pack_filter(alpha_f, labels, static_cast<float>(nf.mav));
  return out;
}

}  // namespace

FilterQuantResult quantize_filter(std::span<const double> w,
                                  const QuantConfig& cfg,
                                  std::span<const double> warm_alpha) {
  return quantize_normalized(normalize(w), {w.begin(), w.end()}, cfg,
                             warm_alpha);
}

FilterQuantResult quantize_filter(std::span<const float> w,
                                  const QuantConfig& cfg,
                                  std::span<const double> warm_alpha) {
  return quantize_normalized(normalize(w), {w.begin(), w.end()}, cfg,
                             warm_alpha);
}

}  // namespace wnq
