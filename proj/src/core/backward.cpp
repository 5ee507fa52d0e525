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

#include "core/backward.hpp"

#include <cmath>
#include <stdexcept>

namespace wnq {

std::vector<double> backward_wnq(const BackwardContext& ctx,
                                 std::span<const double> upstream) {
  if (upstream.size() != ctx.saved_w.size())
    throw std::invalid_argument("upstream size does not match context");
  std::vector<double> out(upstream.begin(), upstream.end());
  if (ctx.degenerate) return out;

  const std::size_t i = ctx.max_index;
  double sum = 0.0;
  for (std::size_t j = 0; j < upstream.size(); ++j) {
    if (j == i) continue;
    sum += upstream[j] * ctx.saved_w[j];
  }
  out[i] = -sum / ctx.saved_w[i];
  return out;
}

std::vector<double> backward_lqnet(const BackwardContext& ctx,
                                   std::span<const double> upstream) {
  if (upstream.size() != ctx.saved_w.size())
    throw std::invalid_argument("upstream size does not match context");
  return std::vector<double>(upstream.begin(), upstream.end());
}

namespace {

double surrogate_loss(std::span<const double> w,
                      std::span<const double> upstream, double frozen_scale) {
  double mav = 0.0;
  for (double v : w) mav = std::max(mav, std::abs(v));
  double loss = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j)
    loss += upstream[j] * (frozen_scale * w[j] / mav);
  return loss;
}

}  // namespace

double fd_check(std::span<const double> w, std::span<const double> upstream,
                double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (w.empty() || w.size() != upstream.size())
    throw std::invalid_argument("w/upstream size mismatch");

  double mav = 0.0, second = 0.0;
  std::size_t max_index = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double a = std::abs(w[i]);
    if (a > mav) {
      second = mav;
      mav = a;
      max_index = i;
    } else if (a > second) {
      second = a;
    }
  }
  if (mav - second <= 10.0 * eps || mav <= 10.0 * eps)
    throw std::invalid_argument("max-abs margin too small for eps");

  BackwardContext ctx{{w.begin(), w.end()}, max_index, false};
  const std::vector<double> analytic = backward_wnq(ctx, upstream);

  std::vector<double> probe(w.begin(), w.end());
  double max_dev = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + eps;
    const double lp = surrogate_loss(probe, upstream, mav);
    probe[i] = saved - eps;
    const double lm = surrogate_loss(probe, upstream, mav);
    probe[i] = saved;
    const double fd = (lp - lm) / (2.0 * eps);
    max_dev = std::max(max_dev, std::abs(fd - analytic[i]));
  }
  return max_dev;
}

}  // namespace wnq
