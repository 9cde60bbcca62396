// Copyright 2026 The crossmask Authors. All Rights Reserved.
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

#include "crossmask/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <string>
#include <vector>

#include "crossmask/error.hpp"

namespace crossmask {

namespace {

struct Tap {
  std::size_t lo = 0;
  std::size_t hi = 0;
  double frac = 0.0;
};

std::vector<Tap> bilinear_taps(std::size_t src, std::size_t dst) {
  std::vector<Tap> taps(dst);
  const double scale = static_cast<double>(src) / static_cast<double>(dst);
  const double upper = static_cast<double>(src - 1);
  for (std::size_t x = 0; x < dst; ++x) {
    double s = (static_cast<double>(x) + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, upper);
    const auto lo = static_cast<std::size_t>(std::floor(s));
    taps[x] = {lo, std::min(lo + 1, src - 1), s - static_cast<double>(lo)};
  }
  return taps;
}

}  // namespace

ScalarField normalize_map(const AttentionRecord& record) {
  const auto peak = std::max_element(record.values.begin(), record.values.end());
  if (peak == record.values.end() || *peak <= 0.0f) {
    return ScalarField(record.extent());
  }
  const double inv = static_cast<double>(*peak);
  std::vector<float> out(record.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<float>(static_cast<double>(record.values[i]) / inv);
  }
  return ScalarField(record.extent(), std::move(out));
}

ScalarField upsample_bilinear(const ScalarField& field, Extent target) {
  if (target.height == 0 || target.width == 0) {
    throw Error(ErrorCode::kInvalidArgument, "upsample target must be at least 1x1");
  }
  if (target == field.extent()) return field;

  const auto rows = bilinear_taps(field.height(), target.height);
  const auto cols = bilinear_taps(field.width(), target.width);
  const auto src = field.values();
  const std::size_t sw = field.width();
  std::vector<float> out(target.size());
  for (std::size_t y = 0; y < target.height; ++y) {
    const Tap& ty = rows[y];
    for (std::size_t x = 0; x < target.width; ++x) {
      const Tap& tx = cols[x];
      const double top = (1.0 - tx.frac) * src[ty.lo * sw + tx.lo] +
                         tx.frac * src[ty.lo * sw + tx.hi];
      const double bottom = (1.0 - tx.frac) * src[ty.hi * sw + tx.lo] +
                            tx.frac * src[ty.hi * sw + tx.hi];
      const double v = (1.0 - ty.frac) * top + ty.frac * bottom;
      out[y * target.width + x] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  return ScalarField(target, std::move(out));
}

ScalarField aggregate_token(const AttentionStack& stack, std::uint32_t token,
                            Extent target, Parallelism parallelism) {
  std::vector<const AttentionRecord*> selected;
  for (const auto& r : stack.records()) {
    if (r.token == token) selected.push_back(&r);
  }
  if (selected.empty()) {
    throw Error(ErrorCode::kNoRecordsForToken,
                "no attention records for token " + std::to_string(token));
  }
  std::sort(selected.begin(), selected.end(),
            [](const AttentionRecord* a, const AttentionRecord* b) {
              return std::tie(a->step, a->layer) < std::tie(b->step, b->layer);
            });

  std::vector<ScalarField> resampled(selected.size());
  parallel_for(selected.size(), parallelism,
               [&](std::size_t begin, std::size_t end) {
                 for (std::size_t i = begin; i < end; ++i) {
                   resampled[i] = upsample_bilinear(normalize_map(*selected[i]), target);
                 }
               });

  std::vector<double> sum(target.size(), 0.0);
  for (const auto& f : resampled) {
    const auto v = f.values();
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += v[i];
  }
  const double count = static_cast<double>(resampled.size());
  std::vector<float> out(sum.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<float>(std::clamp(sum[i] / count, 0.0, 1.0));
  }
  return ScalarField(target, std::move(out));
}

}  // namespace crossmask
