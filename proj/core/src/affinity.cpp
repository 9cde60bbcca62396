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

#include "crossmask/affinity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "crossmask/error.hpp"

namespace crossmask {

namespace {

double log_affinity(const AffinityFeatures& f, const AffinityParams& p,
                    std::size_t i, std::size_t j) {
  const auto ch = static_cast<std::size_t>(f.channels);
  double d2 = 0.0;
  for (std::size_t c = 0; c < ch; ++c) {
    const double d = f.values[i * ch + c] - f.values[j * ch + c];
    d2 += d * d;
  }
  return -p.beta * d2 / (2.0 * p.sigma_feature * p.sigma_feature);
}

}  // namespace

void AffinityParams::validate() const {
  if (!(sigma_feature > 0.0) || !(beta > 0.0) || radius < 1 || walk_iters < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "affinity sigma_feature and beta must be positive, radius and "
                "walk_iters at least 1");
  }
  if (!(tau_bg > 0.0 && tau_bg < tau_fg && tau_fg < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "seed thresholds need 0 < tau_bg < tau_fg < 1, got tau_bg " +
                    std::to_string(tau_bg) + " tau_fg " + std::to_string(tau_fg));
  }
}

std::size_t SeedMask::count(SeedLabel label) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

SeedMask seed_from_field(const ScalarField& field, double tau_fg, double tau_bg) {
  if (!(tau_bg > 0.0 && tau_bg < tau_fg && tau_fg < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "seed thresholds need 0 < tau_bg < tau_fg < 1");
  }
  SeedMask seeds{field.extent(), std::vector<SeedLabel>(field.values().size())};
  for (std::size_t i = 0; i < seeds.labels.size(); ++i) {
    const double v = field.values()[i];
    seeds.labels[i] = v >= tau_fg   ? SeedLabel::kForeground
                      : v <= tau_bg ? SeedLabel::kBackground
                                    : SeedLabel::kNeutral;
  }
  if (seeds.count(SeedLabel::kForeground) == 0) {
    throw Error(ErrorCode::kNoSeeds,
                "no pixel reaches tau_fg " + std::to_string(tau_fg));
  }
  if (seeds.count(SeedLabel::kBackground) == 0) {
    throw Error(ErrorCode::kNoSeeds,
                "no pixel at or below tau_bg " + std::to_string(tau_bg));
  }
  return seeds;
}

AffinityFeatures AffinityFeatures::from_image(const FeatureImage& image) {
  AffinityFeatures f{image.extent(), image.channels(), {}};
  f.values.reserve(image.samples().size());
  for (auto s : image.samples()) f.values.push_back(static_cast<double>(s) / 255.0);
  return f;
}

AffinityFeatures AffinityFeatures::from_field(const ScalarField& field) {
  return {field.extent(), 1,
          std::vector<double>(field.values().begin(), field.values().end())};
}

double raw_affinity(const AffinityFeatures& features, const AffinityParams& params,
                    std::size_t i, std::size_t j) {
  return std::exp(log_affinity(features, params, i, j));
}

AffinityGraph build_affinity_graph(const AffinityFeatures& features,
                                   const AffinityParams& params,
                                   Parallelism parallelism) {
  params.validate();
  const std::size_t h = features.extent.height;
  const std::size_t w = features.extent.width;
  const auto r = static_cast<std::size_t>(params.radius);

  AffinityGraph g;
  g.extent = features.extent;
  g.radius = params.radius;
  g.row_offsets.assign(h * w + 1, 0);
  for (std::size_t y = 0; y < h; ++y) {
    const std::size_t rows = std::min(h - 1, y + r) - (y >= r ? y - r : 0) + 1;
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t cols = std::min(w - 1, x + r) - (x >= r ? x - r : 0) + 1;
      g.row_offsets[y * w + x + 1] = rows * cols - 1;
    }
  }
  for (std::size_t i = 0; i < h * w; ++i) g.row_offsets[i + 1] += g.row_offsets[i];
  g.neighbors.resize(g.row_offsets.back());
  g.weights.resize(g.row_offsets.back());

  // Normalise in the log domain so rows never underflow to zero.
  parallel_for(h, parallelism, [&](std::size_t begin, std::size_t end) {
    for (std::size_t y = begin; y < end; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const std::size_t i = y * w + x;
        std::size_t k = g.row_offsets[i];
        double peak = -std::numeric_limits<double>::infinity();
        for (std::size_t yy = y >= r ? y - r : 0; yy <= std::min(h - 1, y + r); ++yy) {
          for (std::size_t xx = x >= r ? x - r : 0; xx <= std::min(w - 1, x + r); ++xx) {
            const std::size_t j = yy * w + xx;
            if (j == i) continue;
            g.neighbors[k] = static_cast<std::uint32_t>(j);
            g.weights[k] = log_affinity(features, params, i, j);
            peak = std::max(peak, g.weights[k]);
            ++k;
          }
        }
        double total = 0.0;
        for (std::size_t e = g.row_offsets[i]; e < k; ++e) {
          g.weights[e] = std::exp(g.weights[e] - peak);
          total += g.weights[e];
        }
        for (std::size_t e = g.row_offsets[i]; e < k; ++e) g.weights[e] /= total;
      }
    }
  });
  return g;
}

AffinityGraph build_affinity_graph(const FeatureImage& features,
                                   const AffinityParams& params,
                                   Parallelism parallelism) {
  return build_affinity_graph(AffinityFeatures::from_image(features), params,
                              parallelism);
}

AffinityGraph build_affinity_graph(const ScalarField& features,
                                   const AffinityParams& params,
                                   Parallelism parallelism) {
  return build_affinity_graph(AffinityFeatures::from_field(features), params,
                              parallelism);
}

ScalarField random_walk_propagate(const AffinityGraph& graph, const SeedMask& seeds,
                                  int walk_iters, Parallelism parallelism) {
  if (graph.extent != seeds.extent || seeds.labels.size() != seeds.extent.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "seed mask and affinity graph differ in size");
  }
  if (seeds.count(SeedLabel::kForeground) == 0 ||
      seeds.count(SeedLabel::kBackground) == 0) {
    throw Error(ErrorCode::kNoSeeds, "propagation needs a foreground and a background seed");
  }
  if (walk_iters < 1) {
    throw Error(ErrorCode::kInvalidArgument, "walk_iters must be at least 1");
  }

  const std::size_t n = seeds.labels.size();
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) {
    switch (seeds.labels[i]) {
      case SeedLabel::kForeground: p[i] = 1.0; break;
      case SeedLabel::kBackground: p[i] = 0.0; break;
      case SeedLabel::kNeutral: p[i] = 0.5; break;
    }
  }
  std::vector<double> next(n);
  for (int it = 0; it < walk_iters; ++it) {
    parallel_for(n, parallelism, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        if (seeds.labels[i] != SeedLabel::kNeutral) {
          next[i] = p[i];
          continue;
        }
        const std::size_t e0 = graph.row_offsets[i];
        const std::size_t e1 = graph.row_offsets[i + 1];
        if (e0 == e1) {
          next[i] = p[i];
          continue;
        }
        double acc = 0.0;
        for (std::size_t e = e0; e < e1; ++e) acc += graph.weights[e] * p[graph.neighbors[e]];
        next[i] = acc;
      }
    });
    std::swap(p, next);
  }

  std::vector<float> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = static_cast<float>(std::clamp(p[i], 0.0, 1.0));
  }
  return ScalarField(seeds.extent, std::move(out));
}

ScalarField affinity_map(const ScalarField& field, const AffinityFeatures& features,
                         const AffinityParams& params, Parallelism parallelism) {
  params.validate();
  if (field.extent() != features.extent) {
    throw Error(ErrorCode::kDimensionMismatch, "field and affinity features differ in size");
  }
  const SeedMask seeds = seed_from_field(field, params.tau_fg, params.tau_bg);
  const AffinityGraph graph = build_affinity_graph(features, params, parallelism);
  return random_walk_propagate(graph, seeds, params.walk_iters, parallelism);
}

}  // namespace crossmask
