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

#pragma once

#include <cstdint>
#include <vector>

#include "crossmask/image.hpp"
#include "crossmask/parallel.hpp"

namespace crossmask {

struct AffinityParams {
  double sigma_feature = 0.1;
  int radius = 5;
  double beta = 2.0;
  int walk_iters = 16;
  double tau_fg = 0.6;
  double tau_bg = 0.3;

  /// Throws Error(kInvalidArgument) unless 0 < tau_bg < tau_fg < 1 and the
  /// remaining fields are positive.
  void validate() const;
};

enum class SeedLabel : std::uint8_t { kBackground = 0, kForeground = 1, kNeutral = 2 };

struct SeedMask {
  Extent extent;
  std::vector<SeedLabel> labels;

  std::size_t count(SeedLabel label) const;
};

/// Foreground where value >= tau_fg, background where value <= tau_bg,
/// neutral in between. Throws Error(kNoSeeds) if either confident class is
/// empty.
SeedMask seed_from_field(const ScalarField& field, double tau_fg, double tau_bg);

/// Per-pixel feature vectors scaled to [0, 1] per channel.
struct AffinityFeatures {
  Extent extent;
  int channels = 1;
  std::vector<double> values;

  static AffinityFeatures from_image(const FeatureImage& image);
  static AffinityFeatures from_field(const ScalarField& field);
};

/// Unnormalised symmetric similarity exp(-|f_i - f_j|^2 / (2 sigma^2))^beta.
double raw_affinity(const AffinityFeatures& features, const AffinityParams& params,
                    std::size_t i, std::size_t j);

/// Row-stochastic transition matrix over pixels in CSR form. Row i holds every
/// pixel within Chebyshev distance `radius` of i except i itself.
struct AffinityGraph {
  Extent extent;
  int radius = 0;
  std::vector<std::size_t> row_offsets;  // extent.size() + 1
  std::vector<std::uint32_t> neighbors;
  std::vector<double> weights;
};

AffinityGraph build_affinity_graph(const AffinityFeatures& features,
                                   const AffinityParams& params,
                                   Parallelism parallelism = {});
AffinityGraph build_affinity_graph(const FeatureImage& features,
                                   const AffinityParams& params,
                                   Parallelism parallelism = {});
AffinityGraph build_affinity_graph(const ScalarField& features,
                                   const AffinityParams& params,
                                   Parallelism parallelism = {});

/// Clamped random walk: start at 1 (FG), 0 (BG), 0.5 (neutral); each step
/// replaces every value by its row's weighted mean of the previous values,
/// then resets seeds. Throws Error(kNoSeeds) or Error(kDimensionMismatch).
ScalarField random_walk_propagate(const AffinityGraph& graph, const SeedMask& seeds,
                                  int walk_iters, Parallelism parallelism = {});

/// Seeds `field`, builds the graph over `features`, and propagates: the
/// coarse affinity map used for threshold selection.
ScalarField affinity_map(const ScalarField& field, const AffinityFeatures& features,
                         const AffinityParams& params, Parallelism parallelism = {});

}  // namespace crossmask
