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

#include <array>
#include <functional>
#include <vector>

#include "crossmask/image.hpp"
#include "crossmask/parallel.hpp"

namespace crossmask {

/// Fully-connected two-label CRF parameters. Defaults follow the common
/// DenseCRF settings for natural images.
struct CrfParams {
  double w_appearance = 10.0;
  double theta_alpha = 80.0;  // appearance kernel, spatial stddev in pixels
  double theta_beta = 13.0;   // appearance kernel, colour stddev in 8-bit units
  double w_smooth = 3.0;
  double theta_gamma = 3.0;   // smoothness kernel, spatial stddev in pixels
  int iterations = 10;
  double unary_epsilon = 1e-5;
  double mask_confidence = 0.9;

  /// Throws Error(kInvalidArgument) on a violated range.
  void validate() const;
};

inline constexpr int kBackground = 0;
inline constexpr int kForeground = 1;

/// Per-pixel negative log-probabilities, indexed [pixel][label].
struct UnaryEnergy {
  Extent extent;
  std::vector<std::array<double, 2>> energy;
};

/// Mean-field marginals Q, indexed [pixel][label]. Each pixel sums to 1.
struct LabelPosterior {
  Extent extent;
  std::vector<std::array<double, 2>> q;

  double foreground(std::size_t i) const { return q[i][kForeground]; }
  /// Foreground marginal as a field, for seeding or export.
  ScalarField foreground_field() const;
  /// Per-pixel argmax; ties go to background.
  BinaryMask argmax() const;
};

/// p = clamp(value, eps, 1 - eps); energies (-log(1 - p), -log p) for
/// (background, foreground).
UnaryEnergy unary_from_field(const ScalarField& field, double eps);

/// The labelled class gets probability `confidence`, the other
/// 1 - confidence. Requires 0.5 < confidence < 1.
UnaryEnergy unary_from_mask(const BinaryMask& mask, double confidence);

/// Softmax of the negated unary energies, the mean-field starting point.
LabelPosterior posterior_from_unary(const UnaryEnergy& unary);

enum class CrfMode {
  kBrute,  // exact O(N^2) double loop
  kFast,   // separable smoothness filter + windowed appearance sum
};

/// Pixel features seen by the appearance kernel: 1 or 3 colour channels in
/// 8-bit units, possibly fractional when derived from a ScalarField.
struct CrfFeatures {
  Extent extent;
  int channels = 1;
  bool integral = true;
  std::vector<double> color;  // extent.size() * channels

  static CrfFeatures from_image(const FeatureImage& image);
  /// Field value scaled to [0, 255] as a single channel.
  static CrfFeatures from_field(const ScalarField& field);
};

struct CrfResult {
  LabelPosterior posterior;
  BinaryMask mask;
};

/// Called with the initial posterior (iteration 0) and after every update.
using CrfObserver = std::function<void(int iteration, const LabelPosterior&)>;

/// Synchronous mean-field inference. Every pixel's message sums, over all
/// other pixels j, w_a k_a(i, j) + w_s k_s(i, j) times j's marginal on the
/// opposite label. Throws Error(kDimensionMismatch) if unary and features
/// differ in size.
CrfResult mean_field_refine(const UnaryEnergy& unary, const CrfFeatures& features,
                            const CrfParams& params, CrfMode mode = CrfMode::kFast,
                            Parallelism parallelism = {},
                            const CrfObserver& observer = {});

CrfResult mean_field_refine(const UnaryEnergy& unary, const FeatureImage& features,
                            const CrfParams& params, CrfMode mode = CrfMode::kFast,
                            Parallelism parallelism = {},
                            const CrfObserver& observer = {});

CrfResult mean_field_refine(const UnaryEnergy& unary, const ScalarField& features,
                            const CrfParams& params, CrfMode mode = CrfMode::kFast,
                            Parallelism parallelism = {},
                            const CrfObserver& observer = {});

/// Kernel cut-off of the fast path, in standard deviations. Beyond it the
/// Gaussian is below 1e-9 of its peak.
inline constexpr double kFastTruncationSigmas = 6.5;

}  // namespace crossmask
