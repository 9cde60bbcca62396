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
#include <optional>
#include <span>
#include <vector>

#include "crossmask/affinity.hpp"
#include "crossmask/densecrf.hpp"
#include "crossmask/image.hpp"
#include "crossmask/parallel.hpp"
#include "crossmask/tensorio.hpp"

namespace crossmask {

/// Candidate binarization thresholds, strictly increasing inside (0, 1).
class ThresholdGrid {
 public:
  /// gamma_i = i / 20 for i = 1..19.
  ThresholdGrid();
  /// Throws Error(kEmptyGrid) for an empty list, Error(kInvalidArgument) for
  /// values outside (0, 1) or not strictly increasing.
  explicit ThresholdGrid(std::vector<double> gammas);

  std::span<const double> gammas() const { return gammas_; }

 private:
  std::vector<double> gammas_;
};

/// Foreground IoU between b_hat binarized at 0.5 (ties to background) and
/// b_gamma. Both empty scores 1. Throws Error(kDimensionMismatch).
double match_score(const ScalarField& b_hat, const BinaryMask& b_gamma);

struct ThresholdSelection {
  double gamma = 0.0;
  double score = 0.0;
};

/// Grid search for the gamma whose binarization of `field` best matches
/// `b_hat`; the smallest gamma wins ties.
ThresholdSelection select_threshold(const ScalarField& field, const ScalarField& b_hat,
                                    const ThresholdGrid& grid);

/// Class-level variant: maximizes the summed match score over all
/// (field, b_hat) pairs; `score` is the mean over pairs.
ThresholdSelection select_threshold_batch(std::span<const ScalarField> fields,
                                          std::span<const ScalarField> b_hats,
                                          const ThresholdGrid& grid);

enum class Method {
  kCrossFusion = 1,  // Method 1: DenseCRF and affinity streams, best one kept
  kSequential = 2,   // Method 2: affinity draft, then DenseCRF
};

struct PipelineConfig {
  Method method = Method::kSequential;
  CrfParams crf;
  CrfMode crf_mode = CrfMode::kFast;
  AffinityParams affinity;
  ThresholdGrid grid;
  std::uint32_t token = 0;
  Extent aggregate_extent{64, 64};
  /// Final resolution when no feature image is supplied; otherwise the image
  /// size is used.
  Extent output_extent{512, 512};
  Parallelism parallelism;

  void validate() const;
};

struct PipelineInputs {
  AttentionStack stack;
  std::optional<FeatureImage> image;
  /// Externally computed coarse affinity map; bypasses seeding/propagation
  /// for the draft. Resampled to the output size when it differs.
  std::optional<ScalarField> b_hat;
};

enum class Stream { kCrfThenAffinity, kAffinityThenCrf };

struct PipelineResult {
  BinaryMask mask;
  ScalarField attention;  // aggregated map at output resolution
  ScalarField b_hat;
  ThresholdSelection threshold;
  Stream chosen = Stream::kAffinityThenCrf;
};

/// Picks the mask with the higher match score against b_hat; ties go to the
/// affinity-then-CRF stream.
Stream choose_stream(const ScalarField& b_hat, const BinaryMask& crf_then_affinity,
                     const BinaryMask& affinity_then_crf);

PipelineResult run_method1(const PipelineInputs& inputs, const PipelineConfig& cfg);
PipelineResult run_method2(const PipelineInputs& inputs, const PipelineConfig& cfg);
/// Dispatches on cfg.method.
PipelineResult run_pipeline(const PipelineInputs& inputs, const PipelineConfig& cfg);

}  // namespace crossmask
