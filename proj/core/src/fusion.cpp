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

#include "crossmask/fusion.hpp"

#include <string>

#include "crossmask/aggregate.hpp"
#include "crossmask/binarize.hpp"
#include "crossmask/error.hpp"
#include "crossmask/evalmetrics.hpp"

namespace crossmask {

namespace {

constexpr double kDraftThreshold = 0.5;

struct Prepared {
  ScalarField attention;
  ScalarField b_hat;
  AffinityFeatures affinity_features;
  CrfFeatures crf_features;
  std::optional<AffinityGraph> graph;
  ThresholdSelection threshold;
  CrfResult refined;
};

Prepared prepare(const PipelineInputs& in, const PipelineConfig& cfg) {
  cfg.validate();
  const ScalarField native =
      aggregate_token(in.stack, cfg.token, cfg.aggregate_extent, cfg.parallelism);
  const Extent out = in.image ? in.image->extent() : cfg.output_extent;

  Prepared p;
  p.attention = upsample_bilinear(native, out);
  if (in.image) {
    p.affinity_features = AffinityFeatures::from_image(*in.image);
    p.crf_features = CrfFeatures::from_image(*in.image);
  } else {
    p.affinity_features = AffinityFeatures::from_field(p.attention);
    p.crf_features = CrfFeatures::from_field(p.attention);
  }

  if (in.b_hat) {
    p.b_hat = upsample_bilinear(*in.b_hat, out);
  } else {
    const SeedMask seeds =
        seed_from_field(p.attention, cfg.affinity.tau_fg, cfg.affinity.tau_bg);
    p.graph = build_affinity_graph(p.affinity_features, cfg.affinity, cfg.parallelism);
    p.b_hat = random_walk_propagate(*p.graph, seeds, cfg.affinity.walk_iters,
                                    cfg.parallelism);
  }

  p.threshold = select_threshold(p.attention, p.b_hat, cfg.grid);
  const BinaryMask draft = threshold_binarize(p.attention, Threshold(p.threshold.gamma));
  p.refined = mean_field_refine(unary_from_mask(draft, cfg.crf.mask_confidence),
                                p.crf_features, cfg.crf, cfg.crf_mode, cfg.parallelism);
  return p;
}

}  // namespace

ThresholdGrid::ThresholdGrid() {
  for (int i = 1; i <= 19; ++i) gammas_.push_back(static_cast<double>(i) / 20.0);
}

ThresholdGrid::ThresholdGrid(std::vector<double> gammas) : gammas_(std::move(gammas)) {
  if (gammas_.empty()) {
    throw Error(ErrorCode::kEmptyGrid, "threshold grid has no values");
  }
  for (std::size_t i = 0; i < gammas_.size(); ++i) {
    if (!(gammas_[i] > 0.0 && gammas_[i] < 1.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "grid value " + std::to_string(gammas_[i]) + " outside (0, 1)");
    }
    if (i > 0 && !(gammas_[i] > gammas_[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument, "grid values must be strictly increasing");
    }
  }
}

double match_score(const ScalarField& b_hat, const BinaryMask& b_gamma) {
  if (b_hat.extent() != b_gamma.extent()) {
    throw Error(ErrorCode::kDimensionMismatch, "b_hat and thresholded mask differ in size");
  }
  return iou(threshold_binarize(b_hat, Threshold(kDraftThreshold)), b_gamma);
}

ThresholdSelection select_threshold(const ScalarField& field, const ScalarField& b_hat,
                                    const ThresholdGrid& grid) {
  return select_threshold_batch(std::span(&field, 1), std::span(&b_hat, 1), grid);
}

ThresholdSelection select_threshold_batch(std::span<const ScalarField> fields,
                                          std::span<const ScalarField> b_hats,
                                          const ThresholdGrid& grid) {
  if (grid.gammas().empty()) {
    throw Error(ErrorCode::kEmptyGrid, "threshold grid has no values");
  }
  if (fields.size() != b_hats.size() || fields.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "need the same positive number of fields and affinity maps");
  }
  std::vector<BinaryMask> drafts;
  drafts.reserve(b_hats.size());
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (fields[k].extent() != b_hats[k].extent()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "field and b_hat differ in size for pair " + std::to_string(k));
    }
    drafts.push_back(threshold_binarize(b_hats[k], Threshold(kDraftThreshold)));
  }

  ThresholdSelection best{grid.gammas().front(), -1.0};
  for (double gamma : grid.gammas()) {
    double total = 0.0;
    for (std::size_t k = 0; k < fields.size(); ++k) {
      total += iou(drafts[k], threshold_binarize(fields[k], Threshold(gamma)));
    }
    const double score = total / static_cast<double>(fields.size());
    if (score > best.score) best = {gamma, score};
  }
  return best;
}

void PipelineConfig::validate() const {
  crf.validate();
  affinity.validate();
  if (aggregate_extent.size() == 0 || output_extent.size() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "pipeline resolutions must be at least 1x1");
  }
}

Stream choose_stream(const ScalarField& b_hat, const BinaryMask& crf_then_affinity,
                     const BinaryMask& affinity_then_crf) {
  return match_score(b_hat, crf_then_affinity) > match_score(b_hat, affinity_then_crf)
             ? Stream::kCrfThenAffinity
             : Stream::kAffinityThenCrf;
}

PipelineResult run_method2(const PipelineInputs& inputs, const PipelineConfig& cfg) {
  Prepared p = prepare(inputs, cfg);
  return {std::move(p.refined.mask), std::move(p.attention), std::move(p.b_hat),
          p.threshold, Stream::kAffinityThenCrf};
}

PipelineResult run_method1(const PipelineInputs& inputs, const PipelineConfig& cfg) {
  Prepared p = prepare(inputs, cfg);
  // The affinity-then-CRF stream and the CRF stage of the other stream share
  // the same input mask, so one refinement serves both.
  const BinaryMask& affinity_then_crf = p.refined.mask;

  BinaryMask crf_then_affinity;
  try {
    const SeedMask seeds = seed_from_field(p.refined.posterior.foreground_field(),
                                           cfg.affinity.tau_fg, cfg.affinity.tau_bg);
    if (!p.graph) {
      p.graph = build_affinity_graph(p.affinity_features, cfg.affinity, cfg.parallelism);
    }
    const ScalarField walked =
        random_walk_propagate(*p.graph, seeds, cfg.affinity.walk_iters, cfg.parallelism);
    crf_then_affinity = threshold_binarize(walked, Threshold(kDraftThreshold));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoSeeds) throw;
    // A one-sided CRF posterior leaves nothing to propagate.
    crf_then_affinity = affinity_then_crf;
  }

  const Stream chosen = choose_stream(p.b_hat, crf_then_affinity, affinity_then_crf);
  BinaryMask mask = chosen == Stream::kCrfThenAffinity ? std::move(crf_then_affinity)
                                                       : affinity_then_crf;
  return {std::move(mask), std::move(p.attention), std::move(p.b_hat), p.threshold,
          chosen};
}

PipelineResult run_pipeline(const PipelineInputs& inputs, const PipelineConfig& cfg) {
  return cfg.method == Method::kCrossFusion ? run_method1(inputs, cfg)
                                            : run_method2(inputs, cfg);
}

}  // namespace crossmask
