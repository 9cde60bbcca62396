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

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "crossmask/error.hpp"
#include "test_support.hpp"

namespace crossmask {
namespace {

using testing::Rng;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected crossmask::Error";
  return ErrorCode::kInvalidArgument;
}

double row_sum(const AffinityGraph& g, std::size_t i) {
  double s = 0.0;
  for (std::size_t e = g.row_offsets[i]; e < g.row_offsets[i + 1]; ++e) s += g.weights[e];
  return s;
}

// Two vertical regions: left half grey 40, right half grey 220.
FeatureImage two_region_image(Extent e) {
  std::vector<std::uint8_t> px(e.size());
  for (std::size_t y = 0; y < e.height; ++y) {
    for (std::size_t x = 0; x < e.width; ++x) px[y * e.width + x] = x < e.width / 2 ? 40 : 220;
  }
  return FeatureImage(e, 1, std::move(px));
}

SeedMask all_neutral(Extent e) {
  return {e, std::vector<SeedLabel>(e.size(), SeedLabel::kNeutral)};
}

// Clamped walk as a dense affine map x <- M x + b written as one augmented
// matrix A, so k steps are A^k applied to [x0; 1]. Weights come straight from
// the kernel formula, not from the graph under test.
Eigen::VectorXd dense_walk(const AffinityFeatures& f, const AffinityParams& p,
                           const SeedMask& seeds, int steps) {
  const auto n = static_cast<Eigen::Index>(f.extent.size());
  const auto w = static_cast<long>(f.extent.width);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 1, n + 1);
  Eigen::VectorXd x0(n + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto label = seeds.labels[static_cast<std::size_t>(i)];
    if (label != SeedLabel::kNeutral) {
      const double v = label == SeedLabel::kForeground ? 1.0 : 0.0;
      a(i, n) = v;
      x0(i) = v;
      continue;
    }
    x0(i) = 0.5;
    double total = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const long dy = std::labs(i / w - j / w);
      const long dx = std::labs(i % w - j % w);
      if (j == i || std::max(dy, dx) > p.radius) continue;
      double d2 = 0.0;
      for (int c = 0; c < f.channels; ++c) {
        const double d = f.values[static_cast<std::size_t>(i * f.channels + c)] -
                         f.values[static_cast<std::size_t>(j * f.channels + c)];
        d2 += d * d;
      }
      a(i, j) = std::pow(std::exp(-d2 / (2 * p.sigma_feature * p.sigma_feature)), p.beta);
      total += a(i, j);
    }
    a.row(i).head(n) /= total;
  }
  a(n, n) = 1.0;
  x0(n) = 1.0;
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n + 1, n + 1);
  for (int k = 0; k < steps; ++k) power = a * power;
  return (power * x0).head(n);
}

TEST(SeedFromField, NoBackgroundMeansNoSeeds) {
  const ScalarField f({4, 4}, std::vector<float>(16, 0.9f));
  EXPECT_EQ(code_of([&] { seed_from_field(f, 0.6, 0.3); }), ErrorCode::kNoSeeds);
}

TEST(SeedFromField, BlockAndBackground) {
  std::vector<float> v(64, 0.1f);
  for (std::size_t y = 2; y < 6; ++y) {
    for (std::size_t x = 2; x < 6; ++x) v[y * 8 + x] = 0.9f;
  }
  const auto seeds = seed_from_field(ScalarField({8, 8}, v), 0.6, 0.3);
  EXPECT_EQ(seeds.count(SeedLabel::kForeground), 16u);
  EXPECT_EQ(seeds.count(SeedLabel::kBackground), 48u);
  EXPECT_EQ(seeds.count(SeedLabel::kNeutral), 0u);
  EXPECT_EQ(seeds.labels[3 * 8 + 3], SeedLabel::kForeground);
}

TEST(SeedFromField, RampGivesThreeContiguousBands) {
  const std::size_t n = 101;
  std::vector<float> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<float>(i) / 100.0f;
  const double tau_fg = 0.6;
  const double tau_bg = 0.3;
  const auto seeds = seed_from_field(ScalarField({1, n}, v), tau_fg, tau_bg);
  std::size_t bg = 0, neutral = 0, fg = 0;
  for (float x : v) {
    if (x >= tau_fg) ++fg;
    else if (x <= tau_bg) ++bg;
    else ++neutral;
  }
  EXPECT_EQ(seeds.count(SeedLabel::kBackground), bg);
  EXPECT_EQ(seeds.count(SeedLabel::kNeutral), neutral);
  EXPECT_EQ(seeds.count(SeedLabel::kForeground), fg);
  for (std::size_t i = 0; i < n; ++i) {
    const auto want = i < bg             ? SeedLabel::kBackground
                      : i < bg + neutral ? SeedLabel::kNeutral
                                         : SeedLabel::kForeground;
    EXPECT_EQ(seeds.labels[i], want) << i;
  }
}

TEST(SeedFromField, RejectsInvertedThresholds) {
  const ScalarField f({1, 2}, {0.0f, 1.0f});
  EXPECT_EQ(code_of([&] { seed_from_field(f, 0.3, 0.6); }), ErrorCode::kInvalidArgument);
}

TEST(AffinityGraph, ConstantFeaturesGiveUniformRows) {
  const FeatureImage flat({6, 7}, 3, std::vector<std::uint8_t>(126, 90));
  const auto g = build_affinity_graph(flat, AffinityParams{});
  for (std::size_t i = 0; i < 42; ++i) {
    const std::size_t deg = g.row_offsets[i + 1] - g.row_offsets[i];
    for (std::size_t e = g.row_offsets[i]; e < g.row_offsets[i + 1]; ++e) {
      EXPECT_DOUBLE_EQ(g.weights[e], 1.0 / static_cast<double>(deg));
    }
  }
  // Corner (0,0) with radius 5 sees a 6x6 block minus itself.
  EXPECT_EQ(g.row_offsets[1] - g.row_offsets[0], 35u);
}

TEST(AffinityGraph, HardEdgeWeakensCrossWeights) {
  AffinityParams p;
  p.beta = 8;
  const auto f = AffinityFeatures::from_image(two_region_image({4, 8}));
  const double within = raw_affinity(f, p, 1 * 8 + 2, 1 * 8 + 3);
  const double across = raw_affinity(f, p, 1 * 8 + 3, 1 * 8 + 4);
  EXPECT_EQ(within, 1.0);
  EXPECT_LT(across, within);
  const auto g = build_affinity_graph(f, p);
  for (std::size_t e = g.row_offsets[11]; e < g.row_offsets[12]; ++e) {
    const bool same_side = (g.neighbors[e] % 8) < 4;
    if (!same_side) EXPECT_LT(g.weights[e], 1e-6);
  }
}

TEST(AffinityGraph, RandomFieldRowsAndSymmetry) {
  Rng rng(61);
  const auto field = testing::random_field(rng, {8, 8});
  const AffinityParams p;
  const auto f = AffinityFeatures::from_field(field);
  const auto g = build_affinity_graph(field, p);
  for (std::size_t i = 0; i < 64; ++i) {
    EXPECT_NEAR(row_sum(g, i), 1.0, 1e-6);
    double raw_total = 0.0;
    for (std::size_t e = g.row_offsets[i]; e < g.row_offsets[i + 1]; ++e) {
      raw_total += raw_affinity(f, p, i, g.neighbors[e]);
      EXPECT_GE(g.weights[e], 0.0);
      EXPECT_NE(g.neighbors[e], i);
    }
    for (std::size_t e = g.row_offsets[i]; e < g.row_offsets[i + 1]; ++e) {
      const double want = raw_affinity(f, p, i, g.neighbors[e]) / raw_total;
      EXPECT_NEAR(g.weights[e], want, 1e-12 + 1e-9 * want);
    }
  }
  for (std::size_t i = 0; i < 64; ++i) {
    for (std::size_t j = 0; j < 64; ++j) {
      EXPECT_EQ(raw_affinity(f, p, i, j), raw_affinity(f, p, j, i));
    }
  }
}

TEST(AffinityGraph, DissimilarNeighbourhoodDoesNotUnderflow) {
  AffinityParams p;
  p.sigma_feature = 0.001;
  Rng rng(62);
  const auto g = build_affinity_graph(testing::random_image(rng, {6, 6}, 3), p);
  for (std::size_t i = 0; i < 36; ++i) EXPECT_NEAR(row_sum(g, i), 1.0, 1e-6);
}

TEST(RandomWalk, FullySeededIsUnchanged) {
  Rng rng(63);
  const auto mask = testing::random_mask(rng, {5, 5});
  SeedMask seeds{mask.extent(), {}};
  for (auto b : mask.bits()) seeds.labels.push_back(b ? SeedLabel::kForeground : SeedLabel::kBackground);
  seeds.labels[0] = SeedLabel::kForeground;
  seeds.labels[1] = SeedLabel::kBackground;
  const auto g = build_affinity_graph(testing::random_image(rng, {5, 5}, 1), AffinityParams{});
  const auto out = random_walk_propagate(g, seeds, 16);
  for (std::size_t i = 0; i < 25; ++i) {
    EXPECT_EQ(out.values()[i], seeds.labels[i] == SeedLabel::kForeground ? 1.0f : 0.0f);
  }
}

TEST(RandomWalk, MiddleOfThreeSettlesAtHalf) {
  const FeatureImage flat({1, 3}, 1, {7, 7, 7});
  AffinityParams p;
  p.radius = 1;
  const auto g = build_affinity_graph(flat, p);
  const SeedMask seeds{{1, 3}, {SeedLabel::kForeground, SeedLabel::kNeutral, SeedLabel::kBackground}};
  const auto out = random_walk_propagate(g, seeds, 100);
  EXPECT_EQ(out.values()[0], 1.0f);
  EXPECT_EQ(out.values()[1], 0.5f);
  EXPECT_EQ(out.values()[2], 0.0f);
}

TEST(RandomWalk, TwoRegionsAgreeWithDenseOracle) {
  const Extent e{8, 8};
  const auto image = two_region_image(e);
  AffinityParams p;
  p.radius = 2;
  p.sigma_feature = 0.5;
  auto seeds = all_neutral(e);
  seeds.labels[3 * 8 + 6] = SeedLabel::kForeground;  // bright side
  seeds.labels[4 * 8 + 1] = SeedLabel::kBackground;  // dark side

  const auto g = build_affinity_graph(image, p);
  const auto got = random_walk_propagate(g, seeds, p.walk_iters);
  const auto want = dense_walk(AffinityFeatures::from_image(image), p, seeds, p.walk_iters);
  for (std::size_t i = 0; i < e.size(); ++i) {
    EXPECT_NEAR(got.values()[i], want(static_cast<Eigen::Index>(i)), 1e-6);
    if (seeds.labels[i] != SeedLabel::kNeutral) continue;
    if (i % 8 >= 4) {
      EXPECT_GT(got.values()[i], 0.5f) << i;
    } else {
      EXPECT_LT(got.values()[i], 0.5f) << i;
    }
  }
}

TEST(RandomWalk, RandomInstancesAgreeWithDenseOracle) {
  Rng rng(64);
  for (int trial = 0; trial < 5; ++trial) {
    const Extent e{8, 8};
    const auto image = testing::random_image(rng, e, 3);
    AffinityParams p;
    p.sigma_feature = 0.3;
    p.radius = 1 + static_cast<int>(rng.below(3));
    const auto seeds = seed_from_field(testing::random_field(rng, e), p.tau_fg, p.tau_bg);
    const auto got = random_walk_propagate(build_affinity_graph(image, p), seeds, p.walk_iters);
    const auto want = dense_walk(AffinityFeatures::from_image(image), p, seeds, p.walk_iters);
    for (std::size_t i = 0; i < e.size(); ++i) {
      EXPECT_NEAR(got.values()[i], want(static_cast<Eigen::Index>(i)), 1e-6);
      if (seeds.labels[i] == SeedLabel::kForeground) EXPECT_EQ(got.values()[i], 1.0f);
      if (seeds.labels[i] == SeedLabel::kBackground) EXPECT_EQ(got.values()[i], 0.0f);
    }
  }
}

TEST(RandomWalk, MirrorSymmetricSetupGivesMirrorSymmetricOutput) {
  Rng rng(65);
  const Extent e{8, 8};
  std::vector<std::uint8_t> px(64);
  for (std::size_t y = 0; y < 4; ++y) {
    for (std::size_t x = 0; x < 8; ++x) {
      px[y * 8 + x] = px[(7 - y) * 8 + x] = rng.byte();
    }
  }
  const FeatureImage image(e, 1, px);
  auto seeds = all_neutral(e);
  seeds.labels[3 * 8 + 6] = seeds.labels[4 * 8 + 6] = SeedLabel::kForeground;
  seeds.labels[3 * 8 + 1] = seeds.labels[4 * 8 + 1] = SeedLabel::kBackground;
  AffinityParams p;
  p.sigma_feature = 0.4;
  const auto out = random_walk_propagate(build_affinity_graph(image, p), seeds, 16);
  for (std::size_t y = 0; y < 8; ++y) {
    for (std::size_t x = 0; x < 8; ++x) EXPECT_NEAR(out.at(y, x), out.at(7 - y, x), 1e-6);
  }
}

TEST(RandomWalk, ThreadIndependentAndBounded) {
  Rng rng(66);
  const Extent e{20, 13};
  const auto field = testing::random_field(rng, e);
  const AffinityParams p;
  const auto seeds = seed_from_field(field, p.tau_fg, p.tau_bg);
  const auto g1 = build_affinity_graph(field, p, {1});
  const auto g8 = build_affinity_graph(field, p, {8});
  EXPECT_EQ(g1.weights, g8.weights);
  const auto a = random_walk_propagate(g1, seeds, 16, {1});
  const auto b = random_walk_propagate(g8, seeds, 16, {8});
  EXPECT_EQ(a, b);
}

TEST(RandomWalk, Errors) {
  const FeatureImage flat({2, 2}, 1, std::vector<std::uint8_t>(4, 0));
  const auto g = build_affinity_graph(flat, AffinityParams{});
  SeedMask only_fg = all_neutral({2, 2});
  only_fg.labels[0] = SeedLabel::kForeground;
  EXPECT_EQ(code_of([&] { random_walk_propagate(g, only_fg, 4); }), ErrorCode::kNoSeeds);
  SeedMask wrong = all_neutral({3, 2});
  wrong.labels[0] = SeedLabel::kForeground;
  wrong.labels[1] = SeedLabel::kBackground;
  EXPECT_EQ(code_of([&] { random_walk_propagate(g, wrong, 4); }), ErrorCode::kDimensionMismatch);
}

}  // namespace
}  // namespace crossmask
