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
#include <filesystem>
#include <vector>

#include "crossmask/image.hpp"
#include "crossmask/tensorio.hpp"

namespace crossmask {

enum class FixtureShape { kDisk, kRectangle, kTwoBlobs };

struct DiskGeometry {
  double center_y = 32.0;
  double center_x = 32.0;
  double radius = 16.0;
};

struct RectGeometry {
  std::size_t top = 16;
  std::size_t left = 16;
  std::size_t height = 32;
  std::size_t width = 32;
};

/// Synthetic stand-in for an exported diffusion run: one object, attention
/// records at several UNet resolutions, and a two-level grey image.
struct FixtureSpec {
  FixtureShape shape = FixtureShape::kDisk;
  Extent image{64, 64};
  DiskGeometry disk;
  RectGeometry rect;
  /// Second blob for kTwoBlobs; `disk` is the first.
  DiskGeometry second_disk{44.0, 44.0, 10.0};
  double noise = 0.0;    // uniform noise in [-noise, noise]
  int blur_radius = 0;   // box blur half-width in attention pixels
  std::uint64_t seed = 0;
  int steps = 2;
  std::vector<std::uint32_t> layer_resolutions{8, 16, 32, 64};

  /// Throws Error(kInvalidGeometry) if the object leaves the image or a
  /// parameter is out of range.
  void validate() const;

  /// 64x64 disk of radius 16, noise 0.1, blur 1, seed 42.
  static FixtureSpec golden_disk();
};

inline constexpr std::uint8_t kFixtureForegroundGrey = 200;
inline constexpr std::uint8_t kFixtureBackgroundGrey = 50;

struct Fixture {
  AttentionStack stack;
  FeatureImage image;
  BinaryMask ground_truth;
};

BinaryMask rasterize_fixture_shape(const FixtureSpec& spec);
/// Area-weighted average of `mask` over a target grid.
std::vector<double> area_downsample(const BinaryMask& mask, Extent target);
/// Mean over the in-bounds (2r+1)^2 window.
std::vector<double> box_blur(const std::vector<double>& values, Extent extent, int radius);

Fixture generate_fixture(const FixtureSpec& spec);

/// Writes attn.atns, image.pgm, and gt.pgm into `dir` (created if needed).
void write_fixture(const Fixture& fixture, const std::filesystem::path& dir);

}  // namespace crossmask
