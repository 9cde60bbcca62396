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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace crossmask {

/// Height/width pair. All rasters in this library are row-major.
struct Extent {
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t size() const { return height * width; }
  friend bool operator==(const Extent&, const Extent&) = default;
};

/// H x W map of finite values in [0, 1]: averaged attention, affinity
/// posteriors, CRF foreground marginals.
class ScalarField {
 public:
  ScalarField() = default;
  /// Zero-filled field.
  explicit ScalarField(Extent extent);
  /// Throws Error(kInvalidArgument) unless every value is finite and in [0, 1]
  /// and values.size() == extent.size().
  ScalarField(Extent extent, std::vector<float> values);

  Extent extent() const { return extent_; }
  std::size_t height() const { return extent_.height; }
  std::size_t width() const { return extent_.width; }
  std::span<const float> values() const { return values_; }
  float at(std::size_t y, std::size_t x) const {
    return values_[y * extent_.width + x];
  }

  friend bool operator==(const ScalarField&, const ScalarField&) = default;

 private:
  Extent extent_;
  std::vector<float> values_;
};

/// Foreground (1) / background (0) raster.
class BinaryMask {
 public:
  BinaryMask() = default;
  explicit BinaryMask(Extent extent);
  /// Throws Error(kInvalidArgument) on any value other than 0 or 1.
  BinaryMask(Extent extent, std::vector<std::uint8_t> bits);

  Extent extent() const { return extent_; }
  std::size_t height() const { return extent_.height; }
  std::size_t width() const { return extent_.width; }
  std::span<const std::uint8_t> bits() const { return bits_; }
  std::uint8_t at(std::size_t y, std::size_t x) const {
    return bits_[y * extent_.width + x];
  }
  std::size_t foreground_count() const;
  BinaryMask complement() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  Extent extent_;
  std::vector<std::uint8_t> bits_;
};

/// 8-bit grey (1 channel) or RGB (3 channel) image, interleaved samples.
class FeatureImage {
 public:
  FeatureImage() = default;
  /// Throws Error(kInvalidArgument) unless channels is 1 or 3 and
  /// samples.size() == extent.size() * channels.
  FeatureImage(Extent extent, int channels, std::vector<std::uint8_t> samples);

  Extent extent() const { return extent_; }
  std::size_t height() const { return extent_.height; }
  std::size_t width() const { return extent_.width; }
  int channels() const { return channels_; }
  std::span<const std::uint8_t> samples() const { return samples_; }
  std::uint8_t at(std::size_t y, std::size_t x, int c) const {
    return samples_[(y * extent_.width + x) * static_cast<std::size_t>(channels_) +
                    static_cast<std::size_t>(c)];
  }

  friend bool operator==(const FeatureImage&, const FeatureImage&) = default;

 private:
  Extent extent_;
  int channels_ = 1;
  std::vector<std::uint8_t> samples_;
};

}  // namespace crossmask
