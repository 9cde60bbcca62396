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

#include "crossmask/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "crossmask/error.hpp"

namespace crossmask {

namespace {

void require_size(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " has " + std::to_string(got) +
                    " values, expected " + std::to_string(want));
  }
}

}  // namespace

ScalarField::ScalarField(Extent extent)
    : extent_(extent), values_(extent.size(), 0.0f) {}

ScalarField::ScalarField(Extent extent, std::vector<float> values)
    : extent_(extent), values_(std::move(values)) {
  require_size(values_.size(), extent_.size(), "scalar field");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const float v = values_[i];
    if (!std::isfinite(v) || v < 0.0f || v > 1.0f) {
      throw Error(ErrorCode::kInvalidArgument,
                  "scalar field value " + std::to_string(v) + " at index " +
                      std::to_string(i) + " outside [0, 1]");
    }
  }
}

BinaryMask::BinaryMask(Extent extent)
    : extent_(extent), bits_(extent.size(), 0) {}

BinaryMask::BinaryMask(Extent extent, std::vector<std::uint8_t> bits)
    : extent_(extent), bits_(std::move(bits)) {
  require_size(bits_.size(), extent_.size(), "binary mask");
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] > 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  "mask value " + std::to_string(bits_[i]) + " at index " +
                      std::to_string(i) + " is not 0 or 1");
    }
  }
}

std::size_t BinaryMask::foreground_count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

BinaryMask BinaryMask::complement() const {
  std::vector<std::uint8_t> flipped(bits_.size());
  std::transform(bits_.begin(), bits_.end(), flipped.begin(),
                 [](std::uint8_t b) { return static_cast<std::uint8_t>(1 - b); });
  return BinaryMask(extent_, std::move(flipped));
}

FeatureImage::FeatureImage(Extent extent, int channels,
                           std::vector<std::uint8_t> samples)
    : extent_(extent), channels_(channels), samples_(std::move(samples)) {
  if (channels_ != 1 && channels_ != 3) {
    throw Error(ErrorCode::kInvalidArgument,
                "feature image must have 1 or 3 channels, got " +
                    std::to_string(channels_));
  }
  require_size(samples_.size(),
               extent_.size() * static_cast<std::size_t>(channels_),
               "feature image");
}

}  // namespace crossmask
