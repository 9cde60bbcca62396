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
#include <span>
#include <vector>

#include "crossmask/image.hpp"

namespace crossmask {

/// One cross-attention map for (diffusion step, UNet layer, text token).
struct AttentionRecord {
  std::uint32_t step = 0;
  std::uint32_t layer = 0;
  std::uint32_t token = 0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<float> values;  // height * width, row-major

  Extent extent() const { return {height, width}; }
  friend bool operator==(const AttentionRecord&, const AttentionRecord&) = default;
};

inline constexpr std::uint32_t kMaxAttentionSide = 4096;

/// Ragged collection of attention maps at mixed resolutions. Immutable once
/// constructed; the constructor enforces key uniqueness, token range, side
/// limits, and finite non-negative values.
class AttentionStack {
 public:
  AttentionStack() = default;
  AttentionStack(std::uint32_t token_count, std::vector<AttentionRecord> records);

  std::uint32_t token_count() const { return token_count_; }
  std::span<const AttentionRecord> records() const { return records_; }

  friend bool operator==(const AttentionStack&, const AttentionStack&) = default;

 private:
  std::uint32_t token_count_ = 1;
  std::vector<AttentionRecord> records_;
};

// ATNS container: "ATNS", u32 version (1), u32 token_count, u32 record_count,
// then per record u32 step, layer, token, height, width followed by
// height*width float32 values. Little-endian throughout.
inline constexpr std::uint32_t kAtnsVersion = 1;
inline constexpr std::size_t kAtnsHeaderBytes = 16;

std::vector<std::uint8_t> encode_attention_stack(const AttentionStack& stack);
/// Errors (all name the failing byte offset): kBadMagic, kBadVersion,
/// kTruncatedFile, kDuplicateRecordKey, kNonFiniteValue, kInvalidRecord,
/// kTrailingData.
AttentionStack decode_attention_stack(std::span<const std::uint8_t> bytes);

AttentionStack read_attention_stack(const std::filesystem::path& path);
void write_attention_stack(const AttentionStack& stack,
                           const std::filesystem::path& path);

/// A ScalarField stored as a single-record ATNS file (step 0, layer 0,
/// token 0, token_count 1).
AttentionStack field_to_stack(const ScalarField& field);
ScalarField stack_to_field(const AttentionStack& stack);
ScalarField read_field(const std::filesystem::path& path);
void write_field(const ScalarField& field, const std::filesystem::path& path);

/// Ingest threshold: greymap samples >= 128 become foreground.
inline constexpr std::uint8_t kMaskReadThreshold = 128;

BinaryMask decode_mask(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_mask(const BinaryMask& mask);
BinaryMask read_mask(const std::filesystem::path& path);
/// Emits P5 with 0 for background and 255 for foreground.
void write_mask(const BinaryMask& mask, const std::filesystem::path& path);

/// Accepts P5 (grey) and P6 (RGB), maxval 255.
FeatureImage decode_feature_image(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_feature_image(const FeatureImage& image);
FeatureImage read_feature_image(const std::filesystem::path& path);
void write_feature_image(const FeatureImage& image,
                         const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(std::span<const std::uint8_t> bytes,
                      const std::filesystem::path& path);

}  // namespace crossmask
