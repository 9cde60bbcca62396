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

#include "crossmask/tensorio.hpp"

#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <string>
#include <string_view>
#include <tuple>

#include "crossmask/error.hpp"

namespace crossmask {

namespace {

using RecordKey = std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>;

std::string at_offset(std::size_t offset) {
  return " at byte offset " + std::to_string(offset);
}

std::string key_string(const AttentionRecord& r) {
  return "(step " + std::to_string(r.step) + ", layer " +
         std::to_string(r.layer) + ", token " + std::to_string(r.token) + ")";
}

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<std::uint8_t>((v >> shift) & 0xFFu));
  }
}

std::uint32_t load_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return static_cast<std::uint32_t>(bytes[offset]) |
         (static_cast<std::uint32_t>(bytes[offset + 1]) << 8) |
         (static_cast<std::uint32_t>(bytes[offset + 2]) << 16) |
         (static_cast<std::uint32_t>(bytes[offset + 3]) << 24);
}

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const { return offset_; }
  std::size_t remaining() const { return bytes_.size() - offset_; }

  void require(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw Error(ErrorCode::kTruncatedFile,
                  std::string("need ") + std::to_string(n) + " bytes for " +
                      what + ", " + std::to_string(remaining()) +
                      " available" + at_offset(offset_));
    }
  }

  std::uint32_t u32(const char* what) {
    require(4, what);
    const std::uint32_t v = load_u32(bytes_, offset_);
    offset_ += 4;
    return v;
  }

  float f32() {
    const float v = std::bit_cast<float>(load_u32(bytes_, offset_));
    offset_ += 4;
    return v;
  }

  std::span<const std::uint8_t> take(std::size_t n) {
    auto s = bytes_.subspan(offset_, n);
    offset_ += n;
    return s;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t offset_ = 0;
};

void check_record_shape(const AttentionRecord& r, std::uint32_t token_count,
                        const std::string& where) {
  if (r.token >= token_count) {
    throw Error(ErrorCode::kInvalidRecord,
                "token " + std::to_string(r.token) + " >= token_count " +
                    std::to_string(token_count) + where);
  }
  if (r.height < 1 || r.height > kMaxAttentionSide || r.width < 1 ||
      r.width > kMaxAttentionSide) {
    throw Error(ErrorCode::kInvalidRecord,
                "record " + key_string(r) + " has size " +
                    std::to_string(r.height) + "x" + std::to_string(r.width) +
                    ", sides must be in [1, 4096]" + where);
  }
}

void check_value(float v, const std::string& where) {
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::kNonFiniteValue, "non-finite attention value" + where);
  }
  if (v < 0.0f) {
    throw Error(ErrorCode::kInvalidRecord,
                "negative attention value " + std::to_string(v) + where);
  }
}

// P5/P6 header: magic, width, height, maxval separated by whitespace with
// optional '#' comments, then exactly one whitespace byte before the raster.
struct PnmHeader {
  int channels = 1;
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t data_offset = 0;
};

PnmHeader parse_pnm_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw Error(ErrorCode::kBadHeader, "expected P5 or P6 magic" + at_offset(0));
  }
  PnmHeader header;
  header.channels = bytes[1] == '5' ? 1 : 3;
  std::size_t pos = 2;

  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_number = [&](const char* what) -> std::size_t {
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
      throw Error(ErrorCode::kBadHeader,
                  std::string("expected whitespace before ") + what + at_offset(pos));
    }
    skip_space();
    const std::size_t start = pos;
    std::size_t value = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      value = value * 10 + static_cast<std::size_t>(bytes[pos] - '0');
      if (value > 1'000'000) {
        throw Error(ErrorCode::kBadHeader,
                    std::string(what) + " too large" + at_offset(start));
      }
      ++pos;
    }
    if (pos == start) {
      throw Error(ErrorCode::kBadHeader,
                  std::string("expected ") + what + at_offset(start));
    }
    return value;
  };

  header.width = read_number("width");
  header.height = read_number("height");
  const std::size_t maxval_offset = pos;
  const std::size_t maxval = read_number("maxval");
  if (header.width == 0 || header.height == 0) {
    throw Error(ErrorCode::kBadHeader, "zero image dimension" + at_offset(2));
  }
  if (maxval != 255) {
    throw Error(ErrorCode::kBadHeader, "maxval " + std::to_string(maxval) +
                                           " unsupported, need 255" +
                                           at_offset(maxval_offset));
  }
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw Error(ErrorCode::kBadHeader,
                "expected single whitespace after maxval" + at_offset(pos));
  }
  header.data_offset = pos + 1;
  return header;
}

std::span<const std::uint8_t> pnm_raster(std::span<const std::uint8_t> bytes,
                                         const PnmHeader& header) {
  const std::size_t need = header.width * header.height *
                           static_cast<std::size_t>(header.channels);
  const std::size_t have = bytes.size() - header.data_offset;
  if (have < need) {
    throw Error(ErrorCode::kTruncatedPixels,
                "raster has " + std::to_string(have) + " bytes, expected " +
                    std::to_string(need) + at_offset(header.data_offset));
  }
  return bytes.subspan(header.data_offset, need);
}

std::vector<std::uint8_t> encode_pnm(const char* magic, Extent extent,
                                     std::span<const std::uint8_t> raster) {
  const std::string head = std::string(magic) + "\n" +
                           std::to_string(extent.width) + " " +
                           std::to_string(extent.height) + "\n255\n";
  std::vector<std::uint8_t> out(head.begin(), head.end());
  out.insert(out.end(), raster.begin(), raster.end());
  return out;
}

}  // namespace

AttentionStack::AttentionStack(std::uint32_t token_count,
                               std::vector<AttentionRecord> records)
    : token_count_(token_count), records_(std::move(records)) {
  if (token_count_ == 0) {
    throw Error(ErrorCode::kInvalidRecord, "token_count must be positive");
  }
  std::set<RecordKey> seen;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    const std::string where = " in record " + std::to_string(i);
    check_record_shape(r, token_count_, where);
    if (r.values.size() != static_cast<std::size_t>(r.height) * r.width) {
      throw Error(ErrorCode::kInvalidRecord,
                  "value count does not match height*width" + where);
    }
    if (!seen.insert({r.step, r.layer, r.token}).second) {
      throw Error(ErrorCode::kDuplicateRecordKey,
                  "duplicate record key " + key_string(r) + where);
    }
    for (float v : r.values) check_value(v, where);
  }
}

std::vector<std::uint8_t> encode_attention_stack(const AttentionStack& stack) {
  std::size_t total = kAtnsHeaderBytes;
  for (const auto& r : stack.records()) total += 20 + 4 * r.values.size();

  std::vector<std::uint8_t> out;
  out.reserve(total);
  for (char c : std::string_view("ATNS")) out.push_back(static_cast<std::uint8_t>(c));
  append_u32(out, kAtnsVersion);
  append_u32(out, stack.token_count());
  append_u32(out, static_cast<std::uint32_t>(stack.records().size()));
  for (const auto& r : stack.records()) {
    append_u32(out, r.step);
    append_u32(out, r.layer);
    append_u32(out, r.token);
    append_u32(out, r.height);
    append_u32(out, r.width);
    for (float v : r.values) append_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

AttentionStack decode_attention_stack(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  in.require(4, "magic");
  const auto magic = in.take(4);
  if (std::memcmp(magic.data(), "ATNS", 4) != 0) {
    throw Error(ErrorCode::kBadMagic, "expected \"ATNS\"" + at_offset(0));
  }
  const std::size_t version_offset = in.offset();
  const std::uint32_t version = in.u32("version");
  if (version != kAtnsVersion) {
    throw Error(ErrorCode::kBadVersion,
                "unsupported version " + std::to_string(version) +
                    at_offset(version_offset));
  }
  const std::size_t token_count_offset = in.offset();
  const std::uint32_t token_count = in.u32("token_count");
  if (token_count == 0) {
    throw Error(ErrorCode::kInvalidRecord,
                "token_count must be positive" + at_offset(token_count_offset));
  }
  const std::uint32_t record_count = in.u32("record_count");

  std::vector<AttentionRecord> records;
  std::set<RecordKey> seen;
  for (std::uint32_t i = 0; i < record_count; ++i) {
    const std::size_t record_offset = in.offset();
    const std::string where = at_offset(record_offset);
    AttentionRecord r;
    r.step = in.u32("record step");
    r.layer = in.u32("record layer");
    r.token = in.u32("record token");
    r.height = in.u32("record height");
    r.width = in.u32("record width");
    check_record_shape(r, token_count, where);
    if (!seen.insert({r.step, r.layer, r.token}).second) {
      throw Error(ErrorCode::kDuplicateRecordKey,
                  "duplicate record key " + key_string(r) + where);
    }
    const std::size_t n = static_cast<std::size_t>(r.height) * r.width;
    in.require(4 * n, "record values");
    r.values.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t value_offset = in.offset();
      r.values[k] = in.f32();
      check_value(r.values[k], at_offset(value_offset));
    }
    records.push_back(std::move(r));
  }
  if (in.remaining() != 0) {
    throw Error(ErrorCode::kTrailingData,
                std::to_string(in.remaining()) + " unexpected bytes" +
                    at_offset(in.offset()));
  }
  return AttentionStack(token_count, std::move(records));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw Error(ErrorCode::kIoFailure, "read failed for " + path.string());
  }
  return bytes;
}

void write_file_bytes(std::span<const std::uint8_t> bytes,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIoFailure, "cannot open " + path.string() +
                                           " for writing");
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) {
    throw Error(ErrorCode::kIoFailure, "write failed for " + path.string());
  }
}

AttentionStack read_attention_stack(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_attention_stack(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

void write_attention_stack(const AttentionStack& stack,
                           const std::filesystem::path& path) {
  write_file_bytes(encode_attention_stack(stack), path);
}

AttentionStack field_to_stack(const ScalarField& field) {
  AttentionRecord r;
  r.height = static_cast<std::uint32_t>(field.height());
  r.width = static_cast<std::uint32_t>(field.width());
  r.values.assign(field.values().begin(), field.values().end());
  std::vector<AttentionRecord> records;
  records.push_back(std::move(r));
  return AttentionStack(1, std::move(records));
}

ScalarField stack_to_field(const AttentionStack& stack) {
  if (stack.records().size() != 1) {
    throw Error(ErrorCode::kInvalidRecord,
                "field file must hold exactly one record, found " +
                    std::to_string(stack.records().size()));
  }
  const auto& r = stack.records().front();
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    if (r.values[i] > 1.0f) {
      throw Error(ErrorCode::kInvalidRecord,
                  "field value " + std::to_string(r.values[i]) +
                      " above 1 at index " + std::to_string(i));
    }
  }
  return ScalarField(r.extent(), r.values);
}

ScalarField read_field(const std::filesystem::path& path) {
  const auto stack = read_attention_stack(path);
  try {
    return stack_to_field(stack);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

void write_field(const ScalarField& field, const std::filesystem::path& path) {
  write_attention_stack(field_to_stack(field), path);
}

BinaryMask decode_mask(std::span<const std::uint8_t> bytes) {
  const PnmHeader header = parse_pnm_header(bytes);
  if (header.channels != 1) {
    throw Error(ErrorCode::kBadHeader, "mask must be a P5 greymap" + at_offset(0));
  }
  const auto raster = pnm_raster(bytes, header);
  std::vector<std::uint8_t> bits(raster.size());
  for (std::size_t i = 0; i < raster.size(); ++i) {
    bits[i] = raster[i] >= kMaskReadThreshold ? 1 : 0;
  }
  return BinaryMask({header.height, header.width}, std::move(bits));
}

std::vector<std::uint8_t> encode_mask(const BinaryMask& mask) {
  std::vector<std::uint8_t> raster(mask.bits().size());
  for (std::size_t i = 0; i < raster.size(); ++i) {
    raster[i] = mask.bits()[i] ? 255 : 0;
  }
  return encode_pnm("P5", mask.extent(), raster);
}

BinaryMask read_mask(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_mask(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

void write_mask(const BinaryMask& mask, const std::filesystem::path& path) {
  write_file_bytes(encode_mask(mask), path);
}

FeatureImage decode_feature_image(std::span<const std::uint8_t> bytes) {
  const PnmHeader header = parse_pnm_header(bytes);
  const auto raster = pnm_raster(bytes, header);
  return FeatureImage({header.height, header.width}, header.channels,
                      std::vector<std::uint8_t>(raster.begin(), raster.end()));
}

std::vector<std::uint8_t> encode_feature_image(const FeatureImage& image) {
  return encode_pnm(image.channels() == 1 ? "P5" : "P6", image.extent(),
                    image.samples());
}

FeatureImage read_feature_image(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_feature_image(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

void write_feature_image(const FeatureImage& image,
                         const std::filesystem::path& path) {
  write_file_bytes(encode_feature_image(image), path);
}

}  // namespace crossmask
