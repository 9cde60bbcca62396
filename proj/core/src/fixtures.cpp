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

#include "crossmask/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "crossmask/error.hpp"

namespace crossmask {

namespace {

// Uniform draws built from raw engine output so the stream is identical on
// every standard library.
class NoiseSource {
 public:
  NoiseSource(std::uint64_t seed, double amplitude) : engine_(seed), amplitude_(amplitude) {}

  double next() {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return amplitude_ * (2.0 * u - 1.0);
  }

 private:
  std::mt19937_64 engine_;
  double amplitude_;
};

void check_disk(const DiskGeometry& d, Extent image, const char* which) {
  if (!(d.radius > 0.0) || d.center_y - d.radius < 0.0 || d.center_x - d.radius < 0.0 ||
      d.center_y + d.radius > static_cast<double>(image.height) ||
      d.center_x + d.radius > static_cast<double>(image.width)) {
    throw Error(ErrorCode::kInvalidGeometry,
                std::string(which) + " does not fit inside the image");
  }
}

bool inside(const DiskGeometry& d, std::size_t y, std::size_t x) {
  const double dy = static_cast<double>(y) + 0.5 - d.center_y;
  const double dx = static_cast<double>(x) + 0.5 - d.center_x;
  return dy * dy + dx * dx <= d.radius * d.radius;
}

// Overlap of source pixels with each destination cell along one axis.
std::vector<std::vector<std::pair<std::size_t, double>>> overlap_weights(std::size_t src,
                                                                         std::size_t dst) {
  std::vector<std::vector<std::pair<std::size_t, double>>> out(dst);
  const double scale = static_cast<double>(src) / static_cast<double>(dst);
  for (std::size_t o = 0; o < dst; ++o) {
    const double lo = static_cast<double>(o) * scale;
    const double hi = static_cast<double>(o + 1) * scale;
    for (auto s = static_cast<std::size_t>(std::floor(lo)); s < src && static_cast<double>(s) < hi; ++s) {
      const double overlap = std::min(hi, static_cast<double>(s + 1)) - std::max(lo, static_cast<double>(s));
      if (overlap > 0.0) out[o].push_back({s, overlap / scale});
    }
  }
  return out;
}

}  // namespace

void FixtureSpec::validate() const {
  if (image.height == 0 || image.width == 0) {
    throw Error(ErrorCode::kInvalidGeometry, "image must be at least 1x1");
  }
  switch (shape) {
    case FixtureShape::kDisk:
      check_disk(disk, image, "disk");
      break;
    case FixtureShape::kRectangle:
      if (rect.height == 0 || rect.width == 0 || rect.top + rect.height > image.height ||
          rect.left + rect.width > image.width) {
        throw Error(ErrorCode::kInvalidGeometry, "rectangle does not fit inside the image");
      }
      break;
    case FixtureShape::kTwoBlobs:
      check_disk(disk, image, "first blob");
      check_disk(second_disk, image, "second blob");
      break;
  }
  if (!(noise >= 0.0) || !std::isfinite(noise)) {
    throw Error(ErrorCode::kInvalidGeometry, "noise amplitude must be >= 0");
  }
  if (blur_radius < 0 || steps < 1 || layer_resolutions.empty()) {
    throw Error(ErrorCode::kInvalidGeometry,
                "blur radius must be >= 0, steps >= 1, and at least one layer given");
  }
  for (auto r : layer_resolutions) {
    if (r != 8 && r != 16 && r != 32 && r != 64) {
      throw Error(ErrorCode::kInvalidGeometry,
                  "layer resolution " + std::to_string(r) + " not in {8, 16, 32, 64}");
    }
  }
}

FixtureSpec FixtureSpec::golden_disk() {
  FixtureSpec spec;
  spec.noise = 0.1;
  spec.blur_radius = 1;
  spec.seed = 42;
  return spec;
}

BinaryMask rasterize_fixture_shape(const FixtureSpec& spec) {
  spec.validate();
  std::vector<std::uint8_t> bits(spec.image.size(), 0);
  for (std::size_t y = 0; y < spec.image.height; ++y) {
    for (std::size_t x = 0; x < spec.image.width; ++x) {
      bool on = false;
      switch (spec.shape) {
        case FixtureShape::kDisk:
          on = inside(spec.disk, y, x);
          break;
        case FixtureShape::kRectangle:
          on = y >= spec.rect.top && y < spec.rect.top + spec.rect.height &&
               x >= spec.rect.left && x < spec.rect.left + spec.rect.width;
          break;
        case FixtureShape::kTwoBlobs:
          on = inside(spec.disk, y, x) || inside(spec.second_disk, y, x);
          break;
      }
      bits[y * spec.image.width + x] = on ? 1 : 0;
    }
  }
  return BinaryMask(spec.image, std::move(bits));
}

std::vector<double> area_downsample(const BinaryMask& mask, Extent target) {
  const auto rows = overlap_weights(mask.height(), target.height);
  const auto cols = overlap_weights(mask.width(), target.width);
  std::vector<double> out(target.size(), 0.0);
  for (std::size_t y = 0; y < target.height; ++y) {
    for (std::size_t x = 0; x < target.width; ++x) {
      double acc = 0.0;
      for (const auto& [sy, wy] : rows[y]) {
        for (const auto& [sx, wx] : cols[x]) acc += wy * wx * mask.at(sy, sx);
      }
      out[y * target.width + x] = acc;
    }
  }
  return out;
}

std::vector<double> box_blur(const std::vector<double>& values, Extent extent, int radius) {
  if (radius <= 0) return values;
  const auto r = static_cast<std::size_t>(radius);
  std::vector<double> out(values.size());
  for (std::size_t y = 0; y < extent.height; ++y) {
    for (std::size_t x = 0; x < extent.width; ++x) {
      double acc = 0.0;
      std::size_t n = 0;
      for (std::size_t yy = y >= r ? y - r : 0; yy <= std::min(extent.height - 1, y + r); ++yy) {
        for (std::size_t xx = x >= r ? x - r : 0; xx <= std::min(extent.width - 1, x + r); ++xx) {
          acc += values[yy * extent.width + xx];
          ++n;
        }
      }
      out[y * extent.width + x] = acc / static_cast<double>(n);
    }
  }
  return out;
}

Fixture generate_fixture(const FixtureSpec& spec) {
  spec.validate();
  BinaryMask truth = rasterize_fixture_shape(spec);
  NoiseSource noise(spec.seed, spec.noise);

  std::vector<AttentionRecord> records;
  for (int s = 0; s < spec.steps; ++s) {
    for (std::size_t t = 0; t < spec.layer_resolutions.size(); ++t) {
      const std::uint32_t res = spec.layer_resolutions[t];
      const Extent ext{res, res};
      const auto blurred = box_blur(area_downsample(truth, ext), ext, spec.blur_radius);
      AttentionRecord r;
      r.step = static_cast<std::uint32_t>(s);
      r.layer = static_cast<std::uint32_t>(t);
      r.token = 0;
      r.height = res;
      r.width = res;
      r.values.resize(blurred.size());
      for (std::size_t i = 0; i < blurred.size(); ++i) {
        r.values[i] = static_cast<float>(std::max(0.0, blurred[i] + noise.next()));
      }
      records.push_back(std::move(r));
    }
  }

  std::vector<std::uint8_t> grey(spec.image.size());
  for (std::size_t i = 0; i < grey.size(); ++i) {
    const double level = truth.bits()[i] ? kFixtureForegroundGrey : kFixtureBackgroundGrey;
    grey[i] = static_cast<std::uint8_t>(std::clamp(std::round(level + 255.0 * noise.next()), 0.0, 255.0));
  }

  return {AttentionStack(1, std::move(records)), FeatureImage(spec.image, 1, std::move(grey)),
          std::move(truth)};
}

void write_fixture(const Fixture& fixture, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIoFailure, "cannot create " + dir.string() + ": " + ec.message());
  }
  write_attention_stack(fixture.stack, dir / "attn.atns");
  write_feature_image(fixture.image, dir / "image.pgm");
  write_mask(fixture.ground_truth, dir / "gt.pgm");
}

}  // namespace crossmask
