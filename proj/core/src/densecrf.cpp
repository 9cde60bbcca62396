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

#include "crossmask/densecrf.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "crossmask/error.hpp"

namespace crossmask {

namespace {

using Pair = std::array<double, 2>;

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(name) + " must be positive, got " + std::to_string(v));
  }
}

void require_non_negative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(name) + " must be non-negative, got " + std::to_string(v));
  }
}

Pair normalized(double e_background, double e_foreground) {
  // Shift by the minimum energy so the larger weight is exactly 1.
  const double lo = std::min(e_background, e_foreground);
  const double b = std::exp(-(e_background - lo));
  const double f = std::exp(-(e_foreground - lo));
  const double z = b + f;
  return {b / z, f / z};
}

std::vector<double> gaussian_lut(double sigma, std::size_t radius) {
  std::vector<double> lut(radius + 1);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (std::size_t d = 0; d <= radius; ++d) {
    const double dd = static_cast<double>(d);
    lut[d] = std::exp(-dd * dd * inv);
  }
  return lut;
}

std::size_t truncation_radius(double sigma, std::size_t side) {
  const double r = std::ceil(kFastTruncationSigmas * sigma);
  const std::size_t limit = side > 0 ? side - 1 : 0;
  return r >= static_cast<double>(limit) ? limit : static_cast<std::size_t>(r);
}

// sums[i][l] = sum over j != i of (w_a k_a(i,j) + w_s k_s(i,j)) * Q_j(l)
class MessagePass {
 public:
  MessagePass(const CrfFeatures& features, const CrfParams& params,
              Parallelism parallelism)
      : f_(features), p_(params), par_(parallelism) {}

  virtual ~MessagePass() = default;
  virtual void compute(const LabelPosterior& q, std::vector<Pair>& sums) const = 0;

 protected:
  const CrfFeatures& f_;
  const CrfParams& p_;
  Parallelism par_;
};

class BruteMessages final : public MessagePass {
 public:
  using MessagePass::MessagePass;

  void compute(const LabelPosterior& q, std::vector<Pair>& sums) const override {
    const std::size_t w = f_.extent.width;
    const std::size_t n = f_.extent.size();
    const auto ch = static_cast<std::size_t>(f_.channels);
    const double inv_alpha = 1.0 / (2.0 * p_.theta_alpha * p_.theta_alpha);
    const double inv_beta = 1.0 / (2.0 * p_.theta_beta * p_.theta_beta);
    const double inv_gamma = 1.0 / (2.0 * p_.theta_gamma * p_.theta_gamma);

    parallel_for(n, par_, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const double yi = static_cast<double>(i / w);
        const double xi = static_cast<double>(i % w);
        const double* ci = &f_.color[i * ch];
        double acc_b = 0.0;
        double acc_f = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) continue;
          const double dy = yi - static_cast<double>(j / w);
          const double dx = xi - static_cast<double>(j % w);
          const double dp2 = dy * dy + dx * dx;
          const double* cj = &f_.color[j * ch];
          double dc2 = 0.0;
          for (std::size_t c = 0; c < ch; ++c) {
            const double d = ci[c] - cj[c];
            dc2 += d * d;
          }
          const double k = p_.w_appearance * std::exp(-dp2 * inv_alpha - dc2 * inv_beta) +
                           p_.w_smooth * std::exp(-dp2 * inv_gamma);
          acc_b += k * q.q[j][kBackground];
          acc_f += k * q.q[j][kForeground];
        }
        sums[i] = {acc_b, acc_f};
      }
    });
  }
};

class FastMessages final : public MessagePass {
 public:
  FastMessages(const CrfFeatures& features, const CrfParams& params,
               Parallelism parallelism)
      : MessagePass(features, params, parallelism),
        smooth_ry_(truncation_radius(params.theta_gamma, features.extent.height)),
        smooth_rx_(truncation_radius(params.theta_gamma, features.extent.width)),
        smooth_lut_(gaussian_lut(params.theta_gamma, std::max(smooth_ry_, smooth_rx_))),
        app_ry_(truncation_radius(params.theta_alpha, features.extent.height)),
        app_rx_(truncation_radius(params.theta_alpha, features.extent.width)),
        app_lut_(gaussian_lut(params.theta_alpha, std::max(app_ry_, app_rx_))),
        color_lut_(features.integral ? gaussian_lut(params.theta_beta, 255)
                                     : std::vector<double>{}) {}

  void compute(const LabelPosterior& q, std::vector<Pair>& sums) const override {
    std::fill(sums.begin(), sums.end(), Pair{0.0, 0.0});
    if (p_.w_smooth > 0.0) add_smoothness(q, sums);
    if (p_.w_appearance > 0.0) add_appearance(q, sums);
  }

 private:
  // Separable spatial Gaussian: rows, then columns, then drop the self term.
  void add_smoothness(const LabelPosterior& q, std::vector<Pair>& sums) const {
    const std::size_t h = f_.extent.height;
    const std::size_t w = f_.extent.width;
    std::vector<Pair> rows(h * w);
    parallel_for(h, par_, [&](std::size_t begin, std::size_t end) {
      for (std::size_t y = begin; y < end; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
          const std::size_t x0 = x >= smooth_rx_ ? x - smooth_rx_ : 0;
          const std::size_t x1 = std::min(w - 1, x + smooth_rx_);
          double b = 0.0;
          double f = 0.0;
          for (std::size_t xx = x0; xx <= x1; ++xx) {
            const double g = smooth_lut_[xx > x ? xx - x : x - xx];
            b += g * q.q[y * w + xx][kBackground];
            f += g * q.q[y * w + xx][kForeground];
          }
          rows[y * w + x] = {b, f};
        }
      }
    });
    parallel_for(h, par_, [&](std::size_t begin, std::size_t end) {
      for (std::size_t y = begin; y < end; ++y) {
        const std::size_t y0 = y >= smooth_ry_ ? y - smooth_ry_ : 0;
        const std::size_t y1 = std::min(h - 1, y + smooth_ry_);
        for (std::size_t x = 0; x < w; ++x) {
          double b = 0.0;
          double f = 0.0;
          for (std::size_t yy = y0; yy <= y1; ++yy) {
            const double g = smooth_lut_[yy > y ? yy - y : y - yy];
            b += g * rows[yy * w + x][kBackground];
            f += g * rows[yy * w + x][kForeground];
          }
          const std::size_t i = y * w + x;
          sums[i][kBackground] += p_.w_smooth * (b - q.q[i][kBackground]);
          sums[i][kForeground] += p_.w_smooth * (f - q.q[i][kForeground]);
        }
      }
    });
  }

  double color_weight(const double* a, const double* b) const {
    const auto ch = static_cast<std::size_t>(f_.channels);
    if (f_.integral) {
      double wgt = 1.0;
      for (std::size_t c = 0; c < ch; ++c) {
        wgt *= color_lut_[static_cast<std::size_t>(std::fabs(a[c] - b[c]))];
      }
      return wgt;
    }
    double dc2 = 0.0;
    for (std::size_t c = 0; c < ch; ++c) {
      const double d = a[c] - b[c];
      dc2 += d * d;
    }
    return std::exp(-dc2 / (2.0 * p_.theta_beta * p_.theta_beta));
  }

  void add_appearance(const LabelPosterior& q, std::vector<Pair>& sums) const {
    const std::size_t h = f_.extent.height;
    const std::size_t w = f_.extent.width;
    const auto ch = static_cast<std::size_t>(f_.channels);
    parallel_for(h, par_, [&](std::size_t begin, std::size_t end) {
      for (std::size_t y = begin; y < end; ++y) {
        const std::size_t y0 = y >= app_ry_ ? y - app_ry_ : 0;
        const std::size_t y1 = std::min(h - 1, y + app_ry_);
        for (std::size_t x = 0; x < w; ++x) {
          const std::size_t i = y * w + x;
          const std::size_t x0 = x >= app_rx_ ? x - app_rx_ : 0;
          const std::size_t x1 = std::min(w - 1, x + app_rx_);
          const double* ci = &f_.color[i * ch];
          double b = 0.0;
          double f = 0.0;
          for (std::size_t yy = y0; yy <= y1; ++yy) {
            const double gy = app_lut_[yy > y ? yy - y : y - yy];
            for (std::size_t xx = x0; xx <= x1; ++xx) {
              const std::size_t j = yy * w + xx;
              if (j == i) continue;
              const double k = gy * app_lut_[xx > x ? xx - x : x - xx] *
                               color_weight(ci, &f_.color[j * ch]);
              b += k * q.q[j][kBackground];
              f += k * q.q[j][kForeground];
            }
          }
          sums[i][kBackground] += p_.w_appearance * b;
          sums[i][kForeground] += p_.w_appearance * f;
        }
      }
    });
  }

  std::size_t smooth_ry_;
  std::size_t smooth_rx_;
  std::vector<double> smooth_lut_;
  std::size_t app_ry_;
  std::size_t app_rx_;
  std::vector<double> app_lut_;
  std::vector<double> color_lut_;
};

}  // namespace

void CrfParams::validate() const {
  require_non_negative(w_appearance, "w_appearance");
  require_non_negative(w_smooth, "w_smooth");
  require_positive(theta_alpha, "theta_alpha");
  require_positive(theta_beta, "theta_beta");
  require_positive(theta_gamma, "theta_gamma");
  if (iterations < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "iterations must be >= 1, got " + std::to_string(iterations));
  }
  if (!(unary_epsilon > 0.0 && unary_epsilon < 0.5)) {
    throw Error(ErrorCode::kInvalidArgument, "unary_epsilon must be in (0, 0.5)");
  }
  if (!(mask_confidence > 0.5 && mask_confidence < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "mask_confidence must be in (0.5, 1)");
  }
}

ScalarField LabelPosterior::foreground_field() const {
  std::vector<float> values(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    values[i] = static_cast<float>(std::clamp(q[i][kForeground], 0.0, 1.0));
  }
  return ScalarField(extent, std::move(values));
}

BinaryMask LabelPosterior::argmax() const {
  std::vector<std::uint8_t> bits(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    bits[i] = q[i][kForeground] > q[i][kBackground] ? 1 : 0;
  }
  return BinaryMask(extent, std::move(bits));
}

UnaryEnergy unary_from_field(const ScalarField& field, double eps) {
  if (!(eps > 0.0 && eps < 0.5)) {
    throw Error(ErrorCode::kInvalidArgument, "unary epsilon must be in (0, 0.5)");
  }
  UnaryEnergy out{field.extent(), std::vector<Pair>(field.values().size())};
  for (std::size_t i = 0; i < out.energy.size(); ++i) {
    const double p = std::clamp(static_cast<double>(field.values()[i]), eps, 1.0 - eps);
    out.energy[i] = {-std::log(1.0 - p), -std::log(p)};
  }
  return out;
}

UnaryEnergy unary_from_mask(const BinaryMask& mask, double confidence) {
  if (!(confidence > 0.5 && confidence < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "mask confidence must be in (0.5, 1)");
  }
  const double sure = -std::log(confidence);
  const double unsure = -std::log(1.0 - confidence);
  UnaryEnergy out{mask.extent(), std::vector<Pair>(mask.bits().size())};
  for (std::size_t i = 0; i < out.energy.size(); ++i) {
    out.energy[i] = mask.bits()[i] ? Pair{unsure, sure} : Pair{sure, unsure};
  }
  return out;
}

LabelPosterior posterior_from_unary(const UnaryEnergy& unary) {
  LabelPosterior q{unary.extent, std::vector<Pair>(unary.energy.size())};
  for (std::size_t i = 0; i < q.q.size(); ++i) {
    q.q[i] = normalized(unary.energy[i][kBackground], unary.energy[i][kForeground]);
  }
  return q;
}

CrfFeatures CrfFeatures::from_image(const FeatureImage& image) {
  CrfFeatures f;
  f.extent = image.extent();
  f.channels = image.channels();
  f.integral = true;
  f.color.assign(image.samples().begin(), image.samples().end());
  return f;
}

CrfFeatures CrfFeatures::from_field(const ScalarField& field) {
  CrfFeatures f;
  f.extent = field.extent();
  f.channels = 1;
  f.integral = false;
  f.color.resize(field.values().size());
  for (std::size_t i = 0; i < f.color.size(); ++i) {
    f.color[i] = 255.0 * static_cast<double>(field.values()[i]);
  }
  return f;
}

CrfResult mean_field_refine(const UnaryEnergy& unary, const CrfFeatures& features,
                            const CrfParams& params, CrfMode mode,
                            Parallelism parallelism, const CrfObserver& observer) {
  params.validate();
  if (unary.extent != features.extent ||
      unary.energy.size() != unary.extent.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "unary is " + std::to_string(unary.extent.height) + "x" +
                    std::to_string(unary.extent.width) + ", features are " +
                    std::to_string(features.extent.height) + "x" +
                    std::to_string(features.extent.width));
  }

  LabelPosterior q = posterior_from_unary(unary);
  if (observer) observer(0, q);

  std::unique_ptr<MessagePass> pass;
  if (mode == CrfMode::kBrute) {
    pass = std::make_unique<BruteMessages>(features, params, parallelism);
  } else {
    pass = std::make_unique<FastMessages>(features, params, parallelism);
  }

  std::vector<Pair> sums(q.q.size());
  LabelPosterior next = q;
  for (int it = 1; it <= params.iterations; ++it) {
    pass->compute(q, sums);
    // Potts compatibility: a label pays for the neighbours holding the other.
    for (std::size_t i = 0; i < q.q.size(); ++i) {
      next.q[i] = normalized(unary.energy[i][kBackground] + sums[i][kForeground],
                             unary.energy[i][kForeground] + sums[i][kBackground]);
    }
    std::swap(q, next);
    if (observer) observer(it, q);
  }
  BinaryMask mask = q.argmax();
  return {std::move(q), std::move(mask)};
}

CrfResult mean_field_refine(const UnaryEnergy& unary, const FeatureImage& features,
                            const CrfParams& params, CrfMode mode,
                            Parallelism parallelism, const CrfObserver& observer) {
  return mean_field_refine(unary, CrfFeatures::from_image(features), params, mode,
                           parallelism, observer);
}

CrfResult mean_field_refine(const UnaryEnergy& unary, const ScalarField& features,
                            const CrfParams& params, CrfMode mode,
                            Parallelism parallelism, const CrfObserver& observer) {
  return mean_field_refine(unary, CrfFeatures::from_field(features), params, mode,
                           parallelism, observer);
}

}  // namespace crossmask
