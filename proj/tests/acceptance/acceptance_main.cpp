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

// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "crossmask/crossmask.hpp"
#include "test_support.hpp"

namespace crossmask {
namespace {

using Clock = std::chrono::steady_clock;
using testing::Rng;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& why) {
    if (!ok && pass) {
      pass = false;
      detail = why;
    }
  }
};

int g_failures = 0;

void report(const char* name, const std::function<Outcome()>& check) {
  Outcome out;
  try {
    out = check();
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail = std::string("exception: ") + e.what();
  }
  std::printf("%s %s%s%s\n", out.pass ? "PASS" : "FAIL", name, out.detail.empty() ? "" : "  ",
              out.detail.c_str());
  if (!out.pass) ++g_failures;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

Outcome aggregate_oracle() {
  Outcome out;
  Rng rng(1001);
  double worst = 0.0;
  const auto start = Clock::now();
  for (int k = 0; k < 50; ++k) {
    const auto stack = testing::random_stack(rng, 8, 8);
    const auto got = aggregate_token(stack, 0);
    const auto want = testing::oracle_aggregate(stack, 0, kDefaultAggregateExtent);
    for (std::size_t i = 0; i < want.size(); ++i) {
      worst = std::max(worst, std::abs(static_cast<double>(got.values()[i]) - want[i]));
    }
  }
  const double elapsed = seconds_since(start);
  out.require(worst <= 1e-6, fmt("max-abs error %.3g", worst));
  out.require(elapsed < 1.0, fmt("took %.3f s", elapsed));
  out.detail = out.pass ? fmt("max-abs %.3g", worst) + fmt(", %.3f s", elapsed) : out.detail;
  return out;
}

struct CrfInstance {
  UnaryEnergy unary;
  FeatureImage image;
};

CrfInstance random_crf_instance(Rng& rng, Extent e) {
  const int channels = rng.below(2) == 0 ? 1 : 3;
  return {unary_from_field(testing::random_field(rng, e), 1e-5),
          testing::random_image(rng, e, channels)};
}

Outcome crf_normalization() {
  Outcome out;
  Rng rng(1002);
  double worst = 0.0;
  int observed = 0;
  for (int k = 0; k < 20; ++k) {
    const auto inst = random_crf_instance(rng, {12, 12});
    for (CrfMode mode : {CrfMode::kBrute, CrfMode::kFast}) {
      mean_field_refine(inst.unary, inst.image, CrfParams{}, mode, {},
                        [&](int, const LabelPosterior& q) {
                          ++observed;
                          for (const auto& p : q.q) worst = std::max(worst, std::abs(p[0] + p[1] - 1.0));
                        });
    }
  }
  out.require(observed == 20 * 2 * 11, "observer saw " + std::to_string(observed) + " iterations");
  out.require(worst <= 1e-6, fmt("max deviation %.3g", worst));
  if (out.pass) out.detail = fmt("max |sum-1| %.3g", worst);
  return out;
}

Outcome crf_fast_vs_brute() {
  Outcome out;
  Rng rng(1003);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Extent e{4 + rng.below(13), 4 + rng.below(13)};
    const auto inst = random_crf_instance(rng, e);
    const auto brute = mean_field_refine(inst.unary, inst.image, CrfParams{}, CrfMode::kBrute);
    const auto fast = mean_field_refine(inst.unary, inst.image, CrfParams{}, CrfMode::kFast);
    for (std::size_t i = 0; i < e.size(); ++i) {
      worst = std::max(worst, std::abs(brute.posterior.foreground(i) - fast.posterior.foreground(i)));
    }
    out.require(brute.mask == fast.mask, "masks differ on instance " + std::to_string(k));
  }
  out.require(worst <= 1e-4, fmt("max-abs Q difference %.3g", worst));

  const auto inst = random_crf_instance(rng, {16, 16});
  const auto start = Clock::now();
  mean_field_refine(inst.unary, inst.image, CrfParams{}, CrfMode::kBrute);
  const double elapsed = seconds_since(start);
  out.require(elapsed < 5.0, fmt("brute 16x16 took %.3f s", elapsed));
  if (out.pass) out.detail = fmt("max-abs %.3g", worst) + fmt(", brute 16x16 %.3f s", elapsed);
  return out;
}

Outcome crf_zero_pairwise() {
  Outcome out;
  Rng rng(1004);
  CrfParams params;
  params.w_appearance = 0.0;
  params.w_smooth = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Extent e{1 + rng.below(16), 1 + rng.below(16)};
    const auto inst = random_crf_instance(rng, e);
    const auto expected = posterior_from_unary(inst.unary).argmax();
    for (CrfMode mode : {CrfMode::kBrute, CrfMode::kFast}) {
      const auto r = mean_field_refine(inst.unary, inst.image, params, mode);
      out.require(r.mask == expected, "mismatch on instance " + std::to_string(k));
    }
  }
  return out;
}

Eigen::VectorXd dense_walk(const AffinityFeatures& f, const AffinityParams& p,
                           const SeedMask& seeds) {
  const auto n = static_cast<Eigen::Index>(f.extent.size());
  const auto w = static_cast<long>(f.extent.width);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 1, n + 1);
  Eigen::VectorXd x0(n + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto label = seeds.labels[static_cast<std::size_t>(i)];
    if (label != SeedLabel::kNeutral) {
      x0(i) = a(i, n) = label == SeedLabel::kForeground ? 1.0 : 0.0;
      continue;
    }
    x0(i) = 0.5;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i || std::max(std::labs(i / w - j / w), std::labs(i % w - j % w)) > p.radius) continue;
      double d2 = 0.0;
      for (int c = 0; c < f.channels; ++c) {
        const double d = f.values[static_cast<std::size_t>(i * f.channels + c)] -
                         f.values[static_cast<std::size_t>(j * f.channels + c)];
        d2 += d * d;
      }
      a(i, j) = std::pow(std::exp(-d2 / (2 * p.sigma_feature * p.sigma_feature)), p.beta);
    }
    a.row(i).head(n) /= a.row(i).head(n).sum();
  }
  a(n, n) = x0(n) = 1.0;
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n + 1, n + 1);
  for (int k = 0; k < p.walk_iters; ++k) power = a * power;
  return (power * x0).head(n);
}

Outcome affinity_properties() {
  Outcome out;
  Rng rng(1005);
  double row_err = 0.0;
  double oracle_err = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Extent e{8, 8};
    const auto image = testing::random_image(rng, e, rng.below(2) == 0 ? 1 : 3);
    AffinityParams p;
    p.sigma_feature = 0.2 + 0.3 * rng.uniform();
    p.radius = 1 + static_cast<int>(rng.below(5));
    const auto seeds = seed_from_field(testing::random_field(rng, e), p.tau_fg, p.tau_bg);
    const auto graph = build_affinity_graph(image, p);
    for (std::size_t i = 0; i < e.size(); ++i) {
      double s = 0.0;
      for (std::size_t j = graph.row_offsets[i]; j < graph.row_offsets[i + 1]; ++j) s += graph.weights[j];
      row_err = std::max(row_err, std::abs(s - 1.0));
    }
    const auto got = random_walk_propagate(graph, seeds, p.walk_iters);
    const auto want = dense_walk(AffinityFeatures::from_image(image), p, seeds);
    for (std::size_t i = 0; i < e.size(); ++i) {
      oracle_err = std::max(oracle_err, std::abs(got.values()[i] - want(static_cast<Eigen::Index>(i))));
      if (seeds.labels[i] == SeedLabel::kForeground) out.require(got.values()[i] == 1.0f, "foreground seed moved");
      if (seeds.labels[i] == SeedLabel::kBackground) out.require(got.values()[i] == 0.0f, "background seed moved");
    }
  }
  out.require(row_err <= 1e-6, fmt("row sum error %.3g", row_err));
  out.require(oracle_err <= 1e-6, fmt("dense oracle error %.3g", oracle_err));
  if (out.pass) out.detail = fmt("row err %.3g", row_err) + fmt(", oracle err %.3g", oracle_err);
  return out;
}

Outcome threshold_oracle() {
  Outcome out;
  Rng rng(1006);
  std::vector<double> grid_values;
  for (int i = 1; i <= 19; ++i) grid_values.push_back(i / 20.0);
  const ThresholdGrid grid(grid_values);
  for (int k = 0; k < 100; ++k) {
    const Extent e{1 + rng.below(16), 1 + rng.below(16)};
    // Coarsely quantized fields make ties between grid values common.
    std::vector<float> fv(e.size());
    for (auto& v : fv) v = k % 2 == 0 ? static_cast<float>(rng.below(5)) / 4.0f : static_cast<float>(rng.uniform());
    const ScalarField field(e, fv);
    const auto b_hat = testing::random_field(rng, e);
    const auto sel = select_threshold(field, b_hat, grid);
    const auto [gamma, score] = testing::oracle_select(field, b_hat, grid_values);
    out.require(sel.gamma == gamma, "gamma mismatch on pair " + std::to_string(k));
    out.require(sel.score == score, "score mismatch on pair " + std::to_string(k));
  }
  return out;
}

Outcome iou_exactness() {
  Outcome out;
  const auto block = testing::mask_from_rows({"##..", "##..", "....", "...."});
  const auto shifted = testing::mask_from_rows({".##.", ".##.", "....", "...."});
  out.require(iou(block, block) == 1.0, "identical masks");
  out.require(iou(block, block.complement()) == 0.0, "disjoint masks");
  out.require(iou(block, shifted) == 1.0 / 3.0, "shifted block");

  const auto root = testing::scratch_dir("acceptance_iou");
  std::filesystem::create_directories(root / "pred");
  std::filesystem::create_directories(root / "gt");
  write_mask(block, root / "pred" / "a.pgm");
  write_mask(block, root / "gt" / "a.pgm");
  write_mask(block, root / "pred" / "b.pgm");
  write_mask(block.complement(), root / "gt" / "b.pgm");
  write_mask(shifted, root / "pred" / "c.pgm");
  write_mask(block, root / "gt" / "c.pgm");
  const auto rep = batch_evaluate(root / "pred", root / "gt");
  out.require(rep.count == 3, "batch count");
  out.require(std::abs(rep.mean_iou - 4.0 / 9.0) <= 1e-15, fmt("batch mean %.17g", rep.mean_iou));
  return out;
}

std::vector<std::uint8_t> run_bytes(const Fixture& fx, Method m, unsigned threads) {
  PipelineConfig cfg;
  cfg.method = m;
  cfg.parallelism.threads = threads;
  return encode_mask(run_pipeline({fx.stack, fx.image, std::nullopt}, cfg).mask);
}

Outcome golden_end_to_end() {
  Outcome out;
  const auto start = Clock::now();
  const auto fx = generate_fixture(FixtureSpec::golden_disk());
  std::string detail;
  for (Method m : {Method::kSequential, Method::kCrossFusion}) {
    const std::string name = m == Method::kSequential ? "method 2" : "method 1";
    PipelineConfig cfg;
    cfg.method = m;
    const auto result = run_pipeline({fx.stack, fx.image, std::nullopt}, cfg);
    const double score = iou(result.mask, fx.ground_truth);
    out.require(score >= 0.95, name + fmt(" IoU %.4f", score));
    const auto first = encode_mask(result.mask);
    out.require(run_bytes(fx, m, 0) == first, name + " differs between runs");
    out.require(run_bytes(fx, m, 1) == first, name + " differs with 1 thread");
    out.require(run_bytes(fx, m, 8) == first, name + " differs with 8 threads");
    detail += (detail.empty() ? "" : ", ") + name + fmt(" IoU %.4f", score);
  }
  const double elapsed = seconds_since(start);
  out.require(elapsed < 10.0, fmt("took %.2f s", elapsed));
  if (out.pass) out.detail = detail + fmt(", %.2f s", elapsed);
  return out;
}

Outcome scale_invariance() {
  Outcome out;
  const auto fx = generate_fixture(FixtureSpec::golden_disk());
  std::vector<AttentionRecord> scaled(fx.stack.records().begin(), fx.stack.records().end());
  for (auto& r : scaled) {
    for (auto& v : r.values) v *= 7.3f;
  }
  Fixture big = fx;
  big.stack = AttentionStack(fx.stack.token_count(), std::move(scaled));
  for (Method m : {Method::kSequential, Method::kCrossFusion}) {
    out.require(run_bytes(fx, m, 0) == run_bytes(big, m, 0),
                m == Method::kSequential ? "method 2 mask changed" : "method 1 mask changed");
  }
  return out;
}

}  // namespace
}  // namespace crossmask

int main() {
  using namespace crossmask;
  report("aggregate_matches_bruteforce_oracle", aggregate_oracle);
  report("crf_posterior_normalized_every_iteration", crf_normalization);
  report("crf_fast_matches_brute", crf_fast_vs_brute);
  report("crf_zero_pairwise_equals_unary_argmax", crf_zero_pairwise);
  report("affinity_rows_stochastic_seeds_clamped_dense_oracle", affinity_properties);
  report("threshold_selection_matches_exhaustive_search", threshold_oracle);
  report("iou_exact_values_and_batch_mean", iou_exactness);
  report("golden_disk_end_to_end", golden_end_to_end);
  report("attention_scale_invariance", scale_invariance);
  std::printf("%d failure(s)\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
