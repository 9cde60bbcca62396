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

#include "crossmask/evalmetrics.hpp"

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>
#include <sstream>

#include "crossmask/error.hpp"
#include "crossmask/tensorio.hpp"
#include "test_support.hpp"

namespace crossmask {
namespace {

using testing::mask_from_rows;
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

TEST(Iou, ExactValues) {
  const auto block = mask_from_rows({"##..", "##..", "....", "...."});
  const auto shifted = mask_from_rows({".##.", ".##.", "....", "...."});
  EXPECT_EQ(iou(block, block), 1.0);
  EXPECT_EQ(iou(block, block.complement()), 0.0);
  EXPECT_EQ(iou(block, shifted), 1.0 / 3.0);
  EXPECT_EQ(iou(BinaryMask({4, 4}), BinaryMask({4, 4})), 1.0);
  EXPECT_EQ(iou(BinaryMask({4, 4}), block), 0.0);
}

TEST(Iou, SymmetricAndBounded) {
  Rng rng(81);
  for (int trial = 0; trial < 50; ++trial) {
    const Extent e{1 + rng.below(9), 1 + rng.below(9)};
    const auto a = testing::random_mask(rng, e);
    const auto b = testing::random_mask(rng, e);
    const double v = iou(a, b);
    EXPECT_EQ(v, iou(b, a));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Iou, GrowsAsPredictionFillsTheTarget) {
  const auto gt = mask_from_rows({"####", "####", "....", "...."});
  std::vector<std::uint8_t> bits(16, 0);
  double last = 0.0;
  for (std::size_t i = 0; i < 8; ++i) {
    bits[i] = 1;
    const double v = iou(BinaryMask({4, 4}, bits), gt);
    EXPECT_GT(v, last);
    last = v;
  }
  EXPECT_EQ(last, 1.0);
}

TEST(Iou, DimensionMismatch) {
  EXPECT_EQ(code_of([] { iou(BinaryMask({2, 2}), BinaryMask({2, 3})); }),
            ErrorCode::kDimensionMismatch);
}

class BatchEvaluate : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = testing::scratch_dir("batch_eval");
    pred_ = root_ / "pred";
    gt_ = root_ / "gt";
    std::filesystem::create_directories(pred_);
    std::filesystem::create_directories(gt_);
    const auto block = mask_from_rows({"##..", "##..", "....", "...."});
    const auto shifted = mask_from_rows({".##.", ".##.", "....", "...."});
    // IoUs 1, 0 and 1/3: mean 4/9.
    write_mask(block, pred_ / "a.pgm");
    write_mask(block, gt_ / "a.pgm");
    write_mask(block, pred_ / "c.pgm");
    write_mask(block.complement(), gt_ / "c.pgm");
    write_mask(shifted, pred_ / "b.pgm");
    write_mask(block, gt_ / "b.pgm");
  }

  std::filesystem::path root_, pred_, gt_;
};

TEST_F(BatchEvaluate, MeanOfThreePairs) {
  const auto report = batch_evaluate(pred_, gt_);
  ASSERT_EQ(report.count, 3u);
  EXPECT_EQ(report.entries[0].id, "a.pgm");
  EXPECT_EQ(report.entries[1].id, "b.pgm");
  EXPECT_EQ(report.entries[2].id, "c.pgm");
  EXPECT_EQ(report.entries[0].iou, 1.0);
  EXPECT_EQ(report.entries[1].iou, 1.0 / 3.0);
  EXPECT_EQ(report.entries[2].iou, 0.0);
  EXPECT_NEAR(report.mean_iou, 4.0 / 9.0, 1e-15);
  EXPECT_EQ(batch_evaluate(pred_, gt_, {4}).entries[1].iou, report.entries[1].iou);
}

TEST_F(BatchEvaluate, MissingGroundTruthIsNamed) {
  write_mask(BinaryMask({4, 4}), pred_ / "zz.pgm");
  try {
    batch_evaluate(pred_, gt_);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingGroundTruth);
    EXPECT_NE(std::string(e.what()).find("zz.pgm"), std::string::npos);
  }
}

TEST_F(BatchEvaluate, SizeMismatchIsNamed) {
  write_mask(BinaryMask({3, 3}), gt_ / "b.pgm");
  try {
    batch_evaluate(pred_, gt_);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
    EXPECT_NE(std::string(e.what()).find("b.pgm"), std::string::npos);
  }
}

TEST_F(BatchEvaluate, MissingDirectory) {
  EXPECT_EQ(code_of([&] { batch_evaluate(root_ / "nope", gt_); }), ErrorCode::kIoFailure);
}

TEST(FormatReport, CsvRows) {
  const auto report = EvalReport::from_entries({{"b.pgm", 0.25}, {"a.pgm", 0.5}});
  EXPECT_EQ(format_report(report, ReportFormat::kCsv),
            "id,iou\na.pgm,0.500000\nb.pgm,0.250000\n");
  EXPECT_EQ(report.mean_iou, 0.375);
}

TEST(FormatReport, EmptyCsvIsHeaderOnly) {
  const auto report = EvalReport::from_entries({});
  EXPECT_EQ(report.count, 0u);
  EXPECT_EQ(format_report(report, ReportFormat::kCsv), "id,iou\n");
}

TEST(FormatReport, CsvParsesBackWithinRounding) {
  Rng rng(82);
  std::vector<EvalEntry> entries;
  for (int i = 0; i < 20; ++i) entries.push_back({"m" + std::to_string(i) + ".pgm", rng.uniform()});
  const auto report = EvalReport::from_entries(entries);
  std::istringstream in(format_report(report, ReportFormat::kCsv));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "id,iou");
  std::size_t k = 0;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    ASSERT_NE(comma, std::string::npos);
    EXPECT_EQ(line.substr(0, comma), report.entries[k].id);
    EXPECT_NEAR(std::stod(line.substr(comma + 1)), report.entries[k].iou, 5e-7);
    ++k;
  }
  EXPECT_EQ(k, report.entries.size());
}

TEST(FormatReport, JsonLines) {
  const auto report = EvalReport::from_entries({{"a.pgm", 1.0}, {"b.pgm", 0.0}});
  std::istringstream in(format_report(report, ReportFormat::kJsonLines));
  std::vector<nlohmann::json> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(nlohmann::json::parse(line));
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0]["id"], "a.pgm");
  EXPECT_EQ(lines[0]["iou"].get<double>(), 1.0);
  EXPECT_EQ(lines[1]["id"], "b.pgm");
  EXPECT_EQ(lines[2]["count"].get<int>(), 2);
  EXPECT_EQ(lines[2]["mean_iou"].get<double>(), 0.5);
}

TEST(WriteReport, RoundTripsThroughDisk) {
  const auto dir = testing::scratch_dir("write_report");
  const auto report = EvalReport::from_entries({{"x.pgm", 0.125}});
  write_report(report, dir / "r.csv", ReportFormat::kCsv);
  const auto bytes = read_file_bytes(dir / "r.csv");
  EXPECT_EQ(std::string(bytes.begin(), bytes.end()), format_report(report, ReportFormat::kCsv));
}

}  // namespace
}  // namespace crossmask
