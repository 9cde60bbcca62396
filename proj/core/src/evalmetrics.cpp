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

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "crossmask/error.hpp"
#include "crossmask/tensorio.hpp"
#include <nlohmann/json.hpp>

namespace crossmask {

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

double iou(const BinaryMask& pred, const BinaryMask& gt) {
  if (pred.extent() != gt.extent()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "prediction is " + std::to_string(pred.height()) + "x" +
                    std::to_string(pred.width()) + ", ground truth is " +
                    std::to_string(gt.height()) + "x" + std::to_string(gt.width()));
  }
  std::size_t overlap = 0;
  std::size_t united = 0;
  const auto a = pred.bits();
  const auto b = gt.bits();
  for (std::size_t i = 0; i < a.size(); ++i) {
    overlap += a[i] & b[i];
    united += a[i] | b[i];
  }
  if (united == 0) return 1.0;
  return static_cast<double>(overlap) / static_cast<double>(united);
}

EvalReport EvalReport::from_entries(std::vector<EvalEntry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const EvalEntry& a, const EvalEntry& b) { return a.id < b.id; });
  EvalReport report;
  report.count = entries.size();
  double total = 0.0;
  for (const auto& e : entries) total += e.iou;
  report.mean_iou = entries.empty() ? 0.0 : total / static_cast<double>(entries.size());
  report.entries = std::move(entries);
  return report;
}

EvalReport batch_evaluate(const std::filesystem::path& pred_dir,
                          const std::filesystem::path& gt_dir,
                          Parallelism parallelism) {
  namespace fs = std::filesystem;
  for (const auto& dir : {pred_dir, gt_dir}) {
    if (!fs::is_directory(dir)) {
      throw Error(ErrorCode::kIoFailure, dir.string() + " is not a directory");
    }
  }
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(pred_dir)) {
    if (entry.is_regular_file()) names.push_back(entry.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  for (const auto& name : names) {
    if (!fs::is_regular_file(gt_dir / name)) {
      throw Error(ErrorCode::kMissingGroundTruth, name);
    }
  }

  std::vector<EvalEntry> entries(names.size());
  parallel_for(names.size(), parallelism, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const BinaryMask pred = read_mask(pred_dir / names[k]);
      const BinaryMask gt = read_mask(gt_dir / names[k]);
      if (pred.extent() != gt.extent()) {
        throw Error(ErrorCode::kDimensionMismatch, names[k]);
      }
      entries[k] = {names[k], iou(pred, gt)};
    }
  });
  return EvalReport::from_entries(std::move(entries));
}

std::string format_report(const EvalReport& report, ReportFormat format) {
  std::string out;
  if (format == ReportFormat::kCsv) {
    out = "id,iou\n";
    for (const auto& e : report.entries) out += e.id + "," + fixed6(e.iou) + "\n";
    return out;
  }
  for (const auto& e : report.entries) {
    out += nlohmann::ordered_json{{"id", e.id}, {"iou", e.iou}}.dump() + "\n";
  }
  out += nlohmann::ordered_json{{"count", report.count}, {"mean_iou", report.mean_iou}}
             .dump() +
         "\n";
  return out;
}

void write_report(const EvalReport& report, const std::filesystem::path& path,
                  ReportFormat format) {
  const std::string text = format_report(report, format);
  write_file_bytes(std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                             text.size()),
                   path);
}

}  // namespace crossmask
