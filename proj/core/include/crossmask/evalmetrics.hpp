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

#include <filesystem>
#include <string>
#include <vector>

#include "crossmask/image.hpp"
#include "crossmask/parallel.hpp"

namespace crossmask {

/// |pred AND gt| / |pred OR gt| over foreground; 1 when both are empty.
/// Throws Error(kDimensionMismatch).
double iou(const BinaryMask& pred, const BinaryMask& gt);

struct EvalEntry {
  std::string id;
  double iou = 0.0;
};

struct EvalReport {
  std::vector<EvalEntry> entries;  // sorted by id
  double mean_iou = 0.0;
  std::size_t count = 0;

  /// Sorts entries and recomputes the summary fields.
  static EvalReport from_entries(std::vector<EvalEntry> entries);
};

/// Pairs every regular file in `pred_dir` with the same-named file in
/// `gt_dir`. Throws Error(kMissingGroundTruth) or Error(kDimensionMismatch)
/// naming the offending file.
EvalReport batch_evaluate(const std::filesystem::path& pred_dir,
                          const std::filesystem::path& gt_dir,
                          Parallelism parallelism = {});

enum class ReportFormat { kCsv, kJsonLines };

/// csv: "id,iou" header then rows with six decimals. json-lines: one
/// {"id","iou"} object per entry, then {"count","mean_iou"}.
std::string format_report(const EvalReport& report, ReportFormat format);
void write_report(const EvalReport& report, const std::filesystem::path& path,
                  ReportFormat format);

}  // namespace crossmask
