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

#include <stdexcept>
#include <string>
#include <string_view>

namespace crossmask {

/// Machine-readable failure categories. The CLI prints these verbatim as
/// `ERROR <code>: <detail>`.
enum class ErrorCode {
  kBadMagic,
  kBadVersion,
  kTruncatedFile,
  kDuplicateRecordKey,
  kNonFiniteValue,
  kInvalidRecord,
  kTrailingData,
  kIoFailure,
  kBadHeader,
  kTruncatedPixels,
  kDimensionMismatch,
  kNoRecordsForToken,
  kNoSeeds,
  kEmptyGrid,
  kInvalidArgument,
  kMissingGroundTruth,
  kInvalidGeometry,
  kConfigError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace crossmask
