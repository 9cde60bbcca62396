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

#include "crossmask/error.hpp"

namespace crossmask {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kBadVersion: return "BadVersion";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kDuplicateRecordKey: return "DuplicateRecordKey";
    case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
    case ErrorCode::kInvalidRecord: return "InvalidRecord";
    case ErrorCode::kTrailingData: return "TrailingData";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kBadHeader: return "BadHeader";
    case ErrorCode::kTruncatedPixels: return "TruncatedPixels";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNoRecordsForToken: return "NoRecordsForToken";
    case ErrorCode::kNoSeeds: return "NoSeeds";
    case ErrorCode::kEmptyGrid: return "EmptyGrid";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kMissingGroundTruth: return "MissingGroundTruth";
    case ErrorCode::kInvalidGeometry: return "InvalidGeometry";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail),
      code_(code),
      detail_(detail) {}

}  // namespace crossmask
