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

#include "crossmask/image.hpp"

namespace crossmask {

/// Binarization threshold gamma, strictly inside (0, 1).
class Threshold {
 public:
  /// Throws Error(kInvalidArgument) unless 0 < gamma < 1.
  explicit Threshold(double gamma);
  double value() const { return gamma_; }

 private:
  double gamma_;
};

/// Foreground iff value > gamma; a value equal to gamma is background.
BinaryMask threshold_binarize(const ScalarField& field, Threshold gamma);

}  // namespace crossmask
