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

#include "crossmask/binarize.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "crossmask/error.hpp"

namespace crossmask {

Threshold::Threshold(double gamma) : gamma_(gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "threshold gamma " + std::to_string(gamma) + " outside (0, 1)");
  }
}

BinaryMask threshold_binarize(const ScalarField& field, Threshold gamma) {
  const auto values = field.values();
  std::vector<std::uint8_t> bits(values.size());
  const double g = gamma.value();
  for (std::size_t i = 0; i < values.size(); ++i) {
    bits[i] = static_cast<double>(values[i]) > g ? 1 : 0;
  }
  return BinaryMask(field.extent(), std::move(bits));
}

}  // namespace crossmask
