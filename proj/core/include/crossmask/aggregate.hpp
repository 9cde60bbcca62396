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

#include <cstddef>
#include <cstdint>

#include "crossmask/image.hpp"
#include "crossmask/parallel.hpp"
#include "crossmask/tensorio.hpp"

namespace crossmask {

/// Native resolution used for averaging; the largest UNet attention size.
inline constexpr Extent kDefaultAggregateExtent{64, 64};

/// Divides every value by the record's maximum. A zero-max record maps to an
/// all-zero field.
ScalarField normalize_map(const AttentionRecord& record);

/// Bilinear resampling with pixel-centre alignment: output pixel x samples
/// source coordinate (x + 0.5) * src / dst - 0.5, clamped to the source.
ScalarField upsample_bilinear(const ScalarField& field, Extent target);

/// Mean of upsample(normalize(r)) over every record r of `token`, summed in
/// (step, layer) order. The divisor is the number of records present.
/// Throws Error(kNoRecordsForToken).
ScalarField aggregate_token(const AttentionStack& stack, std::uint32_t token,
                            Extent target = kDefaultAggregateExtent,
                            Parallelism parallelism = {});

}  // namespace crossmask
