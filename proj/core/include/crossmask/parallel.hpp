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
#include <functional>

namespace crossmask {

/// Caps worker threads for the data-parallel loops inside one call.
/// `threads == 0` means std::thread::hardware_concurrency().
struct Parallelism {
  unsigned threads = 0;

  unsigned resolved() const;
};

/// Runs `body(begin, end)` over contiguous chunks of [0, count). Every index
/// is visited exactly once. Callers must write only to per-index outputs so
/// results are independent of the chunking.
void parallel_for(std::size_t count, Parallelism parallelism,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace crossmask
