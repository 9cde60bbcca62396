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

#include "crossmask/affinity.hpp"
#include "crossmask/aggregate.hpp"
#include "crossmask/binarize.hpp"
#include "crossmask/densecrf.hpp"
#include "crossmask/error.hpp"
#include "crossmask/evalmetrics.hpp"
#include "crossmask/fixtures.hpp"
#include "crossmask/fusion.hpp"
#include "crossmask/image.hpp"
#include "crossmask/parallel.hpp"
#include "crossmask/tensorio.hpp"
