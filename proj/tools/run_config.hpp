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
#include <map>
#include <string>
#include <string_view>

#include "crossmask/fixtures.hpp"
#include "crossmask/fusion.hpp"

namespace crossmask::cli {

/// Section name -> key -> raw value, as read from a config file.
using ConfigSections = std::map<std::string, std::map<std::string, std::string>>;

struct IoPaths {
  std::filesystem::path attn;
  std::filesystem::path image;
  std::filesystem::path bhat;
  std::filesystem::path out;
};

/// Everything a config file can set. Missing keys keep the library defaults.
struct RunConfig {
  PipelineConfig pipeline;
  FixtureSpec fixture;
  IoPaths io;
};

/// Parses flat `key = value` text with `[section]` headers; `;` and `#` start
/// comment lines. Throws Error(kConfigError) on malformed lines, duplicate
/// sections or keys, and keys outside any section.
ConfigSections parse_config_sections(std::string_view text);

/// Applies recognised keys on top of the defaults. Throws Error(kConfigError)
/// on unknown sections or keys, unparsable values, and invalid parameters.
RunConfig run_config_from_sections(const ConfigSections& sections);

RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);

/// "HxW" -> Extent. Throws Error(kConfigError).
Extent parse_extent(std::string_view text);
/// Comma-separated doubles. Throws Error(kConfigError).
std::vector<double> parse_double_list(std::string_view text);

}  // namespace crossmask::cli
