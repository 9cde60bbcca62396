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

#include "run_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <functional>
#include <sstream>
#include <vector>

#include "crossmask/error.hpp"
#include "crossmask/tensorio.hpp"

namespace crossmask::cli {

namespace {

[[noreturn]] void config_error(const std::string& detail) {
  throw Error(ErrorCode::kConfigError, detail);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view text, const std::string& where) {
  const auto s = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    config_error(where + ": cannot parse '" + std::string(text) + "'");
  }
  return value;
}

using Setter = std::function<void(RunConfig&, const std::string& value, const std::string& where)>;
using Schema = std::map<std::string, std::map<std::string, Setter>>;

template <typename T, typename Target>
Setter number(Target target) {
  return [target](RunConfig& c, const std::string& v, const std::string& where) {
    target(c) = parse_number<T>(v, where);
  };
}

template <typename Target>
Setter extent(Target target) {
  return [target](RunConfig& c, const std::string& v, const std::string&) {
    target(c) = parse_extent(v);
  };
}

template <typename Target>
Setter path(Target target) {
  return [target](RunConfig& c, const std::string& v, const std::string&) { target(c) = v; };
}

const Schema& schema() {
  static const Schema kSchema = {
      {"pipeline",
       {
           {"method",
            [](RunConfig& c, const std::string& v, const std::string& where) {
              const int m = parse_number<int>(v, where);
              if (m != 1 && m != 2) config_error(where + ": method must be 1 or 2");
              c.pipeline.method = static_cast<Method>(m);
            }},
           {"token", number<std::uint32_t>([](RunConfig& c) -> auto& { return c.pipeline.token; })},
           {"crf_mode",
            [](RunConfig& c, const std::string& v, const std::string& where) {
              if (v == "fast") {
                c.pipeline.crf_mode = CrfMode::kFast;
              } else if (v == "brute") {
                c.pipeline.crf_mode = CrfMode::kBrute;
              } else {
                config_error(where + ": crf_mode must be fast or brute");
              }
            }},
           {"aggregate_size", extent([](RunConfig& c) -> auto& { return c.pipeline.aggregate_extent; })},
           {"output_size", extent([](RunConfig& c) -> auto& { return c.pipeline.output_extent; })},
           {"threads", number<unsigned>([](RunConfig& c) -> auto& { return c.pipeline.parallelism.threads; })},
       }},
      {"crf",
       {
           {"w_appearance", number<double>([](RunConfig& c) -> auto& { return c.pipeline.crf.w_appearance; })},
           {"theta_alpha", number<double>([](RunConfig& c) -> auto& { return c.pipeline.crf.theta_alpha; })},
           {"theta_beta", number<double>([](RunConfig& c) -> auto& { return c.pipeline.crf.theta_beta; })},
           {"w_smooth", number<double>([](RunConfig& c) -> auto& { return c.pipeline.crf.w_smooth; })},
           {"theta_gamma", number<double>([](RunConfig& c) -> auto& { return c.pipeline.crf.theta_gamma; })},
           {"iterations", number<int>([](RunConfig& c) -> auto& { return c.pipeline.crf.iterations; })},
           {"unary_epsilon", number<double>([](RunConfig& c) -> auto& { return c.pipeline.crf.unary_epsilon; })},
           {"mask_confidence", number<double>([](RunConfig& c) -> auto& { return c.pipeline.crf.mask_confidence; })},
       }},
      {"affinity",
       {
           {"sigma_feature", number<double>([](RunConfig& c) -> auto& { return c.pipeline.affinity.sigma_feature; })},
           {"radius", number<int>([](RunConfig& c) -> auto& { return c.pipeline.affinity.radius; })},
           {"beta", number<double>([](RunConfig& c) -> auto& { return c.pipeline.affinity.beta; })},
           {"walk_iters", number<int>([](RunConfig& c) -> auto& { return c.pipeline.affinity.walk_iters; })},
           {"tau_fg", number<double>([](RunConfig& c) -> auto& { return c.pipeline.affinity.tau_fg; })},
           {"tau_bg", number<double>([](RunConfig& c) -> auto& { return c.pipeline.affinity.tau_bg; })},
       }},
      {"grid",
       {
           {"gammas",
            [](RunConfig& c, const std::string& v, const std::string& where) {
              try {
                c.pipeline.grid = ThresholdGrid(parse_double_list(v));
              } catch (const Error& e) {
                config_error(where + ": " + e.detail());
              }
            }},
       }},
      {"io",
       {
           {"attn", path([](RunConfig& c) -> auto& { return c.io.attn; })},
           {"image", path([](RunConfig& c) -> auto& { return c.io.image; })},
           {"bhat", path([](RunConfig& c) -> auto& { return c.io.bhat; })},
           {"out", path([](RunConfig& c) -> auto& { return c.io.out; })},
       }},
      {"fixture",
       {
           {"shape",
            [](RunConfig& c, const std::string& v, const std::string& where) {
              if (v == "disk") {
                c.fixture.shape = FixtureShape::kDisk;
              } else if (v == "rectangle") {
                c.fixture.shape = FixtureShape::kRectangle;
              } else if (v == "two_blobs") {
                c.fixture.shape = FixtureShape::kTwoBlobs;
              } else {
                config_error(where + ": shape must be disk, rectangle or two_blobs");
              }
            }},
           {"size", extent([](RunConfig& c) -> auto& { return c.fixture.image; })},
           {"center_y", number<double>([](RunConfig& c) -> auto& { return c.fixture.disk.center_y; })},
           {"center_x", number<double>([](RunConfig& c) -> auto& { return c.fixture.disk.center_x; })},
           {"radius", number<double>([](RunConfig& c) -> auto& { return c.fixture.disk.radius; })},
           {"second_center_y", number<double>([](RunConfig& c) -> auto& { return c.fixture.second_disk.center_y; })},
           {"second_center_x", number<double>([](RunConfig& c) -> auto& { return c.fixture.second_disk.center_x; })},
           {"second_radius", number<double>([](RunConfig& c) -> auto& { return c.fixture.second_disk.radius; })},
           {"rect_top", number<std::size_t>([](RunConfig& c) -> auto& { return c.fixture.rect.top; })},
           {"rect_left", number<std::size_t>([](RunConfig& c) -> auto& { return c.fixture.rect.left; })},
           {"rect_height", number<std::size_t>([](RunConfig& c) -> auto& { return c.fixture.rect.height; })},
           {"rect_width", number<std::size_t>([](RunConfig& c) -> auto& { return c.fixture.rect.width; })},
           {"noise", number<double>([](RunConfig& c) -> auto& { return c.fixture.noise; })},
           {"blur_radius", number<int>([](RunConfig& c) -> auto& { return c.fixture.blur_radius; })},
           {"seed", number<std::uint64_t>([](RunConfig& c) -> auto& { return c.fixture.seed; })},
           {"steps", number<int>([](RunConfig& c) -> auto& { return c.fixture.steps; })},
           {"layers",
            [](RunConfig& c, const std::string& v, const std::string& where) {
              c.fixture.layer_resolutions.clear();
              std::stringstream in(v);
              std::string item;
              while (std::getline(in, item, ',')) {
                c.fixture.layer_resolutions.push_back(parse_number<std::uint32_t>(item, where));
              }
            }},
       }},
  };
  return kSchema;
}

}  // namespace

Extent parse_extent(std::string_view text) {
  const auto s = trim(text);
  const auto x = s.find('x');
  if (x == std::string_view::npos) {
    config_error("size '" + std::string(text) + "' is not of the form HxW");
  }
  const std::string where = "size '" + std::string(text) + "'";
  const Extent e{parse_number<std::size_t>(s.substr(0, x), where),
                 parse_number<std::size_t>(s.substr(x + 1), where)};
  if (e.height == 0 || e.width == 0) config_error(where + " must be at least 1x1");
  return e;
}

std::vector<double> parse_double_list(std::string_view text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string_view::npos ? text.size() : comma;
    out.push_back(parse_number<double>(text.substr(start, end - start),
                                       "list '" + std::string(text) + "'"));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

ConfigSections parse_config_sections(std::string_view text) {
  boost::property_tree::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    config_error("line " + std::to_string(e.line()) + ": " + e.message());
  }
  ConfigSections sections;
  for (const auto& [name, section] : tree) {
    if (section.empty()) {
      config_error("key '" + name + "' appears outside any [section]");
    }
    auto& keys = sections[name];
    for (const auto& [key, value] : section) keys[key] = value.data();
  }
  return sections;
}

RunConfig run_config_from_sections(const ConfigSections& sections) {
  RunConfig config;
  const auto& known = schema();
  for (const auto& [name, keys] : sections) {
    const auto section = known.find(name);
    if (section == known.end()) config_error("unknown section [" + name + "]");
    for (const auto& [key, value] : keys) {
      const auto setter = section->second.find(key);
      if (setter == section->second.end()) {
        config_error("unknown key '" + key + "' in [" + name + "]");
      }
      setter->second(config, value, name + "." + key);
    }
  }
  try {
    config.pipeline.validate();
  } catch (const Error& e) {
    config_error(e.detail());
  }
  return config;
}

RunConfig parse_run_config(std::string_view text) {
  return run_config_from_sections(parse_config_sections(text));
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return parse_run_config(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

}  // namespace crossmask::cli
