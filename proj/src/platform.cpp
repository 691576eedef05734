// Copyright 2026 The forge Authors
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

#include "forge/platform.hpp"

#include <algorithm>

#include "forge/error.hpp"

namespace forge {

std::string_view to_string(Platform platform) {
  return platform == Platform::amd64 ? "amd64" : "arm64";
}

std::string engine_platform(Platform platform) { return "linux/" + std::string(to_string(platform)); }

Platform platform_from_string(std::string_view text) {
  if (text.starts_with("linux/")) text.remove_prefix(6);
  if (text == "amd64") return Platform::amd64;
  if (text == "arm64") return Platform::arm64;
  throw Error(ErrorCode::InvalidArgs, "unsupported platform '" + std::string(text) + "' (expected amd64 or arm64)");
}

std::vector<Platform> parse_platform_list(std::string_view comma_separated) {
  std::vector<Platform> platforms;
  while (!comma_separated.empty()) {
    auto comma = comma_separated.find(',');
    auto item = comma_separated.substr(0, comma);
    if (!item.empty()) {
      Platform p = platform_from_string(item);
      if (std::find(platforms.begin(), platforms.end(), p) == platforms.end()) platforms.push_back(p);
    }
    if (comma == std::string_view::npos) break;
    comma_separated.remove_prefix(comma + 1);
  }
  return platforms;
}

}  // namespace forge
