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

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace forge {

enum class Platform { amd64, arm64 };

std::string_view to_string(Platform platform);

/// `linux/amd64` style name used by container engines.
std::string engine_platform(Platform platform);

Platform platform_from_string(std::string_view text);  // accepts `amd64` or `linux/amd64`

std::vector<Platform> parse_platform_list(std::string_view comma_separated);

}  // namespace forge
