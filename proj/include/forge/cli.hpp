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

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "forge/engine.hpp"

namespace forge::cli {

struct Io {
  std::ostream& out;
  std::ostream& err;
  std::map<std::string, std::string> env;
  /// Used instead of the subprocess driver when set (and not in dry-run mode).
  engine::Driver* driver = nullptr;
};

/// Runs the `forge` command line. `args` excludes the program name. Returns
/// 0 on success, 1 on engine or internal errors, 2 on user errors.
int run(const std::vector<std::string>& args, Io& io);

}  // namespace forge::cli
