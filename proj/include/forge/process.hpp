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
#include <vector>

namespace forge {

struct ProcessResult {
  int exit_code = 0;
  std::string stdout_text;
  std::string stderr_text;
};

/// Path of `program` on PATH (or `program` itself when it contains a slash
/// and is executable); empty when not found.
std::string find_executable(const std::string& program);

/// Runs `executable` with `args`, feeding `input` on stdin and capturing
/// both output streams.
ProcessResult run_captured(const std::string& executable, const std::vector<std::string>& args,
                           const std::string& input = {});

/// Runs `executable` attached to this process's stdio and returns its exit code.
int run_attached(const std::string& executable, const std::vector<std::string>& args);

}  // namespace forge
