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
#include <optional>
#include <string>
#include <vector>

namespace forge::devrun {

enum class MountMode { rw, ro };

struct Mount {
  std::string host_path;
  std::string container_path;
  MountMode mode = MountMode::rw;
  bool operator==(const Mount&) const = default;
};

struct UserMap {
  int uid = 0;
  int gid = 0;
  bool operator==(const UserMap&) const = default;
};

/// A fully resolved container run request.
struct RunInvocation {
  std::string image;
  std::optional<std::string> name;
  std::map<std::string, std::string> env;
  std::vector<Mount> mounts;
  bool gpu_all = false;
  std::optional<UserMap> user_map;
  std::optional<std::string> workdir;
  bool interactive_tty = true;
  bool remove_on_exit = true;
  /// Engine flags forwarded verbatim, in order.
  std::vector<std::string> passthrough;
  std::vector<std::string> command;

  bool operator==(const RunInvocation&) const = default;
};

/// Broken invariants, empty when the invocation is valid.
std::vector<std::string> invocation_problems(const RunInvocation& inv);

}  // namespace forge::devrun
