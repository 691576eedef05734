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

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "forge/engine.hpp"
#include "forge/run_invocation.hpp"

namespace forge::devrun {

inline constexpr std::string_view kX11SocketDir = "/tmp/.X11-unix";
inline constexpr std::string_view kContainerXauthority = "/tmp/.forge.xauth";
inline constexpr std::string_view kPluginSchema = "forge.run-invocation/v1";

struct HostEnvironment {
  std::optional<std::string> display;
  std::optional<std::string> x11_socket_dir;
  int gpu_count = 0;
  int uid = 0;
  int gid = 0;
  std::filesystem::path cwd;
  /// Nearest ancestor-or-self of cwd whose `src` holds a package manifest.
  std::optional<std::filesystem::path> detected_workspace;
  bool tty_available = false;
  /// Host X authority file, used only when cookie forwarding is requested.
  std::optional<std::string> xauthority;
};

/// Each set field replaces the probed value. An empty display string means
/// "no display".
struct HostOverrides {
  std::optional<std::string> display;
  std::optional<int> gpu_count;
  std::optional<int> uid;
  std::optional<int> gid;
  std::optional<std::filesystem::path> cwd;
  std::optional<bool> tty_available;
};

HostEnvironment probe_host(const HostOverrides& overrides = {});

std::optional<std::filesystem::path> detect_workspace(const std::filesystem::path& cwd);

struct UserArgs {
  std::string image;
  std::vector<std::string> command;
  std::optional<std::string> name;
  bool no_x11 = false;
  bool no_gpu = false;
  bool no_user_map = false;
  bool mount_workspace = true;
  bool forward_xauthority = false;
  bool remove_on_exit = true;
  std::string workspace_dir = "/ws";
  std::vector<std::string> passthrough;
};

/// `<image>-<cwd basename>` restricted to the engine's container name charset.
std::string default_container_name(std::string_view image, const std::filesystem::path& cwd);

RunInvocation synthesize_invocation(const HostEnvironment& host, const UserArgs& args);

enum class AttachShape { exec, run, remove_then_run };

std::string_view to_string(AttachShape shape);

struct AttachDecision {
  AttachShape shape;
  std::vector<engine::EngineCommand> commands;
};

/// Running containers get an interactive shell; stopped ones are removed and
/// started fresh; absent ones are started.
AttachDecision attach_or_run(const std::string& name, const RunInvocation& inv, const engine::ContainerState& state);

struct Plugin {
  std::string name;
  std::function<RunInvocation(const RunInvocation&)> transform;
};

/// Left fold of `plugins` over `inv`; after each step the invocation must
/// still be valid and keep its passthrough tokens.
RunInvocation apply_plugins(const RunInvocation& inv, const std::vector<Plugin>& plugins);

nlohmann::json to_json(const RunInvocation& inv);
RunInvocation invocation_from_json(const nlohmann::json& doc);

/// Executables in `dir` (sorted by file name). Each receives the invocation
/// document on stdin and must print the transformed document on stdout.
std::vector<Plugin> load_plugin_dir(const std::filesystem::path& dir);

/// $FORGE_PLUGIN_DIR, else $XDG_CONFIG_HOME/forge/plugins, else
/// ~/.config/forge/plugins.
std::filesystem::path default_plugin_dir();

}  // namespace forge::devrun
