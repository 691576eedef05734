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

#include "forge/devrun.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>
#include <sstream>

#include <unistd.h>

#include "forge/error.hpp"
#include "forge/process.hpp"

namespace forge::devrun {

namespace fs = std::filesystem;

std::vector<std::string> invocation_problems(const RunInvocation& inv) {
  std::vector<std::string> problems;
  if (inv.image.empty()) problems.push_back("image is empty");
  std::set<std::string> container_paths;
  for (const auto& mount : inv.mounts) {
    if (mount.host_path.empty() || mount.container_path.empty()) {
      problems.push_back("mount with an empty path");
    } else if (!container_paths.insert(mount.container_path).second) {
      problems.push_back("duplicate container mount path '" + mount.container_path + "'");
    }
  }
  for (const auto& [key, _] : inv.env) {
    if (key.empty() || key.find('=') != std::string::npos) problems.push_back("invalid env key '" + key + "'");
  }
  if (inv.name && inv.name->empty()) problems.push_back("container name is empty");
  return problems;
}

namespace {

int count_gpus() {
  std::string smi = find_executable("nvidia-smi");
  if (smi.empty()) return 0;
  try {
    ProcessResult r = run_captured(smi, {"-L"});
    if (r.exit_code != 0) return 0;
    std::istringstream lines(r.stdout_text);
    int count = 0;
    for (std::string line; std::getline(lines, line);) {
      if (line.starts_with("GPU ")) ++count;
    }
    return count;
  } catch (const std::exception&) {
    return 0;
  }
}

bool has_manifest_below(const fs::path& dir, int depth) {
  std::error_code ec;
  if (fs::is_regular_file(dir / "package.xml", ec)) return true;
  if (depth == 0 || fs::exists(dir / "COLCON_IGNORE", ec) || fs::exists(dir / "CATKIN_IGNORE", ec)) return false;
  for (fs::directory_iterator it(dir, fs::directory_options::skip_permission_denied, ec), end; !ec && it != end;
       it.increment(ec)) {
    if (it->is_directory(ec) && !it->is_symlink(ec) && has_manifest_below(it->path(), depth - 1)) return true;
  }
  return false;
}

std::optional<std::string> env_var(const char* name) {
  const char* value = std::getenv(name);
  if (!value || !*value) return std::nullopt;
  return std::string(value);
}

}  // namespace

std::optional<fs::path> detect_workspace(const fs::path& cwd) {
  std::error_code ec;
  for (fs::path dir = cwd; !dir.empty(); dir = dir.parent_path()) {
    if (fs::is_directory(dir / "src", ec) && has_manifest_below(dir / "src", 4)) return dir;
    if (dir == dir.root_path()) break;
  }
  return std::nullopt;
}

HostEnvironment probe_host(const HostOverrides& overrides) {
  HostEnvironment host;
  host.display = overrides.display ? (overrides.display->empty() ? std::nullopt : overrides.display)
                                   : env_var("DISPLAY");
  if (host.display) host.x11_socket_dir = std::string(kX11SocketDir);
  host.gpu_count = overrides.gpu_count ? *overrides.gpu_count : count_gpus();
  host.uid = overrides.uid.value_or(static_cast<int>(::getuid()));
  host.gid = overrides.gid.value_or(static_cast<int>(::getgid()));
  host.cwd = overrides.cwd ? fs::absolute(*overrides.cwd).lexically_normal() : fs::current_path();
  host.detected_workspace = detect_workspace(host.cwd);
  host.tty_available = overrides.tty_available.value_or(::isatty(STDIN_FILENO) && ::isatty(STDOUT_FILENO));
  if (auto xauth = env_var("XAUTHORITY")) {
    host.xauthority = xauth;
  } else if (auto home = env_var("HOME"); home && fs::exists(fs::path(*home) / ".Xauthority")) {
    host.xauthority = (fs::path(*home) / ".Xauthority").string();
  }
  return host;
}

std::string default_container_name(std::string_view image, const fs::path& cwd) {
  std::string raw = std::string(image) + "-" + cwd.filename().string();
  std::string name;
  for (char c : raw) {
    bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
    name += ok ? c : '_';
  }
  auto first = std::find_if(name.begin(), name.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)); });
  name.erase(name.begin(), first);
  return name.empty() ? "forge" : name;
}

RunInvocation synthesize_invocation(const HostEnvironment& host, const UserArgs& args) {
  if (args.image.empty()) throw Error(ErrorCode::InvalidArgs, "an image is required");

  RunInvocation inv;
  inv.image = args.image;
  inv.name = args.name ? *args.name : default_container_name(args.image, host.cwd);

  if (host.display && !args.no_x11) {
    std::string socket_dir = host.x11_socket_dir.value_or(std::string(kX11SocketDir));
    inv.env["DISPLAY"] = *host.display;
    inv.mounts.push_back(Mount{socket_dir, socket_dir, MountMode::rw});
    if (args.forward_xauthority && host.xauthority) {
      inv.env["XAUTHORITY"] = std::string(kContainerXauthority);
      inv.mounts.push_back(Mount{*host.xauthority, std::string(kContainerXauthority), MountMode::ro});
    }
  }
  inv.gpu_all = host.gpu_count > 0 && !args.no_gpu;
  if (!args.no_user_map) inv.user_map = UserMap{host.uid, host.gid};
  if (args.mount_workspace && host.detected_workspace) {
    std::string target = args.workspace_dir + "/src";
    inv.mounts.push_back(Mount{(*host.detected_workspace / "src").string(), target, MountMode::rw});
    inv.workdir = target;
  }
  inv.interactive_tty = host.tty_available;
  inv.remove_on_exit = args.remove_on_exit;
  inv.passthrough = args.passthrough;
  inv.command = args.command;

  if (auto problems = invocation_problems(inv); !problems.empty()) {
    throw Error(ErrorCode::InvalidArgs, "invalid run invocation: " + problems.front());
  }
  return inv;
}

std::string_view to_string(AttachShape shape) {
  switch (shape) {
    case AttachShape::exec: return "exec";
    case AttachShape::run: return "run";
    case AttachShape::remove_then_run: return "remove-then-run";
  }
  return "unknown";
}

AttachDecision attach_or_run(const std::string& name, const RunInvocation& inv, const engine::ContainerState& state) {
  if (!inv.name || *inv.name != name) {
    throw Error(ErrorCode::InvalidArgs, "container name '" + name + "' does not match the invocation");
  }
  if (state.running) {
    return {AttachShape::exec, {engine::exec_argv(name, inv.user_map, inv.interactive_tty)}};
  }
  if (state.exists) {
    return {AttachShape::remove_then_run, {engine::remove_argv(name), engine::run_argv(inv)}};
  }
  return {AttachShape::run, {engine::run_argv(inv)}};
}

RunInvocation apply_plugins(const RunInvocation& inv, const std::vector<Plugin>& plugins) {
  RunInvocation current = inv;
  for (const auto& plugin : plugins) {
    RunInvocation next;
    try {
      next = plugin.transform(current);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::PluginViolation, "plugin '" + plugin.name + "' failed: " + e.what());
    }
    auto problems = invocation_problems(next);
    if (next.passthrough != current.passthrough) problems.push_back("passthrough tokens were changed");
    if (!problems.empty()) {
      throw Error(ErrorCode::PluginViolation, "plugin '" + plugin.name + "' produced an invalid invocation: " +
                                                  problems.front());
    }
    current = std::move(next);
  }
  return current;
}

nlohmann::json to_json(const RunInvocation& inv) {
  nlohmann::json mounts = nlohmann::json::array();
  for (const auto& m : inv.mounts) {
    mounts.push_back({{"host", m.host_path}, {"container", m.container_path},
                      {"mode", m.mode == MountMode::rw ? "rw" : "ro"}});
  }
  nlohmann::json doc{
      {"schema", kPluginSchema},
      {"image", inv.image},
      {"name", inv.name ? nlohmann::json(*inv.name) : nlohmann::json(nullptr)},
      {"env", inv.env},
      {"mounts", mounts},
      {"gpu_all", inv.gpu_all},
      {"user_map", inv.user_map ? nlohmann::json{{"uid", inv.user_map->uid}, {"gid", inv.user_map->gid}}
                                : nlohmann::json(nullptr)},
      {"workdir", inv.workdir ? nlohmann::json(*inv.workdir) : nlohmann::json(nullptr)},
      {"interactive_tty", inv.interactive_tty},
      {"remove_on_exit", inv.remove_on_exit},
      {"passthrough", inv.passthrough},
      {"command", inv.command},
  };
  return doc;
}

RunInvocation invocation_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("schema").get<std::string>() != kPluginSchema) {
      throw Error(ErrorCode::InvalidArgs, "unsupported invocation schema '" + doc.at("schema").get<std::string>() + "'");
    }
    RunInvocation inv;
    inv.image = doc.at("image").get<std::string>();
    if (!doc.at("name").is_null()) inv.name = doc.at("name").get<std::string>();
    inv.env = doc.at("env").get<std::map<std::string, std::string>>();
    for (const auto& m : doc.at("mounts")) {
      std::string mode = m.at("mode").get<std::string>();
      if (mode != "rw" && mode != "ro") throw Error(ErrorCode::InvalidArgs, "mount mode must be rw or ro");
      inv.mounts.push_back(Mount{m.at("host").get<std::string>(), m.at("container").get<std::string>(),
                                 mode == "rw" ? MountMode::rw : MountMode::ro});
    }
    inv.gpu_all = doc.at("gpu_all").get<bool>();
    if (!doc.at("user_map").is_null()) {
      inv.user_map = UserMap{doc.at("user_map").at("uid").get<int>(), doc.at("user_map").at("gid").get<int>()};
    }
    if (!doc.at("workdir").is_null()) inv.workdir = doc.at("workdir").get<std::string>();
    inv.interactive_tty = doc.at("interactive_tty").get<bool>();
    inv.remove_on_exit = doc.at("remove_on_exit").get<bool>();
    inv.passthrough = doc.at("passthrough").get<std::vector<std::string>>();
    inv.command = doc.at("command").get<std::vector<std::string>>();
    return inv;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgs, std::string("malformed invocation document: ") + e.what());
  }
}

std::vector<Plugin> load_plugin_dir(const fs::path& dir) {
  std::vector<Plugin> plugins;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return plugins;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && ::access(entry.path().c_str(), X_OK) == 0) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    plugins.push_back(Plugin{path.filename().string(), [path](const RunInvocation& inv) {
                               ProcessResult r = run_captured(path.string(), {}, to_json(inv).dump());
                               if (r.exit_code != 0) {
                                 throw Error(ErrorCode::PluginViolation,
                                             "exited with code " + std::to_string(r.exit_code) +
                                                 (r.stderr_text.empty() ? "" : ": " + r.stderr_text));
                               }
                               nlohmann::json doc;
                               try {
                                 doc = nlohmann::json::parse(r.stdout_text);
                               } catch (const nlohmann::json::exception& e) {
                                 throw Error(ErrorCode::PluginViolation, std::string("printed invalid JSON: ") + e.what());
                               }
                               return invocation_from_json(doc);
                             }});
  }
  return plugins;
}

fs::path default_plugin_dir() {
  if (auto dir = env_var("FORGE_PLUGIN_DIR")) return *dir;
  if (auto xdg = env_var("XDG_CONFIG_HOME")) return fs::path(*xdg) / "forge" / "plugins";
  if (auto home = env_var("HOME")) return fs::path(*home) / ".config" / "forge" / "plugins";
  return {};
}

}  // namespace forge::devrun
