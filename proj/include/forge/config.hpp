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

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "forge/depgraph.hpp"

namespace forge::config {

/// One source of settings; unset fields defer to the next source.
struct ConfigLayer {
  std::optional<std::string> registry;
  std::optional<std::string> distro;
  std::optional<std::vector<std::filesystem::path>> rosdep_paths;
  std::optional<std::filesystem::path> distro_index_path;
  std::optional<long> parallelism;
  std::optional<bool> strict;
  std::optional<std::string> engine;
  std::optional<std::string> base_image;
  std::optional<std::string> command;
  std::optional<std::string> image_name;
};

struct GlobalConfig {
  std::optional<std::filesystem::path> config_file;
  std::string registry;
  depgraph::Distro distro = depgraph::Distro::humble;
  std::vector<std::filesystem::path> rosdep_paths;
  std::filesystem::path distro_index_path;
  std::size_t parallelism = 2;
  bool strict = false;
  std::string engine = "docker";
  std::optional<std::string> base_image;
  std::optional<std::string> command;
  std::optional<std::string> image_name;
};

/// Directory holding the bundled rosdep snapshot and distro indexes.
std::filesystem::path data_dir(const std::map<std::string, std::string>& env);

ConfigLayer load_config_file(const std::filesystem::path& path);

/// Reads FORGE_REGISTRY, FORGE_PARALLELISM, FORGE_STRICT, FORGE_DISTRO and
/// FORGE_ENGINE.
ConfigLayer layer_from_env(const std::map<std::string, std::string>& env);

/// Flags beat environment, which beats the config file, which beats defaults.
/// Relative paths from the config file resolve against its directory.
GlobalConfig resolve_config(const ConfigLayer& flags, const ConfigLayer& env, const ConfigLayer& file,
                            const std::filesystem::path& data_directory);

/// Throws InvalidConfig when a referenced database file is missing.
void check_data_paths(const GlobalConfig& cfg);

std::map<std::string, std::string> process_environment();

}  // namespace forge::config
