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

#include "forge/config.hpp"

#include <algorithm>
#include <cctype>

#include <yaml-cpp/yaml.h>

#include "forge/error.hpp"

extern char** environ;

namespace forge::config {

namespace fs = std::filesystem;

#ifndef FORGE_DEFAULT_DATA_DIR
#define FORGE_DEFAULT_DATA_DIR "data"
#endif

fs::path data_dir(const std::map<std::string, std::string>& env) {
  if (auto it = env.find("FORGE_DATA_DIR"); it != env.end() && !it->second.empty()) return it->second;
  return FORGE_DEFAULT_DATA_DIR;
}

namespace {

std::optional<bool> parse_bool(const std::string& text, const std::string& what) {
  std::string lower = text;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "1" || lower == "true" || lower == "yes" || lower == "on") return true;
  if (lower == "0" || lower == "false" || lower == "no" || lower == "off" || lower.empty()) return false;
  throw Error(ErrorCode::InvalidConfig, what + ": expected a boolean, got '" + text + "'");
}

long parse_long(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    long value = std::stol(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidConfig, what + ": expected an integer, got '" + text + "'");
  }
}

template <typename T>
const std::optional<T>& pick(const std::optional<T>& a, const std::optional<T>& b, const std::optional<T>& c) {
  return a ? a : (b ? b : c);
}

}  // namespace

ConfigLayer load_config_file(const fs::path& path) {
  ConfigLayer layer;
  YAML::Node doc;
  try {
    doc = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
  if (doc.IsNull()) return layer;
  if (!doc.IsMap()) throw Error(ErrorCode::InvalidConfig, path.string() + ": top level must be a mapping");
  fs::path base = path.parent_path();
  try {
    for (const auto& item : doc) {
      auto key = item.first.as<std::string>();
      const YAML::Node& value = item.second;
      if (key == "registry") {
        layer.registry = value.as<std::string>();
      } else if (key == "distro") {
        layer.distro = value.as<std::string>();
      } else if (key == "rosdep") {
        std::vector<fs::path> paths;
        if (value.IsSequence()) {
          for (const auto& p : value) paths.push_back(base / p.as<std::string>());
        } else {
          paths.push_back(base / value.as<std::string>());
        }
        layer.rosdep_paths = paths;
      } else if (key == "distro_index") {
        layer.distro_index_path = base / value.as<std::string>();
      } else if (key == "parallelism") {
        layer.parallelism = value.as<long>();
      } else if (key == "strict") {
        layer.strict = value.as<bool>();
      } else if (key == "engine") {
        layer.engine = value.as<std::string>();
      } else if (key == "base_image") {
        layer.base_image = value.as<std::string>();
      } else if (key == "command") {
        layer.command = value.as<std::string>();
      } else if (key == "image_name") {
        layer.image_name = value.as<std::string>();
      } else {
        throw Error(ErrorCode::InvalidConfig, path.string() + ": unknown key '" + key + "'");
      }
    }
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
  return layer;
}

ConfigLayer layer_from_env(const std::map<std::string, std::string>& env) {
  ConfigLayer layer;
  auto get = [&](const char* name) -> std::optional<std::string> {
    auto it = env.find(name);
    if (it == env.end()) return std::nullopt;
    return it->second;
  };
  if (auto v = get("FORGE_REGISTRY")) layer.registry = *v;
  if (auto v = get("FORGE_DISTRO")) layer.distro = *v;
  if (auto v = get("FORGE_ENGINE")) layer.engine = *v;
  if (auto v = get("FORGE_PARALLELISM")) layer.parallelism = parse_long(*v, "FORGE_PARALLELISM");
  if (auto v = get("FORGE_STRICT")) layer.strict = parse_bool(*v, "FORGE_STRICT");
  return layer;
}

GlobalConfig resolve_config(const ConfigLayer& flags, const ConfigLayer& env, const ConfigLayer& file,
                            const fs::path& data_directory) {
  GlobalConfig cfg;
  cfg.registry = pick(flags.registry, env.registry, file.registry).value_or("");
  cfg.distro = depgraph::distro_from_string(pick(flags.distro, env.distro, file.distro).value_or("humble"));
  long parallelism = pick(flags.parallelism, env.parallelism, file.parallelism).value_or(2);
  if (parallelism < 1) {
    throw Error(ErrorCode::InvalidConfig, "parallelism must be at least 1, got " + std::to_string(parallelism));
  }
  cfg.parallelism = static_cast<std::size_t>(parallelism);
  cfg.strict = pick(flags.strict, env.strict, file.strict).value_or(false);
  cfg.engine = pick(flags.engine, env.engine, file.engine).value_or("docker");
  cfg.base_image = pick(flags.base_image, env.base_image, file.base_image);
  cfg.command = pick(flags.command, env.command, file.command);
  cfg.image_name = pick(flags.image_name, env.image_name, file.image_name);

  cfg.rosdep_paths = pick(flags.rosdep_paths, env.rosdep_paths, file.rosdep_paths)
                         .value_or(std::vector<fs::path>{data_directory / "rosdep" / "base.yaml"});
  cfg.distro_index_path = pick(flags.distro_index_path, env.distro_index_path, file.distro_index_path)
                              .value_or(data_directory / "distros" / (std::string(depgraph::to_string(cfg.distro)) + ".yaml"));
  return cfg;
}

void check_data_paths(const GlobalConfig& cfg) {
  for (const auto& p : cfg.rosdep_paths) {
    if (!fs::is_regular_file(p)) throw Error(ErrorCode::InvalidConfig, "rosdep database '" + p.string() + "' not found");
  }
  if (!fs::is_regular_file(cfg.distro_index_path)) {
    throw Error(ErrorCode::InvalidConfig, "distro index '" + cfg.distro_index_path.string() + "' not found");
  }
}

std::map<std::string, std::string> process_environment() {
  std::map<std::string, std::string> env;
  for (char** e = environ; e && *e; ++e) {
    std::string entry(*e);
    auto eq = entry.find('=');
    if (eq != std::string::npos) env.emplace(entry.substr(0, eq), entry.substr(eq + 1));
  }
  return env;
}

}  // namespace forge::config
