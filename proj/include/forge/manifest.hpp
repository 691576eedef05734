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
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace forge::manifest {

enum class BuildType { catkin, ament_cmake, ament_python, cmake };

std::string_view to_string(BuildType type);
std::optional<BuildType> build_type_from_string(std::string_view text);

/// Variables visible to `condition` attributes on dependency elements.
/// Conditions that reference a variable without a value evaluate to false.
struct ConditionEnv {
  std::optional<int> ros_version;
  std::optional<std::string> ros_distro;
};

struct PackageManifest {
  std::string name;
  std::string version;
  int manifest_format = 1;
  BuildType build_type = BuildType::ament_cmake;
  std::set<std::string> deps_build;
  std::set<std::string> deps_exec;
  std::set<std::string> deps_test;
  std::filesystem::path source_dir;

  bool operator==(const PackageManifest&) const = default;
};

struct Workspace {
  std::filesystem::path root;
  std::vector<PackageManifest> packages;  // sorted by name
  std::vector<std::filesystem::path> ignored_dirs;
};

/// Parses the text of a `package.xml`.
///
/// `depend` expands to build and exec; `build_export_depend` and
/// `buildtool_depend` count as build; `exec_depend` and `run_depend` as exec.
/// Elements whose `condition` evaluates false under `env` are dropped.
/// Unknown elements are ignored.
PackageManifest parse_manifest(std::string_view xml_text, const ConditionEnv& env = {});

/// Evaluates a manifest condition expression such as
/// `$ROS_VERSION == 2 and $ROS_DISTRO != foxy`.
bool evaluate_condition(std::string_view expression, const ConditionEnv& env);

/// Finds every directory under `root` holding a `package.xml`, skipping
/// subtrees marked with COLCON_IGNORE or CATKIN_IGNORE.
Workspace scan_workspace(const std::filesystem::path& root, const ConditionEnv& env = {});

std::set<std::string> internal_package_names(const Workspace& ws);

bool is_valid_package_name(std::string_view name);

}  // namespace forge::manifest
