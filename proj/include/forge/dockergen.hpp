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
#include <variant>
#include <vector>

#include "forge/depgraph.hpp"
#include "forge/manifest.hpp"
#include "forge/platform.hpp"
#include "forge/sources.hpp"

namespace forge::dockergen {

enum class Target { dev, run };
enum class BuildTool { colcon, catkin };

std::string_view to_string(Target target);
Target target_from_string(std::string_view text);
std::string_view to_string(BuildTool tool);

/// colcon for ROS 2 distros, catkin for ROS 1.
BuildTool default_build_tool(depgraph::Distro distro);

struct ImageSpec {
  std::string base_image;
  depgraph::Distro ros_distro = depgraph::Distro::humble;
  std::optional<BuildTool> build_tool;
  Target target = Target::run;
  /// Default command of the run image. `{"bash"}` is an accepted sentinel.
  std::vector<std::string> launch_command;
  std::string workspace_dir = "/ws";
  /// Paths relative to the build context.
  std::optional<std::filesystem::path> custom_script_pre;
  std::optional<std::filesystem::path> custom_script_post;
  std::vector<std::string> extra_apt;
  std::vector<std::string> extra_pip;
  std::vector<std::filesystem::path> repos_files;
  std::vector<Platform> platforms{Platform::amd64};
  bool slim_runtime = false;
  bool strict = false;
  /// Run the deployment image as the non-root `ros` user.
  bool run_as_user = false;

  int ros_version() const { return depgraph::ros_version_of(ros_distro); }
  BuildTool effective_build_tool() const { return build_tool.value_or(default_build_tool(ros_distro)); }
};

enum class StageName { base, dependencies, dependencies_install, dev, build, run };

std::string_view to_string(StageName name);

struct CopyFromStage {
  StageName stage;
  std::string source;
  std::string destination;
  bool operator==(const CopyFromStage&) const = default;
};

struct CopyContext {
  std::string source;  // relative to the build context; "." is the whole context
  std::string destination;
  std::string chown;
  bool operator==(const CopyContext&) const = default;
};

enum class InstallKind { ros_core, os_packages, python_packages, script, clone, tooling };

std::string_view to_string(InstallKind kind);

/// What a shell step installs, kept next to the command for plan checks.
struct InstallSet {
  InstallKind kind;
  std::vector<std::string> items;
  bool operator==(const InstallSet&) const = default;
};

struct RunShell {
  std::string command;
  std::optional<InstallSet> installs;
  std::vector<std::string> secrets;  // build secrets exposed as env vars of the same name
  bool operator==(const RunShell&) const = default;
};

struct EnvSet {
  std::string key;
  std::string value;
  bool operator==(const EnvSet&) const = default;
};

struct Workdir {
  std::string path;
  bool operator==(const Workdir&) const = default;
};

struct UserSet {
  std::string user;
  bool operator==(const UserSet&) const = default;
};

struct Entrypoint {
  std::vector<std::string> argv;
  bool operator==(const Entrypoint&) const = default;
};

struct DefaultCommand {
  std::vector<std::string> argv;
  bool operator==(const DefaultCommand&) const = default;
};

struct BuildArg {
  std::string name;
  std::optional<std::string> default_value;
  bool operator==(const BuildArg&) const = default;
};

struct Label {
  std::string key;
  std::string value;
  bool operator==(const Label&) const = default;
};

using Instruction =
    std::variant<CopyFromStage, CopyContext, RunShell, EnvSet, Workdir, UserSet, Entrypoint, DefaultCommand, BuildArg,
                 Label>;

struct Stage {
  StageName name;
  /// A stage name for internal parents, otherwise an image reference.
  std::string parent;
  std::vector<Instruction> instructions;
  bool operator==(const Stage&) const = default;
};

struct DockerfilePlan {
  Target target = Target::run;
  std::string workspace_dir = "/ws";
  std::string source_root = ".";  // context path copied to <workspace_dir>/src
  std::vector<BuildArg> global_args;
  std::vector<Stage> stages;

  const Stage* find(StageName name) const;
  bool operator==(const DockerfilePlan&) const = default;
};

inline constexpr std::string_view kEntrypointPath = "/usr/local/bin/forge-entrypoint.sh";
inline constexpr std::string_view kDepsDir = "/forge/deps";

/// Builds the six-stage plan (four for dev targets). `resolved` is the
/// all-scope resolution and `resolved_exec` the exec-only one; the latter
/// only matters when `spec.slim_runtime` is set.
DockerfilePlan plan_stages(const ImageSpec& spec, const manifest::Workspace& ws,
                           const depgraph::ResolvedDependencies& resolved,
                           const depgraph::ResolvedDependencies& resolved_exec, const sources::ReposList& repos = {});

/// Dockerfile text. Equal plans render to equal bytes.
std::string render(const DockerfilePlan& plan);

/// Script installed as the image entrypoint: sources the distro and the
/// workspace environments, then execs its arguments.
std::string entrypoint_script(std::string_view workspace_dir);

struct Violation {
  StageName stage;
  std::string rule;
  std::string detail;
  bool operator==(const Violation&) const = default;
};

std::vector<Violation> validate_plan(const DockerfilePlan& plan);

/// Install atoms (`<kind>:<item>`) reachable from `leaf` through its parent
/// chain. Build tooling is excluded.
std::set<std::string> lineage_installs(const DockerfilePlan& plan, StageName leaf);

}  // namespace forge::dockergen
