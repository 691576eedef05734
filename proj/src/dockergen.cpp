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

#include "forge/dockergen.hpp"

#include <algorithm>
#include <array>
#include <iomanip>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "forge/error.hpp"
#include "forge/version.hpp"

namespace forge::dockergen {

namespace fs = std::filesystem;

std::string_view to_string(Target target) { return target == Target::dev ? "dev" : "run"; }

Target target_from_string(std::string_view text) {
  if (text == "dev") return Target::dev;
  if (text == "run") return Target::run;
  throw Error(ErrorCode::InvalidArgs, "unknown target '" + std::string(text) + "' (expected dev or run)");
}

std::string_view to_string(BuildTool tool) { return tool == BuildTool::colcon ? "colcon" : "catkin"; }

BuildTool default_build_tool(depgraph::Distro distro) {
  return depgraph::ros_version_of(distro) == 1 ? BuildTool::catkin : BuildTool::colcon;
}

std::string_view to_string(StageName name) {
  switch (name) {
    case StageName::base: return "base";
    case StageName::dependencies: return "dependencies";
    case StageName::dependencies_install: return "dependencies-install";
    case StageName::dev: return "dev";
    case StageName::build: return "build";
    case StageName::run: return "run";
  }
  return "unknown";
}

std::string_view to_string(InstallKind kind) {
  switch (kind) {
    case InstallKind::ros_core: return "ros-core";
    case InstallKind::os_packages: return "os";
    case InstallKind::python_packages: return "python";
    case InstallKind::script: return "script";
    case InstallKind::clone: return "clone";
    case InstallKind::tooling: return "tooling";
  }
  return "unknown";
}

const Stage* DockerfilePlan::find(StageName name) const {
  auto it = std::find_if(stages.begin(), stages.end(), [&](const Stage& s) { return s.name == name; });
  return it == stages.end() ? nullptr : &*it;
}

namespace {

constexpr std::string_view kUserUid = "1000";

std::string sh_quote(std::string_view text) {
  bool plain = !text.empty() && std::all_of(text.begin(), text.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || std::string_view("_./:@%+=,-").find(c) != std::string_view::npos;
  });
  if (plain) return std::string(text);
  std::string out = "'";
  for (char c : text) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::vector<std::string> sorted_unique(std::vector<std::string> items) {
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  return items;
}

std::vector<std::string> difference(const std::vector<std::string>& all, const std::vector<std::string>& some) {
  std::vector<std::string> out;
  std::set_difference(all.begin(), all.end(), some.begin(), some.end(), std::back_inserter(out));
  return out;
}

std::string apt_install_from(std::string_view list_file) {
  return "apt-get update && DEBIAN_FRONTEND=noninteractive xargs -a " + std::string(list_file) +
         " apt-get install -y --no-install-recommends && rm -rf /var/lib/apt/lists/*";
}

std::string apt_install(const std::vector<std::string>& packages) {
  return "apt-get update && DEBIAN_FRONTEND=noninteractive apt-get install -y --no-install-recommends " +
         join(packages, " ") + " && rm -rf /var/lib/apt/lists/*";
}

std::string pip_install_from(std::string_view list_file) {
  return "(python3 -m pip --version >/dev/null 2>&1 || (" + apt_install({"python3-pip"}) +
         ")) && PIP_BREAK_SYSTEM_PACKAGES=1 python3 -m pip install --no-cache-dir -r " + std::string(list_file);
}

std::string write_lines(const std::vector<std::string>& lines, std::string_view path) {
  if (lines.empty()) return ": > " + std::string(path);
  std::string cmd = "printf '%s\\n'";
  for (const auto& line : lines) cmd += " " + sh_quote(line);
  return cmd + " > " + std::string(path);
}

std::string ros_core_guard(int ros_version) {
  std::string repo = ros_version == 1 ? "ros" : "ros2";
  return "if [ ! -d \"/opt/ros/${ROS_DISTRO}\" ]; then " +
         apt_install({"ca-certificates", "curl", "gnupg", "lsb-release"}) +
         " && curl -fsSL https://raw.githubusercontent.com/ros/rosdistro/master/ros.key"
         " -o /usr/share/keyrings/ros-archive-keyring.gpg"
         " && echo \"deb [arch=$(dpkg --print-architecture) signed-by=/usr/share/keyrings/ros-archive-keyring.gpg]"
         " http://packages.ros.org/" +
         repo + "/ubuntu $(lsb_release -cs) main\" > /etc/apt/sources.list.d/" + repo + ".list && " +
         apt_install({"ros-${ROS_DISTRO}-ros-core"}) + "; fi";
}

std::string create_user_command(std::string_view workspace_dir) {
  std::string uid(kUserUid);
  return "if ! id -u ros >/dev/null 2>&1; then existing=\"$(getent passwd " + uid +
         " | cut -d: -f1)\"; if [ -n \"$existing\" ]; then userdel -r \"$existing\" 2>/dev/null || userdel "
         "\"$existing\"; fi; useradd --create-home --uid " +
         uid + " --shell /bin/bash ros; fi && mkdir -p " + std::string(workspace_dir) + " && chown " + uid + ":" +
         uid + " " + std::string(workspace_dir);
}

std::string build_command(BuildTool tool, std::string_view ws) {
  std::string install = std::string(ws) + "/install";
  if (tool == BuildTool::colcon) {
    return ". \"/opt/ros/${ROS_DISTRO}/setup.sh\" && colcon build --base-paths " + std::string(ws) +
           "/src --build-base " + std::string(ws) + "/build --install-base " + install +
           " --cmake-args -DCMAKE_BUILD_TYPE=Release";
  }
  return ". \"/opt/ros/${ROS_DISTRO}/setup.sh\" && catkin_make_isolated --install --source " + std::string(ws) +
         "/src --build " + std::string(ws) + "/build --devel " + std::string(ws) + "/devel --install-space " + install +
         " -DCMAKE_BUILD_TYPE=Release";
}

std::string clone_command(const sources::RepoSpec& repo, std::string_view ws) {
  std::string dest = std::string(ws) + "/src/" + repo.local_name;
  std::string cmd = "git clone --quiet \"" + repo.url + "\" " + sh_quote(dest);
  if (!repo.version.empty()) cmd += " && git -C " + sh_quote(dest) + " checkout --quiet " + sh_quote(repo.version);
  cmd += " && git -C " + sh_quote(dest) + " submodule update --quiet --init --recursive";
  return cmd;
}

// `src` for a conventional workspace, otherwise the whole context.
std::string source_root_of(const manifest::Workspace& ws) {
  if (!fs::is_directory(ws.root / "src")) return ".";
  for (const auto& pkg : ws.packages) {
    auto rel = pkg.source_dir.lexically_normal().lexically_relative("src");
    if (rel.empty() || *rel.begin() == "..") return ".";
  }
  return "src";
}

void validate_spec(const ImageSpec& spec, const manifest::Workspace& ws) {
  if (spec.base_image.empty()) throw Error(ErrorCode::InvalidSpec, "base image must not be empty");
  if (spec.platforms.empty()) throw Error(ErrorCode::InvalidSpec, "at least one platform is required");
  if (spec.target == Target::run && spec.launch_command.empty()) {
    throw Error(ErrorCode::InvalidSpec, "a run image needs a launch command (use \"bash\" for an interactive shell)");
  }
  if (spec.workspace_dir.empty() || spec.workspace_dir.front() != '/' || spec.workspace_dir == "/") {
    throw Error(ErrorCode::InvalidSpec, "workspace directory must be an absolute path below /");
  }
  if (spec.effective_build_tool() == BuildTool::catkin && spec.ros_version() == 2) {
    throw Error(ErrorCode::InvalidSpec, "catkin is not available for ROS 2 distros");
  }
  for (const auto* script : {&spec.custom_script_pre, &spec.custom_script_post}) {
    if (!*script) continue;
    if ((*script)->is_absolute() || !fs::is_regular_file(ws.root / **script)) {
      throw Error(ErrorCode::InvalidSpec, "custom script '" + (*script)->string() + "' is not a file in the build context");
    }
  }
}

// Adds the script copy and its execution.
void add_script(Stage& stage, const fs::path& script) {
  std::string dest = "/forge/scripts/" + script.filename().string();
  stage.instructions.push_back(CopyContext{script.generic_string(), dest, {}});
  stage.instructions.push_back(RunShell{"bash " + sh_quote(dest), InstallSet{InstallKind::script, {script.generic_string()}}, {}});
}

}  // namespace

std::string entrypoint_script(std::string_view workspace_dir) {
  std::string ws(workspace_dir);
  return "#!/bin/bash\n"
         "set -e\n"
         "source \"/opt/ros/${ROS_DISTRO}/setup.bash\"\n"
         "if [ -f \"" + ws + "/install/setup.bash\" ]; then source \"" + ws + "/install/setup.bash\"; fi\n"
         "exec \"$@\"\n";
}

DockerfilePlan plan_stages(const ImageSpec& spec, const manifest::Workspace& ws,
                           const depgraph::ResolvedDependencies& resolved,
                           const depgraph::ResolvedDependencies& resolved_exec, const sources::ReposList& repos) {
  validate_spec(spec, ws);
  if (spec.strict && !resolved.unresolved.empty()) {
    throw Error(ErrorCode::UnresolvedDependencies, "unresolved dependency keys: " + join(resolved.unresolved, ", "));
  }

  const std::string& wsdir = spec.workspace_dir;
  const std::string distro(depgraph::to_string(spec.ros_distro));
  const std::string deps(kDepsDir);

  auto os_list = [&](const depgraph::ResolvedDependencies& r) {
    std::vector<std::string> all = r.ros_distro_pkgs;
    all.insert(all.end(), r.system_pkgs.begin(), r.system_pkgs.end());
    all.insert(all.end(), spec.extra_apt.begin(), spec.extra_apt.end());
    return sorted_unique(std::move(all));
  };
  auto py_list = [&](const depgraph::ResolvedDependencies& r) {
    std::vector<std::string> all = r.python_pkgs;
    all.insert(all.end(), spec.extra_pip.begin(), spec.extra_pip.end());
    return sorted_unique(std::move(all));
  };

  const auto& runtime = spec.slim_runtime ? resolved_exec : resolved;
  const std::vector<std::string> os_runtime = os_list(runtime);
  const std::vector<std::string> py_runtime = py_list(runtime);
  const std::vector<std::string> os_dev_extra = spec.slim_runtime ? difference(os_list(resolved), os_runtime)
                                                                  : std::vector<std::string>{};
  const std::vector<std::string> py_dev_extra = spec.slim_runtime ? difference(py_list(resolved), py_runtime)
                                                                  : std::vector<std::string>{};

  DockerfilePlan plan;
  plan.target = spec.target;
  plan.workspace_dir = wsdir;
  plan.source_root = source_root_of(ws);
  plan.global_args.push_back(BuildArg{"BASE_IMAGE", spec.base_image});

  Stage base{StageName::base, "${BASE_IMAGE}", {}};
  base.instructions.push_back(BuildArg{"ROS_DISTRO", distro});
  base.instructions.push_back(EnvSet{"ROS_DISTRO", "${ROS_DISTRO}"});
  base.instructions.push_back(RunShell{ros_core_guard(spec.ros_version()),
                                       InstallSet{InstallKind::ros_core, {"ros-" + distro + "-ros-core"}}, {}});
  {
    std::vector<std::string> lines;
    std::istringstream script(entrypoint_script(wsdir));
    for (std::string line; std::getline(script, line);) lines.push_back(line);
    base.instructions.push_back(
        RunShell{write_lines(lines, kEntrypointPath) + " && chmod 0755 " + std::string(kEntrypointPath), {}, {}});
  }
  plan.stages.push_back(std::move(base));

  Stage dependencies{StageName::dependencies, "base", {}};
  dependencies.instructions.push_back(Workdir{wsdir});
  for (const auto& pkg : ws.packages) {
    fs::path manifest_path = (pkg.source_dir / "package.xml").lexically_normal();
    fs::path in_src = manifest_path.lexically_relative(plan.source_root);
    dependencies.instructions.push_back(
        CopyContext{manifest_path.generic_string(), wsdir + "/src/" + in_src.generic_string(), {}});
  }
  for (const auto& repos_file : spec.repos_files) {
    dependencies.instructions.push_back(
        CopyContext{repos_file.generic_string(), wsdir + "/" + repos_file.generic_string(), {}});
  }
  {
    std::string cmd = "mkdir -p " + deps + " && " + write_lines(os_runtime, deps + "/os-packages.txt") + " && " +
                      write_lines(py_runtime, deps + "/python-packages.txt");
    if (spec.slim_runtime) {
      cmd += " && " + write_lines(os_dev_extra, deps + "/os-packages-dev.txt") + " && " +
             write_lines(py_dev_extra, deps + "/python-packages-dev.txt");
    }
    std::vector<std::string> repos_lines;
    std::istringstream repos_text(sources::render_repos(repos));
    for (std::string line; std::getline(repos_text, line);) repos_lines.push_back(line);
    cmd += " && " + write_lines(repos_lines, deps + "/repos.txt");
    dependencies.instructions.push_back(RunShell{cmd, {}, {}});
  }
  plan.stages.push_back(std::move(dependencies));

  Stage install{StageName::dependencies_install, "base", {}};
  install.instructions.push_back(CopyFromStage{StageName::dependencies, deps, deps});
  if (!os_runtime.empty()) {
    install.instructions.push_back(
        RunShell{apt_install_from(deps + "/os-packages.txt"), InstallSet{InstallKind::os_packages, os_runtime}, {}});
  }
  if (!py_runtime.empty()) {
    install.instructions.push_back(RunShell{pip_install_from(deps + "/python-packages.txt"),
                                            InstallSet{InstallKind::python_packages, py_runtime}, {}});
  }
  if (spec.custom_script_pre) add_script(install, *spec.custom_script_pre);
  if (!repos.empty()) {
    install.instructions.push_back(RunShell{"command -v git >/dev/null 2>&1 || (" +
                                                apt_install({"ca-certificates", "git"}) + ")",
                                            InstallSet{InstallKind::tooling, {"ca-certificates", "git"}}, {}});
    for (const auto& repo : repos) {
      install.instructions.push_back(RunShell{clone_command(repo, wsdir),
                                              InstallSet{InstallKind::clone, {repo.local_name}},
                                              sources::placeholders(repo.url)});
    }
  }
  if (spec.custom_script_post) add_script(install, *spec.custom_script_post);
  plan.stages.push_back(std::move(install));

  std::vector<Label> labels;
  for (const auto& pkg : ws.packages) labels.push_back(Label{"forge.package." + pkg.name, pkg.version});

  Stage dev{StageName::dev, "dependencies-install", {}};
  {
    std::vector<std::string> tooling = spec.effective_build_tool() == BuildTool::colcon
                                           ? std::vector<std::string>{"build-essential", "python3-colcon-common-extensions"}
                                           : std::vector<std::string>{"build-essential"};
    dev.instructions.push_back(RunShell{apt_install(tooling), InstallSet{InstallKind::tooling, tooling}, {}});
  }
  if (!os_dev_extra.empty()) {
    dev.instructions.push_back(RunShell{apt_install_from(deps + "/os-packages-dev.txt"),
                                        InstallSet{InstallKind::os_packages, os_dev_extra}, {}});
  }
  if (!py_dev_extra.empty()) {
    dev.instructions.push_back(RunShell{pip_install_from(deps + "/python-packages-dev.txt"),
                                        InstallSet{InstallKind::python_packages, py_dev_extra}, {}});
  }
  dev.instructions.push_back(RunShell{create_user_command(wsdir), {}, {}});
  dev.instructions.push_back(
      CopyContext{plan.source_root, wsdir + "/src", std::string(kUserUid) + ":" + std::string(kUserUid)});
  dev.instructions.push_back(UserSet{"ros"});
  dev.instructions.push_back(Workdir{wsdir});
  for (const auto& label : labels) dev.instructions.push_back(label);
  dev.instructions.push_back(Entrypoint{{std::string(kEntrypointPath)}});
  dev.instructions.push_back(DefaultCommand{{"bash"}});
  plan.stages.push_back(std::move(dev));

  if (spec.target == Target::dev) return plan;

  Stage build{StageName::build, "dev", {}};
  build.instructions.push_back(Workdir{wsdir});
  build.instructions.push_back(RunShell{build_command(spec.effective_build_tool(), wsdir), {}, {}});
  plan.stages.push_back(std::move(build));

  Stage run{StageName::run, "dependencies-install", {}};
  run.instructions.push_back(CopyFromStage{StageName::build, wsdir + "/install", wsdir + "/install"});
  if (spec.run_as_user) {
    run.instructions.push_back(RunShell{create_user_command(wsdir), {}, {}});
    run.instructions.push_back(UserSet{"ros"});
  }
  run.instructions.push_back(Workdir{wsdir});
  run.instructions.push_back(BuildArg{"TARGET", "run"});
  run.instructions.push_back(BuildArg{"COMMAND", join(spec.launch_command, " ")});
  run.instructions.push_back(Label{"forge.target", "${TARGET}"});
  run.instructions.push_back(Label{"forge.command", "${COMMAND}"});
  for (const auto& label : labels) run.instructions.push_back(label);
  run.instructions.push_back(Entrypoint{{std::string(kEntrypointPath)}});
  run.instructions.push_back(DefaultCommand{spec.launch_command});
  plan.stages.push_back(std::move(run));
  return plan;
}

namespace {

std::string json_string(const std::string& text) { return nlohmann::json(text).dump(); }

std::string json_array(const std::vector<std::string>& items) { return nlohmann::json(items).dump(); }

std::string copy_paths(const std::string& source, const std::string& destination) {
  if (source.find_first_of(" \t\"") == std::string::npos && destination.find_first_of(" \t\"") == std::string::npos) {
    return source + " " + destination;
  }
  return json_array({source, destination});
}

struct InstructionRenderer {
  std::string operator()(const CopyFromStage& i) const {
    return "COPY --from=" + std::string(to_string(i.stage)) + " " + copy_paths(i.source, i.destination);
  }
  std::string operator()(const CopyContext& i) const {
    std::string chown = i.chown.empty() ? "" : "--chown=" + i.chown + " ";
    return "COPY " + chown + copy_paths(i.source, i.destination);
  }
  std::string operator()(const RunShell& i) const {
    std::string mounts;
    for (const auto& secret : i.secrets) mounts += "--mount=type=secret,id=" + secret + ",env=" + secret + " ";
    return "RUN " + mounts + i.command;
  }
  std::string operator()(const EnvSet& i) const { return "ENV " + i.key + "=" + json_string(i.value); }
  std::string operator()(const Workdir& i) const { return "WORKDIR " + i.path; }
  std::string operator()(const UserSet& i) const { return "USER " + i.user; }
  std::string operator()(const Entrypoint& i) const { return "ENTRYPOINT " + json_array(i.argv); }
  std::string operator()(const DefaultCommand& i) const { return "CMD " + json_array(i.argv); }
  std::string operator()(const BuildArg& i) const {
    return "ARG " + i.name + (i.default_value ? "=" + json_string(*i.default_value) : "");
  }
  std::string operator()(const Label& i) const { return "LABEL " + i.key + "=" + json_string(i.value); }
};

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::Internal, "SHA-256 computation failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

}  // namespace

std::string render(const DockerfilePlan& plan) {
  std::string body;
  for (const auto& arg : plan.global_args) body += InstructionRenderer{}(arg) + "\n";
  for (const auto& stage : plan.stages) {
    body += "\n";
    body += "FROM " + stage.parent + " AS " + std::string(to_string(stage.name)) + "\n";
    for (const auto& instruction : stage.instructions) body += std::visit(InstructionRenderer{}, instruction) + "\n";
  }
  return "# syntax=docker/dockerfile:1\n"
         "# Generated by forge " + std::string(kVersion) + ". Do not edit.\n"
         "# plan-sha256: " + sha256_hex(body) + "\n" + body;
}

std::set<std::string> lineage_installs(const DockerfilePlan& plan, StageName leaf) {
  std::set<std::string> atoms;
  std::set<StageName> visited;
  const Stage* stage = plan.find(leaf);
  while (stage && visited.insert(stage->name).second) {
    for (const auto& instruction : stage->instructions) {
      const auto* run = std::get_if<RunShell>(&instruction);
      if (!run || !run->installs || run->installs->kind == InstallKind::tooling) continue;
      for (const auto& item : run->installs->items) {
        atoms.insert(std::string(to_string(run->installs->kind)) + ":" + item);
      }
    }
    const Stage* parent = nullptr;
    for (const auto& candidate : plan.stages) {
      if (to_string(candidate.name) == stage->parent) parent = &candidate;
    }
    stage = parent;
  }
  return atoms;
}

std::vector<Violation> validate_plan(const DockerfilePlan& plan) {
  std::vector<Violation> violations;

  std::vector<StageName> expected{StageName::base, StageName::dependencies, StageName::dependencies_install,
                                  StageName::dev};
  if (plan.target == Target::run) {
    expected.push_back(StageName::build);
    expected.push_back(StageName::run);
  }
  std::vector<StageName> actual;
  for (const auto& s : plan.stages) actual.push_back(s.name);
  if (actual != expected) {
    std::string names;
    for (auto n : actual) names += std::string(names.empty() ? "" : ",") + std::string(to_string(n));
    violations.push_back({actual.empty() ? StageName::base : actual.back(), "stage-order",
                          "unexpected stage sequence [" + names + "] for target " + std::string(to_string(plan.target))});
  }

  static const std::map<StageName, std::string> parents{
      {StageName::dependencies, "base"}, {StageName::dependencies_install, "base"},
      {StageName::dev, "dependencies-install"}, {StageName::build, "dev"}, {StageName::run, "dependencies-install"}};
  for (const auto& stage : plan.stages) {
    if (stage.name == StageName::base) {
      bool internal = std::any_of(plan.stages.begin(), plan.stages.end(),
                                  [&](const Stage& s) { return to_string(s.name) == stage.parent; });
      if (internal || stage.parent.empty()) {
        violations.push_back({stage.name, "parentage", "base must derive from an external image, not '" + stage.parent + "'"});
      }
    } else if (stage.parent != parents.at(stage.name)) {
      violations.push_back({stage.name, "parentage",
                            "expected parent '" + parents.at(stage.name) + "', found '" + stage.parent + "'"});
    }
  }

  if (const Stage* deps = plan.find(StageName::dependencies)) {
    for (const auto& instruction : deps->instructions) {
      const auto* copy = std::get_if<CopyContext>(&instruction);
      if (!copy) continue;
      fs::path source(copy->source);
      if (source.filename() != "package.xml" && source.extension() != ".repos") {
        violations.push_back({deps->name, "dependencies-copy",
                              "only manifests and .repos files may enter the dependencies stage, found '" +
                                  copy->source + "'"});
      }
    }
  }

  if (const Stage* install = plan.find(StageName::dependencies_install)) {
    bool has_artifacts = false;
    for (const auto& instruction : install->instructions) {
      if (const auto* copy = std::get_if<CopyFromStage>(&instruction)) {
        if (copy->stage == StageName::dependencies) {
          has_artifacts = true;
        } else {
          violations.push_back({install->name, "dependency-artifacts",
                                "copies from '" + std::string(to_string(copy->stage)) + "'"});
        }
      }
      if (const auto* copy = std::get_if<CopyContext>(&instruction); copy && (copy->source == "." || copy->source == plan.source_root)) {
        violations.push_back({install->name, "source-in-dependencies", "copies the whole build context"});
      }
    }
    if (!has_artifacts) {
      violations.push_back({install->name, "dependency-artifacts", "does not copy the dependency lists"});
    }
  }

  if (const Stage* run = plan.find(StageName::run)) {
    std::size_t cross_copies = 0;
    bool install_copy = false;
    for (const auto& instruction : run->instructions) {
      if (const auto* copy = std::get_if<CopyContext>(&instruction)) {
        violations.push_back({run->name, "source-in-run", "copies '" + copy->source + "' from the build context"});
      }
      if (const auto* copy = std::get_if<CopyFromStage>(&instruction)) {
        ++cross_copies;
        install_copy = install_copy ||
                       (copy->stage == StageName::build && copy->source == plan.workspace_dir + "/install");
      }
    }
    if (cross_copies != 1 || !install_copy) {
      violations.push_back({run->name, "run-copy",
                            "expected exactly one cross-stage copy of " + plan.workspace_dir + "/install from build, found " +
                                std::to_string(cross_copies) + " cross-stage copies"});
    }

    if (plan.find(StageName::dev)) {
      auto dev_atoms = lineage_installs(plan, StageName::dev);
      auto run_atoms = lineage_installs(plan, StageName::run);
      std::vector<std::string> missing;
      std::set_difference(run_atoms.begin(), run_atoms.end(), dev_atoms.begin(), dev_atoms.end(),
                          std::back_inserter(missing));
      if (!missing.empty()) {
        violations.push_back({StageName::dev, "install-superset",
                              "run installs missing from dev: " + join(missing, ", ")});
      }
    }
  }
  return violations;
}

}  // namespace forge::dockergen
