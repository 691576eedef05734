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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "forge/dockergen.hpp"
#include "forge/error.hpp"
#include "test_support.hpp"

using namespace forge;
using namespace forge::dockergen;
using forge::testing::resolve_workspace;
using forge::testing::workspace_fixture;

namespace {

ImageSpec run_spec(depgraph::Distro distro = depgraph::Distro::humble) {
  ImageSpec spec;
  spec.base_image = "ros:" + std::string(depgraph::to_string(distro)) + "-ros-core";
  spec.ros_distro = distro;
  spec.target = Target::run;
  spec.launch_command = {"ros2", "run", "a", "node"};
  return spec;
}

DockerfilePlan plan_for(const std::string& fixture, ImageSpec spec) {
  auto r = resolve_workspace(workspace_fixture(fixture), spec.ros_distro);
  spec.repos_files = r.repos_files;
  return plan_stages(spec, r.ws, r.all, r.exec, r.repos);
}

std::vector<std::string> stage_names(const DockerfilePlan& plan) {
  std::vector<std::string> names;
  for (const auto& s : plan.stages) names.emplace_back(to_string(s.name));
  return names;
}

std::vector<InstallKind> install_kinds(const Stage& stage) {
  std::vector<InstallKind> kinds;
  for (const auto& i : stage.instructions) {
    if (const auto* run = std::get_if<RunShell>(&i); run && run->installs) kinds.push_back(run->installs->kind);
  }
  return kinds;
}

// Body of one stage in rendered text, from its FROM line to the next.
std::string stage_text(const std::string& text, std::string_view stage) {
  auto start = text.find(" AS " + std::string(stage) + "\n");
  if (start == std::string::npos) return {};
  start = text.rfind("FROM ", start);
  auto end = text.find("\nFROM ", start + 1);
  return text.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

}  // namespace

TEST(PlanStages, StageOrderAndParentage) {
  auto plan = plan_for("minimal", run_spec());
  EXPECT_EQ(stage_names(plan),
            (std::vector<std::string>{"base", "dependencies", "dependencies-install", "dev", "build", "run"}));
  EXPECT_EQ(plan.stages[0].parent, "${BASE_IMAGE}");
  EXPECT_EQ(plan.stages[1].parent, "base");
  EXPECT_EQ(plan.stages[2].parent, "base");
  EXPECT_EQ(plan.stages[3].parent, "dependencies-install");
  EXPECT_EQ(plan.stages[4].parent, "dev");
  EXPECT_EQ(plan.stages[5].parent, "dependencies-install");
  EXPECT_TRUE(validate_plan(plan).empty());
}

TEST(PlanStages, ZeroDependencyFixtureInstallsOnlyRosCore) {
  auto plan = plan_for("minimal", run_spec());
  EXPECT_TRUE(install_kinds(*plan.find(StageName::dependencies_install)).empty());
  EXPECT_EQ(lineage_installs(plan, StageName::run), std::set<std::string>{"ros-core:ros-humble-ros-core"});
}

TEST(PlanStages, DevTargetStopsAtDev) {
  auto spec = run_spec();
  spec.target = Target::dev;
  spec.launch_command.clear();
  auto plan = plan_for("minimal", spec);
  EXPECT_EQ(plan.stages.back().name, StageName::dev);
  EXPECT_EQ(plan.find(StageName::build), nullptr);
  EXPECT_EQ(plan.find(StageName::run), nullptr);
  EXPECT_TRUE(validate_plan(plan).empty());
}

TEST(PlanStages, SlimRuntimeOmitsBuildOnlyDeps) {
  auto spec = run_spec();
  spec.slim_runtime = true;
  auto r = resolve_workspace(workspace_fixture("multi_private"), spec.ros_distro);
  spec.repos_files = r.repos_files;
  auto plan = plan_stages(spec, r.ws, r.all, r.exec, r.repos);
  auto run_atoms = lineage_installs(plan, StageName::run);
  auto dev_atoms = lineage_installs(plan, StageName::dev);
  // eigen is build-only in the fixture; the exec-scope resolution decides what the runtime needs.
  ASSERT_FALSE(std::count(r.exec.system_pkgs.begin(), r.exec.system_pkgs.end(), "libeigen3-dev"));
  EXPECT_FALSE(run_atoms.contains("os:libeigen3-dev"));
  EXPECT_TRUE(dev_atoms.contains("os:libeigen3-dev"));
  for (const auto& p : r.exec.system_pkgs) EXPECT_TRUE(run_atoms.contains("os:" + p)) << p;
  for (const auto& p : r.exec.ros_distro_pkgs) EXPECT_TRUE(run_atoms.contains("os:" + p)) << p;
  EXPECT_TRUE(std::includes(dev_atoms.begin(), dev_atoms.end(), run_atoms.begin(), run_atoms.end()));
  EXPECT_TRUE(validate_plan(plan).empty());
}

TEST(PlanStages, InstallOrderInDependenciesInstall) {
  auto spec = run_spec();
  spec.extra_pip = {"numpy"};
  forge::testing::TempDir dir;
  std::filesystem::copy(workspace_fixture("multi_private"), dir.path(), std::filesystem::copy_options::recursive);
  dir.write("scripts/pre.sh", "#!/bin/sh\necho pre\n");
  dir.write("scripts/post.sh", "#!/bin/sh\necho post\n");
  spec.custom_script_pre = "scripts/pre.sh";
  spec.custom_script_post = "scripts/post.sh";
  auto r = resolve_workspace(dir.path(), spec.ros_distro);
  auto plan = plan_stages(spec, r.ws, r.all, r.exec, r.repos);
  EXPECT_EQ(install_kinds(*plan.find(StageName::dependencies_install)),
            (std::vector<InstallKind>{InstallKind::os_packages, InstallKind::python_packages, InstallKind::script,
                                      InstallKind::tooling, InstallKind::clone, InstallKind::script}));
  std::string text = render(plan);
  std::string install = stage_text(text, "dependencies-install");
  auto copy_pre = install.find("COPY scripts/pre.sh");
  auto run_pre = install.find("pre.sh", copy_pre + 20);
  auto clone = install.find("git clone");
  ASSERT_NE(copy_pre, std::string::npos);
  EXPECT_LT(copy_pre, run_pre);
  EXPECT_LT(run_pre, clone);
  EXPECT_LT(clone, install.find("COPY scripts/post.sh"));
}

TEST(PlanStages, PrivateCloneUsesSecretMount) {
  auto text = render(plan_for("multi_private", run_spec()));
  EXPECT_NE(text.find("RUN --mount=type=secret,id=GIT_TOKEN,env=GIT_TOKEN git clone"), std::string::npos);
  EXPECT_NE(text.find("/ws/src/vendor/vision-utils"), std::string::npos);
}

TEST(PlanStages, CatkinFixture) {
  auto spec = run_spec(depgraph::Distro::noetic);
  spec.launch_command = {"roslaunch", "legacy_driver", "driver.launch"};
  auto plan = plan_for("catkin_noetic", spec);
  EXPECT_TRUE(validate_plan(plan).empty());
  auto text = render(plan);
  EXPECT_NE(text.find("catkin_make_isolated --install"), std::string::npos);
  EXPECT_NE(text.find("packages.ros.org/ros/ubuntu"), std::string::npos);
}

TEST(PlanStages, SpecErrors) {
  auto r = resolve_workspace(workspace_fixture("minimal"), depgraph::Distro::humble);
  auto expect_code = [&](ImageSpec spec, ErrorCode code) {
    try {
      plan_stages(spec, r.ws, r.all, r.exec);
      ADD_FAILURE() << "expected " << to_string(code);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), code);
    }
  };
  auto spec = run_spec();
  spec.base_image.clear();
  expect_code(spec, ErrorCode::InvalidSpec);
  spec = run_spec();
  spec.launch_command.clear();
  expect_code(spec, ErrorCode::InvalidSpec);
  spec = run_spec();
  spec.platforms.clear();
  expect_code(spec, ErrorCode::InvalidSpec);
  spec = run_spec();
  spec.workspace_dir = "relative";
  expect_code(spec, ErrorCode::InvalidSpec);
  spec = run_spec();
  spec.build_tool = BuildTool::catkin;
  expect_code(spec, ErrorCode::InvalidSpec);
  spec = run_spec();
  spec.custom_script_pre = "missing.sh";
  expect_code(spec, ErrorCode::InvalidSpec);
}

TEST(PlanStages, StrictRejectsUnresolved) {
  auto spec = run_spec();
  spec.strict = true;
  try {
    plan_for("unresolved", spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnresolvedDependencies);
    EXPECT_NE(std::string(e.what()).find("no_such_thing"), std::string::npos);
  }
  spec.strict = false;
  EXPECT_NO_THROW(plan_for("unresolved", spec));
}

TEST(Render, HeaderGuardAndEntrypoint) {
  auto plan = plan_for("minimal", run_spec());
  auto text = render(plan);
  EXPECT_EQ(text.rfind("# syntax=docker/dockerfile:1\n# Generated by forge ", 0), 0u);
  EXPECT_NE(text.find("# plan-sha256: "), std::string::npos);
  std::string base = stage_text(text, "base");
  EXPECT_NE(base.find("if [ ! -d \"/opt/ros/${ROS_DISTRO}\" ]"), std::string::npos);
  std::string run = stage_text(text, "run");
  EXPECT_NE(run.find("ENTRYPOINT [\"/usr/local/bin/forge-entrypoint.sh\"]"), std::string::npos);
  EXPECT_NE(run.find("CMD [\"ros2\",\"run\",\"a\",\"node\"]"), std::string::npos);
  EXPECT_EQ(render(plan), text);
}

TEST(Render, RunStageHasOneCrossStageCopy) {
  auto text = render(plan_for("multi_private", run_spec()));
  std::string run = stage_text(text, "run");
  std::size_t copies = 0;
  for (auto pos = run.find("COPY "); pos != std::string::npos; pos = run.find("COPY ", pos + 1)) ++copies;
  EXPECT_EQ(copies, 1u);
  EXPECT_NE(run.find("COPY --from=build /ws/install /ws/install"), std::string::npos);
}

TEST(Render, HashChangesWithPlan) {
  auto a = render(plan_for("minimal", run_spec()));
  auto spec = run_spec();
  spec.launch_command = {"bash"};
  auto b = render(plan_for("minimal", spec));
  EXPECT_NE(a.substr(0, a.find("\nARG")), b.substr(0, b.find("\nARG")));
}

TEST(EntrypointScript, SourcesBothSetups) {
  auto script = entrypoint_script("/ws");
  EXPECT_NE(script.find("/opt/ros/${ROS_DISTRO}/setup.bash"), std::string::npos);
  EXPECT_NE(script.find("/ws/install/setup.bash"), std::string::npos);
  EXPECT_NE(script.find("exec \"$@\""), std::string::npos);
}

TEST(ValidatePlan, SourceInRun) {
  auto plan = plan_for("minimal", run_spec());
  auto& run = plan.stages.back();
  run.instructions.insert(run.instructions.begin() + 1, CopyContext{"src", "/ws/src", {}});
  auto v = validate_plan(plan);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, "source-in-run");
  EXPECT_EQ(v[0].stage, StageName::run);
}

TEST(ValidatePlan, RunParentedOnBuild) {
  auto plan = plan_for("minimal", run_spec());
  plan.stages.back().parent = "build";
  auto v = validate_plan(plan);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, "parentage");
}

TEST(ValidatePlan, SourceCopiedIntoDependencies) {
  auto plan = plan_for("minimal", run_spec());
  auto& deps = plan.stages[1];
  deps.instructions.push_back(CopyContext{".", "/ws/src", {}});
  auto v = validate_plan(plan);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, "dependencies-copy");
}

TEST(ValidatePlan, MissingDevInstall) {
  auto plan = plan_for("multi_private", run_spec());
  auto& run = plan.stages.back();
  run.instructions.push_back(RunShell{"apt-get install -y extra", InstallSet{InstallKind::os_packages, {"extra"}}, {}});
  auto v = validate_plan(plan);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, "install-superset");
}

TEST(DockergenProperty, NoSourceLeakAcrossSpecs) {
  std::mt19937 rng(17);
  const std::vector<std::pair<std::string, depgraph::Distro>> fixtures = {
      {"minimal", depgraph::Distro::humble},
      {"multi_private", depgraph::Distro::humble},
      {"catkin_noetic", depgraph::Distro::noetic},
      {"unresolved", depgraph::Distro::rolling}};
  for (int trial = 0; trial < 40; ++trial) {
    const auto& [fixture, distro] = fixtures[rng() % fixtures.size()];
    auto spec = run_spec(distro);
    spec.slim_runtime = rng() % 2;
    spec.run_as_user = rng() % 2;
    if (rng() % 2) spec.extra_apt = {"htop"};
    if (rng() % 2) spec.platforms = {Platform::amd64, Platform::arm64};
    auto plan = plan_for(fixture, spec);
    ASSERT_TRUE(validate_plan(plan).empty()) << fixture;
    auto dev = lineage_installs(plan, StageName::dev);
    auto run = lineage_installs(plan, StageName::run);
    EXPECT_TRUE(std::includes(dev.begin(), dev.end(), run.begin(), run.end()));
    if (!spec.slim_runtime) EXPECT_EQ(dev, run);
  }
}

TEST(DockergenProperty, PermutedInputsRenderIdentically) {
  auto r = resolve_workspace(workspace_fixture("multi_private"), depgraph::Distro::humble);
  auto spec = run_spec();
  spec.repos_files = r.repos_files;
  spec.extra_apt = {"htop", "curl", "vim"};
  auto reference = render(plan_stages(spec, r.ws, r.all, r.exec, r.repos));
  std::mt19937 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    auto all = r.all;
    std::shuffle(all.system_pkgs.begin(), all.system_pkgs.end(), rng);
    std::shuffle(all.ros_distro_pkgs.begin(), all.ros_distro_pkgs.end(), rng);
    std::shuffle(spec.extra_apt.begin(), spec.extra_apt.end(), rng);
    EXPECT_EQ(render(plan_stages(spec, r.ws, all, r.exec, r.repos)), reference);
  }
}
