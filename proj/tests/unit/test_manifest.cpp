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

#include "forge/error.hpp"
#include "forge/manifest.hpp"
#include "test_support.hpp"

using namespace forge;
using namespace forge::manifest;
using forge::testing::manifest_xml;
using forge::testing::TempDir;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no forge::Error thrown";
  return ErrorCode::Internal;
}

}  // namespace

TEST(ParseManifest, DependExpandsToBuildAndExec) {
  auto m = parse_manifest(R"(<package format="2"><name>a</name><version>1.0.0</version><depend>rclcpp</depend></package>)");
  EXPECT_EQ(m.name, "a");
  EXPECT_EQ(m.version, "1.0.0");
  EXPECT_EQ(m.manifest_format, 2);
  EXPECT_EQ(m.deps_build, std::set<std::string>{"rclcpp"});
  EXPECT_EQ(m.deps_exec, std::set<std::string>{"rclcpp"});
  EXPECT_TRUE(m.deps_test.empty());
}

TEST(ParseManifest, NoDependencies) {
  auto m = parse_manifest(R"(<package format="2"><name>a</name><version>1.0.0</version></package>)");
  EXPECT_TRUE(m.deps_build.empty());
  EXPECT_TRUE(m.deps_exec.empty());
  EXPECT_TRUE(m.deps_test.empty());
}

TEST(ParseManifest, SeparateBuildAndExecKinds) {
  auto m = parse_manifest(manifest_xml("a", "<build_depend>eigen</build_depend><exec_depend>rclpy</exec_depend>"));
  EXPECT_EQ(m.deps_build, std::set<std::string>{"eigen"});
  EXPECT_EQ(m.deps_exec, std::set<std::string>{"rclpy"});
  EXPECT_TRUE(m.deps_test.empty());
}

TEST(ParseManifest, ExportAndToolKindsCountAsBuild) {
  auto m = parse_manifest(manifest_xml("a",
                                       "<buildtool_depend>ament_cmake</buildtool_depend>"
                                       "<build_export_depend>eigen</build_export_depend>"
                                       "<buildtool_export_depend>cmake</buildtool_export_depend>"
                                       "<test_depend>gtest</test_depend>"));
  EXPECT_EQ(m.deps_build, (std::set<std::string>{"ament_cmake", "cmake", "eigen"}));
  EXPECT_TRUE(m.deps_exec.empty());
  EXPECT_EQ(m.deps_test, std::set<std::string>{"gtest"});
}

TEST(ParseManifest, FormatOneRunDepend) {
  auto m = parse_manifest("<package><name>old</name><version>0.1.0</version><run_depend>roscpp</run_depend></package>");
  EXPECT_EQ(m.manifest_format, 1);
  EXPECT_EQ(m.deps_exec, std::set<std::string>{"roscpp"});
}

TEST(ParseManifest, UnknownElementsAreIgnored) {
  auto m = parse_manifest(manifest_xml("a", "<future_thing attr=\"1\"><x/></future_thing><url>https://x</url>"));
  EXPECT_EQ(m.name, "a");
}

TEST(ParseManifest, BuildTypeFromExport) {
  auto m = parse_manifest(manifest_xml("a", "<export><build_type>ament_python</build_type></export>"));
  EXPECT_EQ(m.build_type, BuildType::ament_python);
  auto plain = parse_manifest(manifest_xml("b"));
  EXPECT_EQ(plain.build_type, BuildType::ament_cmake);
  auto ros1 = parse_manifest(manifest_xml("c", "<buildtool_depend>catkin</buildtool_depend>", 2),
                             ConditionEnv{1, "noetic"});
  EXPECT_EQ(ros1.build_type, BuildType::catkin);
}

TEST(ParseManifest, ConditionsFollowEnvironment) {
  std::string xml = manifest_xml("a",
                                 "<depend condition=\"$ROS_VERSION == 1\">roscpp</depend>"
                                 "<depend condition=\"$ROS_VERSION == 2\">rclcpp</depend>"
                                 "<exec_depend condition=\"$ROS_DISTRO != humble\">legacy</exec_depend>");
  auto ros2 = parse_manifest(xml, ConditionEnv{2, "humble"});
  EXPECT_EQ(ros2.deps_build, std::set<std::string>{"rclcpp"});
  EXPECT_EQ(ros2.deps_exec, std::set<std::string>{"rclcpp"});
  auto ros1 = parse_manifest(xml, ConditionEnv{1, "noetic"});
  EXPECT_EQ(ros1.deps_exec, (std::set<std::string>{"legacy", "roscpp"}));
  auto unknown = parse_manifest(xml, ConditionEnv{});
  EXPECT_TRUE(unknown.deps_exec.empty());
}

TEST(EvaluateCondition, Grammar) {
  ConditionEnv env{2, "humble"};
  EXPECT_TRUE(evaluate_condition("$ROS_VERSION == 2", env));
  EXPECT_FALSE(evaluate_condition("$ROS_VERSION == 1", env));
  EXPECT_TRUE(evaluate_condition("$ROS_VERSION >= 2 and $ROS_DISTRO != foxy", env));
  EXPECT_TRUE(evaluate_condition("$ROS_VERSION == 1 or ($ROS_DISTRO == humble)", env));
  EXPECT_TRUE(evaluate_condition("$ROS_DISTRO == 'humble'", env));
  EXPECT_FALSE(evaluate_condition("$SOMETHING_ELSE == 1", env));
  EXPECT_FALSE(evaluate_condition("$ROS_VERSION == 2", ConditionEnv{}));
}

TEST(ParseManifest, Errors) {
  EXPECT_EQ(code_of([] { parse_manifest("<package><name>a</name>"); }), ErrorCode::MalformedManifest);
  EXPECT_EQ(code_of([] { parse_manifest("<package format=\"2\"><version>1.0.0</version></package>"); }),
            ErrorCode::MalformedManifest);
  EXPECT_EQ(code_of([] { parse_manifest("<package format=\"2\"><name>a</name></package>"); }),
            ErrorCode::MalformedManifest);
  EXPECT_EQ(code_of([] { parse_manifest(manifest_xml("a", "", 4)); }), ErrorCode::UnsupportedFormat);
  EXPECT_EQ(code_of([] { parse_manifest(manifest_xml("Bad Name")); }), ErrorCode::MalformedManifest);
  EXPECT_EQ(code_of([] { parse_manifest(manifest_xml("a", "<depend></depend>")); }), ErrorCode::MalformedManifest);
  EXPECT_EQ(code_of([] { parse_manifest("<notapackage/>"); }), ErrorCode::MalformedManifest);
}

TEST(ScanWorkspace, SortsByName) {
  TempDir dir;
  dir.write("src/zeta/package.xml", manifest_xml("zeta"));
  dir.write("src/nested/alpha/package.xml", manifest_xml("alpha"));
  auto ws = scan_workspace(dir.path());
  ASSERT_EQ(ws.packages.size(), 2u);
  EXPECT_EQ(ws.packages[0].name, "alpha");
  EXPECT_EQ(ws.packages[1].name, "zeta");
  EXPECT_EQ(ws.packages[0].source_dir, std::filesystem::path("src/nested/alpha"));
}

TEST(ScanWorkspace, IgnoreMarkersPruneSubtrees) {
  TempDir dir;
  dir.write("src/kept/package.xml", manifest_xml("kept"));
  dir.write("src/skipped/package.xml", manifest_xml("skipped"));
  dir.write("src/skipped/COLCON_IGNORE", "");
  dir.write("src/old/deep/package.xml", manifest_xml("old"));
  dir.write("src/old/CATKIN_IGNORE", "");
  auto ws = scan_workspace(dir.path());
  ASSERT_EQ(ws.packages.size(), 1u);
  EXPECT_EQ(ws.packages[0].name, "kept");
  EXPECT_EQ(ws.ignored_dirs.size(), 2u);
}

TEST(ScanWorkspace, PackageDirectoryIsALeaf) {
  TempDir dir;
  dir.write("src/outer/package.xml", manifest_xml("outer"));
  dir.write("src/outer/test/fixture/package.xml", manifest_xml("fixture_pkg"));
  auto ws = scan_workspace(dir.path());
  ASSERT_EQ(ws.packages.size(), 1u);
  EXPECT_EQ(ws.packages[0].name, "outer");
}

TEST(ScanWorkspace, Errors) {
  TempDir dup;
  dup.write("src/one/package.xml", manifest_xml("a"));
  dup.write("src/two/package.xml", manifest_xml("a"));
  EXPECT_EQ(code_of([&] { scan_workspace(dup.path()); }), ErrorCode::DuplicatePackageName);

  TempDir empty;
  empty.write("src/README.md", "nothing here");
  EXPECT_EQ(code_of([&] { scan_workspace(empty.path()); }), ErrorCode::EmptyWorkspace);

  TempDir broken;
  broken.write("src/bad/package.xml", "<package><name>");
  try {
    scan_workspace(broken.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedManifest);
    EXPECT_NE(std::string(e.what()).find("bad/package.xml"), std::string::npos);
  }
  EXPECT_EQ(code_of([&] { scan_workspace(empty.path() / "missing"); }), ErrorCode::InvalidArgs);
}

TEST(ScanWorkspace, FixtureWithColconIgnore) {
  auto ws = scan_workspace(forge::testing::workspace_fixture("ignored"));
  ASSERT_EQ(ws.packages.size(), 1u);
  EXPECT_EQ(ws.packages[0].name, "kept");
}

TEST(InternalPackageNames, Examples) {
  Workspace ws;
  EXPECT_TRUE(internal_package_names(ws).empty());
  ws.packages.push_back(PackageManifest{.name = "z"});
  ws.packages.push_back(PackageManifest{.name = "a"});
  EXPECT_EQ(internal_package_names(ws), (std::set<std::string>{"a", "z"}));
}

// parse(serialize(m)) == m over random manifests.
TEST(ManifestProperty, RoundTripThroughCanonicalSerializer) {
  std::mt19937 rng(7);
  std::vector<std::string> pool = {"rclcpp", "eigen", "std_msgs", "python3-yaml", "boost", "tf2_ros", "gtest",
                                   "pcl",    "opencv2", "nav_msgs", "launch",       "yaml-cpp"};
  const std::vector<BuildType> types = {BuildType::ament_cmake, BuildType::ament_python, BuildType::cmake};
  for (int trial = 0; trial < 300; ++trial) {
    PackageManifest m;
    m.name = "pkg_" + std::to_string(trial);
    m.version = std::to_string(trial % 5) + "." + std::to_string(trial % 3) + ".0";
    m.manifest_format = 2 + static_cast<int>(rng() % 2);
    m.build_type = types[rng() % types.size()];
    for (const auto& key : pool) {
      switch (rng() % 5) {
        case 0: m.deps_build.insert(key); break;
        case 1: m.deps_exec.insert(key); break;
        case 2: m.deps_build.insert(key); m.deps_exec.insert(key); break;
        case 3: m.deps_test.insert(key); break;
        default: break;
      }
    }
    auto parsed = parse_manifest(forge::testing::serialize_manifest(m), ConditionEnv{2, "humble"});
    ASSERT_EQ(parsed, m) << forge::testing::serialize_manifest(m);
  }
}

TEST(ManifestProperty, DependImpliesBothKinds) {
  std::mt19937 rng(11);
  const std::vector<std::string> tags = {"depend", "build_depend", "exec_depend", "test_depend", "buildtool_depend"};
  for (int trial = 0; trial < 200; ++trial) {
    std::string body;
    std::set<std::string> via_depend;
    for (int i = 0; i < 8; ++i) {
      const auto& tag = tags[rng() % tags.size()];
      std::string key = "k" + std::to_string(rng() % 10);
      body += "<" + tag + ">" + key + "</" + tag + ">";
      if (tag == "depend") via_depend.insert(key);
    }
    auto m = parse_manifest(manifest_xml("a", body));
    EXPECT_TRUE(std::includes(m.deps_build.begin(), m.deps_build.end(), via_depend.begin(), via_depend.end()));
    EXPECT_TRUE(std::includes(m.deps_exec.begin(), m.deps_exec.end(), via_depend.begin(), via_depend.end()));
  }
}

TEST(ManifestProperty, ScanIndependentOfCreationOrder) {
  std::vector<std::string> names = {"delta", "alpha", "charlie", "bravo", "echo"};
  std::vector<std::string> expected = names;
  std::sort(expected.begin(), expected.end());
  std::mt19937 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(names.begin(), names.end(), rng);
    TempDir dir;
    for (const auto& n : names) dir.write("src/" + n + "_dir/package.xml", manifest_xml(n));
    auto ws = scan_workspace(dir.path());
    std::vector<std::string> got;
    for (const auto& p : ws.packages) got.push_back(p.name);
    EXPECT_EQ(got, expected);
  }
}
