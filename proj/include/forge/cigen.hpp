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

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "forge/dockergen.hpp"
#include "forge/platform.hpp"

namespace forge::cigen {

enum class CiPlatform { github, gitlab };

std::string_view to_string(CiPlatform platform);
CiPlatform ci_platform_from_string(std::string_view text);

struct PipelineSpec {
  CiPlatform platform = CiPlatform::github;
  std::string image_name;
  std::string registry;
  std::vector<Platform> platforms{Platform::amd64};
  bool enable_test_stage = false;
  std::string push_on_branch = "main";
  std::string base_image;
  std::set<dockergen::Target> target_stages{dockergen::Target::dev, dockergen::Target::run};

  /// Workspace path passed to `forge build`, relative to the repository root.
  std::string workspace = ".";
  std::optional<std::string> distro;
  /// Run-image default command, forwarded as `--command`.
  std::optional<std::string> launch_command;
  /// Executed inside the dev image by the test job.
  std::string test_command = "colcon build && colcon test && colcon test-result --verbose";
  /// Shell command that puts `forge` on PATH; no step when empty.
  std::string setup_command;
  /// Secret names exported to build jobs (credential placeholders of .repos urls).
  std::vector<std::string> credential_vars;
};

enum class JobKind { build, test, merge, push };

struct Job {
  std::string name;
  JobKind kind;
  std::optional<Platform> arch;  // build and test jobs
  std::vector<std::string> needs;
  std::vector<std::string> commands;
};

/// Jobs in emission order: builds, test, merges, push.
std::vector<Job> plan_jobs(const PipelineSpec& spec);

std::string generate_pipeline(const PipelineSpec& spec);

/// `.github/workflows/forge.yml` or `.gitlab-ci.yml`.
std::string_view default_output_path(CiPlatform platform);

}  // namespace forge::cigen
