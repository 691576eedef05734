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

#include "forge/cigen.hpp"

#include <algorithm>

#include <yaml-cpp/yaml.h>

#include "forge/error.hpp"

namespace forge::cigen {

using dockergen::Target;

std::string_view to_string(CiPlatform platform) { return platform == CiPlatform::github ? "github" : "gitlab"; }

CiPlatform ci_platform_from_string(std::string_view text) {
  if (text == "github") return CiPlatform::github;
  if (text == "gitlab") return CiPlatform::gitlab;
  throw Error(ErrorCode::InvalidArgs, "unknown CI platform '" + std::string(text) + "' (expected github or gitlab)");
}

std::string_view default_output_path(CiPlatform platform) {
  return platform == CiPlatform::github ? ".github/workflows/forge.yml" : ".gitlab-ci.yml";
}

namespace {

std::string shell_quote(std::string_view text) {
  std::string out = "'";
  for (char c : text) out += (c == '\'') ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

std::string commit_var(CiPlatform platform) {
  return platform == CiPlatform::github ? "${GITHUB_SHA}" : "${CI_COMMIT_SHA}";
}

std::string repository(const PipelineSpec& spec) {
  return spec.registry.empty() ? spec.image_name : spec.registry + "/" + spec.image_name;
}

std::string final_tag(const PipelineSpec& spec, Target target) {
  return repository(spec) + (target == Target::run ? ":latest" : ":latest-dev");
}

std::string candidate_tag(const PipelineSpec& spec, Target target, std::optional<Platform> arch) {
  std::string tag = repository(spec) + ":ci-" + std::string(dockergen::to_string(target));
  if (arch) tag += "-" + std::string(to_string(*arch));
  return tag + "-" + commit_var(spec.platform);
}

// Tag that holds the complete (possibly multi-arch) candidate for `target`.
std::string merged_candidate(const PipelineSpec& spec, Target target) {
  return spec.platforms.size() > 1 ? candidate_tag(spec, target, std::nullopt)
                                   : candidate_tag(spec, target, spec.platforms.front());
}

void validate(const PipelineSpec& spec) {
  if (spec.image_name.empty()) throw Error(ErrorCode::InvalidSpec, "image name must not be empty");
  if (spec.platforms.empty()) throw Error(ErrorCode::InvalidSpec, "at least one platform is required");
  if (spec.target_stages.empty()) throw Error(ErrorCode::InvalidSpec, "at least one target stage is required");
  if (spec.push_on_branch.empty()) throw Error(ErrorCode::InvalidSpec, "push branch must not be empty");
  if (spec.enable_test_stage && !spec.target_stages.contains(Target::dev)) {
    throw Error(ErrorCode::InvalidSpec, "the test stage runs in the dev image; add dev to the target stages");
  }
  std::set<Platform> unique(spec.platforms.begin(), spec.platforms.end());
  if (unique.size() != spec.platforms.size()) throw Error(ErrorCode::InvalidSpec, "duplicate platform");
}

}  // namespace

std::vector<Job> plan_jobs(const PipelineSpec& spec) {
  validate(spec);
  std::vector<Job> jobs;
  std::vector<std::string> build_names;
  for (Target target : spec.target_stages) {
    for (Platform arch : spec.platforms) {
      Job job{"build-" + std::string(dockergen::to_string(target)) + "-" + std::string(to_string(arch)),
              JobKind::build, arch, {}, {}};
      std::string cmd = "forge build " + shell_quote(spec.workspace) + " --target " +
                        std::string(dockergen::to_string(target)) + " --platform " + std::string(to_string(arch));
      if (spec.distro) cmd += " --distro " + *spec.distro;
      if (!spec.base_image.empty()) cmd += " --base " + shell_quote(spec.base_image);
      if (target == Target::run && spec.launch_command) cmd += " --command " + shell_quote(*spec.launch_command);
      cmd += " --tag \"" + candidate_tag(spec, target, arch) + "\" --push";
      job.commands.push_back(cmd);
      build_names.push_back(job.name);
      jobs.push_back(std::move(job));
    }
  }

  std::vector<std::string> frontier = build_names;
  if (spec.enable_test_stage) {
    Platform arch = std::find(spec.platforms.begin(), spec.platforms.end(), Platform::amd64) != spec.platforms.end()
                        ? Platform::amd64
                        : spec.platforms.front();
    Job test{"test", JobKind::test, arch, build_names, {}};
    test.commands.push_back("forge run \"" + candidate_tag(spec, Target::dev, arch) +
                            "\" --no-x11 --no-gpu --no-user-map --no-mount-ws -- bash -c " +
                            shell_quote(spec.test_command));
    jobs.push_back(std::move(test));
    frontier = {"test"};
  }

  if (spec.platforms.size() > 1) {
    std::vector<std::string> merges;
    for (Target target : spec.target_stages) {
      Job merge{"merge-" + std::string(dockergen::to_string(target)), JobKind::merge, std::nullopt, frontier, {}};
      std::string cmd = "forge manifest merge --tag \"" + candidate_tag(spec, target, std::nullopt) + "\"";
      for (Platform arch : spec.platforms) cmd += " \"" + candidate_tag(spec, target, arch) + "\"";
      merge.commands.push_back(cmd);
      merges.push_back(merge.name);
      jobs.push_back(std::move(merge));
    }
    frontier = merges;
  }

  Job push{"push", JobKind::push, std::nullopt, frontier, {}};
  for (Target target : spec.target_stages) {
    push.commands.push_back("forge promote \"" + merged_candidate(spec, target) + "\" \"" + final_tag(spec, target) +
                            "\"");
  }
  jobs.push_back(std::move(push));
  return jobs;
}

namespace {

std::string registry_host(const PipelineSpec& spec) {
  if (spec.registry.empty()) return "docker.io";
  return spec.registry.substr(0, spec.registry.find('/'));
}

void emit_seq(YAML::Emitter& out, const std::vector<std::string>& items) {
  out << YAML::BeginSeq;
  for (const auto& item : items) out << item;
  out << YAML::EndSeq;
}

std::string render_github(const PipelineSpec& spec, const std::vector<Job>& jobs) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << "forge";
  out << YAML::Key << YAML::DoubleQuoted << "on" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "push" << YAML::Value << YAML::BeginMap << YAML::Key << "branches" << YAML::Value;
  emit_seq(out, {spec.push_on_branch});
  out << YAML::EndMap;
  out << YAML::Key << "pull_request" << YAML::Value << YAML::BeginMap << YAML::EndMap;
  out << YAML::EndMap;

  out << YAML::Key << "jobs" << YAML::Value << YAML::BeginMap;
  for (const auto& job : jobs) {
    out << YAML::Key << job.name << YAML::Value << YAML::BeginMap;
    std::string runner = job.arch == Platform::arm64 ? "ubuntu-24.04-arm" : "ubuntu-latest";
    out << YAML::Key << "runs-on" << YAML::Value << runner;
    if (!job.needs.empty()) {
      out << YAML::Key << "needs" << YAML::Value;
      emit_seq(out, job.needs);
    }
    if (job.kind == JobKind::push) {
      out << YAML::Key << "if" << YAML::Value << "github.ref == 'refs/heads/" + spec.push_on_branch + "'";
    }
    if (job.kind == JobKind::build && !spec.credential_vars.empty()) {
      out << YAML::Key << "env" << YAML::Value << YAML::BeginMap;
      for (const auto& var : spec.credential_vars) {
        out << YAML::Key << var << YAML::Value << "${{ secrets." + var + " }}";
      }
      out << YAML::EndMap;
    }
    out << YAML::Key << "steps" << YAML::Value << YAML::BeginSeq;
    if (job.kind == JobKind::build || job.kind == JobKind::test) {
      out << YAML::BeginMap << YAML::Key << "uses" << YAML::Value << "actions/checkout@v4" << YAML::EndMap;
    }
    out << YAML::BeginMap << YAML::Key << "uses" << YAML::Value << "docker/setup-buildx-action@v3" << YAML::EndMap;
    out << YAML::BeginMap << YAML::Key << "uses" << YAML::Value << "docker/login-action@v3";
    out << YAML::Key << "with" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "registry" << YAML::Value << registry_host(spec);
    out << YAML::Key << "username" << YAML::Value << "${{ secrets.REGISTRY_USERNAME }}";
    out << YAML::Key << "password" << YAML::Value << "${{ secrets.REGISTRY_PASSWORD }}";
    out << YAML::EndMap << YAML::EndMap;
    if (!spec.setup_command.empty()) {
      out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << "Set up forge";
      out << YAML::Key << "run" << YAML::Value << spec.setup_command << YAML::EndMap;
    }
    for (const auto& cmd : job.commands) {
      out << YAML::BeginMap << YAML::Key << "run" << YAML::Value << cmd << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string_view stage_of(JobKind kind) {
  switch (kind) {
    case JobKind::build: return "build";
    case JobKind::test: return "test";
    case JobKind::merge: return "merge";
    case JobKind::push: return "push";
  }
  return "build";
}

std::string render_gitlab(const PipelineSpec& spec, const std::vector<Job>& jobs) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "stages" << YAML::Value;
  std::vector<std::string> stages;
  for (const auto& job : jobs) {
    std::string stage(stage_of(job.kind));
    if (std::find(stages.begin(), stages.end(), stage) == stages.end()) stages.push_back(stage);
  }
  emit_seq(out, stages);

  out << YAML::Key << "variables" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "DOCKER_TLS_CERTDIR" << YAML::Value << "/certs";
  out << YAML::EndMap;

  out << YAML::Key << "default" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "image" << YAML::Value << "docker:27";
  out << YAML::Key << "services" << YAML::Value;
  emit_seq(out, {"docker:27-dind"});
  std::vector<std::string> before{"echo \"$REGISTRY_PASSWORD\" | docker login --username \"$REGISTRY_USERNAME\" "
                                  "--password-stdin " +
                                  registry_host(spec)};
  if (!spec.setup_command.empty()) before.push_back(spec.setup_command);
  out << YAML::Key << "before_script" << YAML::Value;
  emit_seq(out, before);
  out << YAML::EndMap;

  for (const auto& job : jobs) {
    out << YAML::Key << job.name << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "stage" << YAML::Value << std::string(stage_of(job.kind));
    if (job.arch == Platform::arm64) {
      out << YAML::Key << "tags" << YAML::Value;
      emit_seq(out, {"saas-linux-small-arm64"});
    }
    out << YAML::Key << "needs" << YAML::Value;
    if (job.needs.empty()) {
      out << YAML::Flow << YAML::BeginSeq << YAML::EndSeq;
    } else {
      emit_seq(out, job.needs);
    }
    if (job.kind == JobKind::push) {
      out << YAML::Key << "rules" << YAML::Value << YAML::BeginSeq << YAML::BeginMap;
      out << YAML::Key << "if" << YAML::Value << "$CI_COMMIT_BRANCH == \"" + spec.push_on_branch + "\"";
      out << YAML::EndMap << YAML::EndSeq;
    }
    out << YAML::Key << "script" << YAML::Value;
    emit_seq(out, job.commands);
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace

std::string generate_pipeline(const PipelineSpec& spec) {
  auto jobs = plan_jobs(spec);
  return spec.platform == CiPlatform::github ? render_github(spec, jobs) : render_gitlab(spec, jobs);
}

}  // namespace forge::cigen
