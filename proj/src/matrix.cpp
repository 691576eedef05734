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

#include "forge/matrix.hpp"

#include <algorithm>

#include <yaml-cpp/yaml.h>

#include "forge/error.hpp"
#include "forge_base_images.inc"

namespace forge::matrix {

std::string_view to_string(Component component) {
  switch (component) {
    case Component::core: return "core";
    case Component::base: return "base";
    case Component::robot: return "robot";
    case Component::perception: return "perception";
    case Component::desktop: return "desktop";
    case Component::desktop_full: return "desktop-full";
  }
  return "unknown";
}

std::string_view to_string(MlFlavor flavor) {
  switch (flavor) {
    case MlFlavor::none: return "none";
    case MlFlavor::cuda: return "cuda";
    case MlFlavor::tf_py: return "tf-py";
    case MlFlavor::tf_cpp: return "tf-cpp";
    case MlFlavor::torch_py: return "torch-py";
    case MlFlavor::torch_cpp: return "torch-cpp";
  }
  return "unknown";
}

const std::vector<Component>& all_components() {
  static const std::vector<Component> v{Component::core, Component::base, Component::robot,
                                        Component::perception, Component::desktop, Component::desktop_full};
  return v;
}

const std::vector<MlFlavor>& all_ml_flavors() {
  static const std::vector<MlFlavor> v{MlFlavor::none, MlFlavor::cuda, MlFlavor::tf_py,
                                       MlFlavor::tf_cpp, MlFlavor::torch_py, MlFlavor::torch_cpp};
  return v;
}

Component component_from_string(std::string_view text) {
  for (auto c : all_components()) {
    if (to_string(c) == text) return c;
  }
  throw Error(ErrorCode::InvalidArgs, "unknown ROS component '" + std::string(text) + "'");
}

MlFlavor ml_flavor_from_string(std::string_view text) {
  for (auto f : all_ml_flavors()) {
    if (to_string(f) == text) return f;
  }
  throw Error(ErrorCode::InvalidArgs, "unknown ML flavor '" + std::string(text) + "'");
}

std::vector<MatrixEntry> enumerate_matrix(const MatrixFilter& filter) {
  std::vector<Platform> archs;
  for (Platform p : {Platform::amd64, Platform::arm64}) {
    if (!filter.architectures || filter.architectures->contains(p)) archs.push_back(p);
  }
  std::vector<MatrixEntry> entries;
  if (archs.empty()) return entries;
  for (Distro d : depgraph::all_distros()) {
    if (filter.distros && !filter.distros->contains(d)) continue;
    for (Component c : all_components()) {
      if (filter.components && !filter.components->contains(c)) continue;
      for (MlFlavor f : all_ml_flavors()) {
        if (filter.ml_flavors && !filter.ml_flavors->contains(f)) continue;
        entries.push_back(MatrixEntry{d, c, f, archs});
      }
    }
  }
  return entries;
}

namespace {

std::string_view flavor_suffix(MlFlavor flavor) {
  switch (flavor) {
    case MlFlavor::none: return "";
    case MlFlavor::cuda: return "-cuda";
    case MlFlavor::tf_py: return "-tf";
    case MlFlavor::tf_cpp: return "-tf-cpp";
    case MlFlavor::torch_py: return "-torch";
    case MlFlavor::torch_cpp: return "-torch-cpp";
  }
  return "";
}

std::string arch_key(Platform p) {
  std::string key(to_string(p));
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::toupper(c); });
  return "BASE_IMAGE_" + key;
}

}  // namespace

std::string tag_of(const MatrixEntry& entry, std::string_view registry) {
  if (registry.empty()) throw Error(ErrorCode::InvalidArgs, "registry must not be empty");
  std::string family = depgraph::ros_version_of(entry.distro) == 1 ? "ros" : "ros2";
  return std::string(registry) + "/" + family + std::string(flavor_suffix(entry.ml_flavor)) + ":" +
         std::string(depgraph::to_string(entry.distro)) + "-" + std::string(to_string(entry.component));
}

std::string_view ubuntu_release(Distro distro) {
  switch (distro) {
    case Distro::noetic:
    case Distro::foxy: return "20.04";
    case Distro::humble:
    case Distro::iron: return "22.04";
    case Distro::rolling: return "24.04";
  }
  return "22.04";
}

BaseImageTable BaseImageTable::from_yaml(std::string_view yaml_text) {
  BaseImageTable table;
  try {
    YAML::Node doc = YAML::Load(std::string(yaml_text));
    if (!doc.IsMap() || !doc["plain"].IsMap() || !doc["accelerated"].IsMap()) {
      throw Error(ErrorCode::InvalidConfig, "base image table needs 'plain' and 'accelerated' mappings");
    }
    for (const auto& item : doc["plain"]) table.plain_[item.first.as<std::string>()] = item.second.as<std::string>();
    for (const auto& item : doc["accelerated"]) {
      auto& row = table.accelerated_[item.first.as<std::string>()];
      for (const auto& arch : item.second) {
        row[platform_from_string(arch.first.as<std::string>())] = arch.second.as<std::string>();
      }
    }
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("base image table: ") + e.what());
  }
  return table;
}

const BaseImageTable& BaseImageTable::builtin() {
  static const BaseImageTable table = from_yaml(kBuiltinBaseImages);
  return table;
}

std::string BaseImageTable::plain(std::string_view release) const {
  auto it = plain_.find(release);
  if (it == plain_.end()) {
    throw Error(ErrorCode::InvalidConfig, "no plain base image for Ubuntu " + std::string(release));
  }
  return it->second;
}

std::string BaseImageTable::accelerated(std::string_view release, Platform platform) const {
  auto row = accelerated_.find(release);
  if (row == accelerated_.end() || !row->second.contains(platform)) {
    throw Error(ErrorCode::InvalidConfig, "no accelerated base image for Ubuntu " + std::string(release) + " on " +
                                              std::string(to_string(platform)));
  }
  return row->second.at(platform);
}

std::map<std::string, std::string> base_dockerfile_args(const MatrixEntry& entry, const BaseImageTable& table) {
  std::map<std::string, std::string> args;
  args["ROS_DISTRO"] = std::string(depgraph::to_string(entry.distro));
  args["ROS_COMPONENT"] = std::string(to_string(entry.component));
  if (entry.ml_flavor != MlFlavor::none) args["ML_FLAVOR"] = std::string(to_string(entry.ml_flavor));
  auto release = ubuntu_release(entry.distro);
  for (Platform p : entry.architectures) {
    args[arch_key(p)] = entry.ml_flavor == MlFlavor::none ? table.plain(release) : table.accelerated(release, p);
  }
  return args;
}

std::vector<PlanItem> build_plan(const std::vector<MatrixEntry>& entries, std::string_view registry,
                                 std::string_view dockerfile_path, const BaseImageTable& table) {
  std::vector<PlanItem> plan;
  for (const auto& e : entries) {
    plan.push_back(PlanItem{tag_of(e, registry), base_dockerfile_args(e, table), e.architectures,
                            std::string(dockerfile_path)});
  }
  return plan;
}

std::string render_build_plan(const std::vector<PlanItem>& plan) {
  YAML::Emitter out;
  out << YAML::BeginSeq;
  for (const auto& item : plan) {
    out << YAML::BeginMap;
    out << YAML::Key << "tag" << YAML::Value << item.tag;
    out << YAML::Key << "build_args" << YAML::Value << YAML::BeginMap;
    for (const auto& [k, v] : item.build_args) out << YAML::Key << k << YAML::Value << v;
    out << YAML::EndMap;
    out << YAML::Key << "platforms" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (Platform p : item.platforms) out << engine_platform(p);
    out << YAML::EndSeq;
    out << YAML::Key << "dockerfile_path" << YAML::Value << item.dockerfile_path;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  return std::string(out.c_str()) + "\n";
}

std::vector<PlanItem> parse_build_plan(std::string_view yaml_text) {
  std::vector<PlanItem> plan;
  try {
    YAML::Node doc = YAML::Load(std::string(yaml_text));
    if (doc.IsNull()) return plan;
    if (!doc.IsSequence()) throw Error(ErrorCode::InvalidArgs, "build plan must be a list");
    for (const auto& node : doc) {
      PlanItem item;
      item.tag = node["tag"].as<std::string>();
      if (node["build_args"]) {
        for (const auto& arg : node["build_args"]) {
          item.build_args[arg.first.as<std::string>()] = arg.second.as<std::string>();
        }
      }
      for (const auto& p : node["platforms"]) item.platforms.push_back(platform_from_string(p.as<std::string>()));
      item.dockerfile_path = node["dockerfile_path"].as<std::string>();
      plan.push_back(std::move(item));
    }
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::InvalidArgs, std::string("malformed build plan: ") + e.what());
  }
  return plan;
}

std::string base_dockerfile() {
  return R"(# syntax=docker/dockerfile:1
# Generic ML-enabled ROS base image. Every matrix entry is a set of build args.
ARG BASE_IMAGE_AMD64=ubuntu:22.04
ARG BASE_IMAGE_ARM64=ubuntu:22.04
ARG TARGETARCH

FROM ${BASE_IMAGE_AMD64} AS upstream-amd64
FROM ${BASE_IMAGE_ARM64} AS upstream-arm64

FROM upstream-${TARGETARCH} AS ros
ARG ROS_DISTRO
ARG ROS_COMPONENT=core
ENV ROS_DISTRO=${ROS_DISTRO}
RUN apt-get update && DEBIAN_FRONTEND=noninteractive apt-get install -y --no-install-recommends ca-certificates curl gnupg lsb-release && curl -fsSL https://raw.githubusercontent.com/ros/rosdistro/master/ros.key -o /usr/share/keyrings/ros-archive-keyring.gpg && if [ "${ROS_DISTRO}" = noetic ]; then repo=ros; else repo=ros2; fi && echo "deb [arch=$(dpkg --print-architecture) signed-by=/usr/share/keyrings/ros-archive-keyring.gpg] http://packages.ros.org/${repo}/ubuntu $(lsb_release -cs) main" > /etc/apt/sources.list.d/${repo}.list && case "${ROS_COMPONENT}" in core) pkg=ros-core ;; base) pkg=ros-base ;; *) pkg="${ROS_COMPONENT}" ;; esac && apt-get update && DEBIAN_FRONTEND=noninteractive apt-get install -y --no-install-recommends "ros-${ROS_DISTRO}-${pkg}" python3-pip && rm -rf /var/lib/apt/lists/*

ARG ML_FLAVOR=
ARG TF_C_API_URL=
RUN case "${ML_FLAVOR}" in "" | cuda) ;; torch-py | torch-cpp) PIP_BREAK_SYSTEM_PACKAGES=1 python3 -m pip install --no-cache-dir torch ;; tf-py) PIP_BREAK_SYSTEM_PACKAGES=1 python3 -m pip install --no-cache-dir tensorflow ;; tf-cpp) test -n "${TF_C_API_URL}" && curl -fsSL "${TF_C_API_URL}" | tar -xz -C /usr/local && ldconfig ;; *) echo "unknown ML_FLAVOR ${ML_FLAVOR}" >&2 && exit 1 ;; esac
RUN if [ "${ML_FLAVOR}" = torch-cpp ]; then echo "export CMAKE_PREFIX_PATH=$(python3 -c 'import torch; print(torch.utils.cmake_prefix_path)'):\${CMAKE_PREFIX_PATH}" >> /etc/bash.bashrc; fi
CMD ["bash"]
)";
}

}  // namespace forge::matrix
