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

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "forge/depgraph.hpp"
#include "forge/platform.hpp"

namespace forge::matrix {

using depgraph::Distro;

enum class Component { core, base, robot, perception, desktop, desktop_full };
enum class MlFlavor { none, cuda, tf_py, tf_cpp, torch_py, torch_cpp };

std::string_view to_string(Component component);
std::string_view to_string(MlFlavor flavor);
Component component_from_string(std::string_view text);
MlFlavor ml_flavor_from_string(std::string_view text);
const std::vector<Component>& all_components();
const std::vector<MlFlavor>& all_ml_flavors();

/// One multi-arch image; architectures fold into its manifest list.
struct MatrixEntry {
  Distro distro = Distro::humble;
  Component component = Component::core;
  MlFlavor ml_flavor = MlFlavor::none;
  std::vector<Platform> architectures{Platform::amd64, Platform::arm64};

  bool operator==(const MatrixEntry&) const = default;
};

/// Unset dimensions are unrestricted; an empty set selects nothing.
struct MatrixFilter {
  std::optional<std::set<Distro>> distros;
  std::optional<std::set<Component>> components;
  std::optional<std::set<MlFlavor>> ml_flavors;
  std::optional<std::set<Platform>> architectures;
};

/// Cross product distro x component x ml_flavor, ordered by the declaration
/// order of each dimension.
std::vector<MatrixEntry> enumerate_matrix(const MatrixFilter& filter = {});

/// `<registry>/<family>:<distro>-<component>`, family `ros` or `ros2` plus an
/// ml suffix (`-cuda`, `-tf`, `-tf-cpp`, `-torch`, `-torch-cpp`).
std::string tag_of(const MatrixEntry& entry, std::string_view registry);

/// Upstream base images per Ubuntu release and architecture.
class BaseImageTable {
 public:
  /// Parses `{plain: {<ubuntu>: image}, accelerated: {<ubuntu>: {amd64: image, arm64: image}}}`.
  static BaseImageTable from_yaml(std::string_view yaml_text);
  /// The table bundled with forge.
  static const BaseImageTable& builtin();

  std::string plain(std::string_view ubuntu_release) const;
  std::string accelerated(std::string_view ubuntu_release, Platform platform) const;

 private:
  std::map<std::string, std::string, std::less<>> plain_;
  std::map<std::string, std::map<Platform, std::string>, std::less<>> accelerated_;
};

/// Ubuntu release each distro targets.
std::string_view ubuntu_release(Distro distro);

/// Build arguments for the generic base-image Dockerfile. Emits ROS_DISTRO,
/// ROS_COMPONENT, ML_FLAVOR (omitted for none) and one BASE_IMAGE_<ARCH> per
/// architecture.
std::map<std::string, std::string> base_dockerfile_args(const MatrixEntry& entry,
                                                        const BaseImageTable& table = BaseImageTable::builtin());

struct PlanItem {
  std::string tag;
  std::map<std::string, std::string> build_args;
  std::vector<Platform> platforms;
  std::string dockerfile_path;
};

std::vector<PlanItem> build_plan(const std::vector<MatrixEntry>& entries, std::string_view registry,
                                 std::string_view dockerfile_path,
                                 const BaseImageTable& table = BaseImageTable::builtin());

/// YAML list of `{tag, build_args, platforms, dockerfile_path}`.
std::string render_build_plan(const std::vector<PlanItem>& plan);
std::vector<PlanItem> parse_build_plan(std::string_view yaml_text);

/// Generic Dockerfile that realizes any matrix entry from its build args.
std::string base_dockerfile();

}  // namespace forge::matrix
