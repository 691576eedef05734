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
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "forge/manifest.hpp"
#include "forge/sources.hpp"

namespace forge::depgraph {

enum class OsTarget { ubuntu };

enum class Distro { noetic, foxy, humble, iron, rolling };

std::string_view to_string(Distro distro);
Distro distro_from_string(std::string_view text);  // throws InvalidArgs
int ros_version_of(Distro distro);
const std::vector<Distro>& all_distros();

struct RosdepRecord {
  enum class Kind { system, python };
  Kind kind = Kind::system;
  std::vector<std::string> packages;

  bool operator==(const RosdepRecord&) const = default;
};

struct RosdepDatabase {
  OsTarget os_target = OsTarget::ubuntu;
  std::map<std::string, RosdepRecord> entries;
};

struct DistroIndex {
  Distro distro = Distro::humble;
  int ros_version = 2;
  std::set<std::string> packages;
};

/// Declared dependency keys of a workspace, split by when they are needed.
struct DeclaredKeys {
  std::set<std::string> build;
  std::set<std::string> exec;
};

DeclaredKeys declared_keys(const manifest::Workspace& ws);

enum class Scope { all, exec_only };

enum class Bucket { internal, ros_distro, system, python, source, unresolved };

std::string_view to_string(Bucket bucket);

struct ResolvedDependencies {
  std::set<std::string> internal;
  std::vector<std::string> ros_distro_pkgs;
  std::vector<std::string> system_pkgs;
  std::vector<std::string> python_pkgs;
  sources::ReposList source_repos;
  std::vector<std::string> unresolved;
  Scope scope = Scope::all;
  /// Bucket each input key landed in.
  std::map<std::string, Bucket> origin;
};

/// Everything besides the keys that classification consults.
struct ResolverContext {
  const RosdepDatabase& db;
  const DistroIndex& index;
  std::set<std::string> internal;
  /// Dependency key -> repository cloned from source that provides it.
  std::map<std::string, sources::RepoSpec> repo_keys;
};

/// Accepts the two supported record shapes under the `ubuntu` key: a bare
/// list of system packages, or `{pip: {packages: [...]}}`. Later documents
/// override earlier ones key by key.
RosdepDatabase load_rosdep_db(const std::vector<std::string>& yaml_docs, OsTarget os_target = OsTarget::ubuntu);

/// Loads `distro: {name, ros_version, packages: [...]}`.
DistroIndex load_distro_index(std::string_view yaml_text);

/// `ros-<distro>-<key with underscores as dashes>`.
std::string ros_package_name(Distro distro, std::string_view key);

/// Precedence per key: internal, source repository, distro index, rosdep
/// database, unresolved.
ResolvedDependencies resolve(const DeclaredKeys& keys, const ResolverContext& ctx, Scope scope = Scope::all);

/// The exec-scope resolution used for slim runtime images. Every bucket of
/// the result is a subset of the matching bucket of `all_scope`.
ResolvedDependencies runtime_subset(const ResolvedDependencies& all_scope, const DeclaredKeys& keys,
                                    const ResolverContext& ctx);

std::map<std::string, sources::RepoSpec> repo_key_map(const sources::ReposList& repos);

}  // namespace forge::depgraph
