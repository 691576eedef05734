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

#include "forge/depgraph.hpp"

#include <algorithm>

#include <yaml-cpp/yaml.h>

#include "forge/error.hpp"

namespace forge::depgraph {

std::string_view to_string(Distro distro) {
  switch (distro) {
    case Distro::noetic: return "noetic";
    case Distro::foxy: return "foxy";
    case Distro::humble: return "humble";
    case Distro::iron: return "iron";
    case Distro::rolling: return "rolling";
  }
  return "unknown";
}

Distro distro_from_string(std::string_view text) {
  for (Distro d : all_distros()) {
    if (to_string(d) == text) return d;
  }
  throw Error(ErrorCode::InvalidArgs, "unsupported ROS distro '" + std::string(text) +
                                          "' (expected noetic, foxy, humble, iron or rolling)");
}

int ros_version_of(Distro distro) { return distro == Distro::noetic ? 1 : 2; }

const std::vector<Distro>& all_distros() {
  static const std::vector<Distro> distros{Distro::noetic, Distro::foxy, Distro::humble, Distro::iron,
                                           Distro::rolling};
  return distros;
}

std::string_view to_string(Bucket bucket) {
  switch (bucket) {
    case Bucket::internal: return "internal";
    case Bucket::ros_distro: return "ros_distro";
    case Bucket::system: return "system";
    case Bucket::python: return "python";
    case Bucket::source: return "source";
    case Bucket::unresolved: return "unresolved";
  }
  return "unknown";
}

DeclaredKeys declared_keys(const manifest::Workspace& ws) {
  DeclaredKeys keys;
  for (const auto& p : ws.packages) {
    keys.build.insert(p.deps_build.begin(), p.deps_build.end());
    keys.exec.insert(p.deps_exec.begin(), p.deps_exec.end());
  }
  return keys;
}

namespace {

std::vector<std::string> package_list(const YAML::Node& node, const std::string& key) {
  if (!node.IsSequence() || node.size() == 0) {
    throw Error(ErrorCode::MalformedDatabase, "key '" + key + "': package list must be a non-empty sequence");
  }
  std::vector<std::string> packages;
  std::set<std::string> seen;
  for (const auto& item : node) {
    if (!item.IsScalar() || item.as<std::string>().empty()) {
      throw Error(ErrorCode::MalformedDatabase, "key '" + key + "': package names must be non-empty strings");
    }
    auto name = item.as<std::string>();
    if (!seen.insert(name).second) {
      throw Error(ErrorCode::MalformedDatabase, "key '" + key + "': duplicate package '" + name + "'");
    }
    packages.push_back(std::move(name));
  }
  return packages;
}

RosdepRecord parse_record(const YAML::Node& node, const std::string& key) {
  if (node.IsSequence()) return {RosdepRecord::Kind::system, package_list(node, key)};
  if (node.IsMap() && node.size() == 1 && node["pip"] && node["pip"].IsMap() && node["pip"].size() == 1 &&
      node["pip"]["packages"]) {
    return {RosdepRecord::Kind::python, package_list(node["pip"]["packages"], key)};
  }
  throw Error(ErrorCode::MalformedDatabase,
              "key '" + key + "': unsupported record shape (expected a package list or {pip: {packages: [...]}})");
}

}  // namespace

RosdepDatabase load_rosdep_db(const std::vector<std::string>& yaml_docs, OsTarget os_target) {
  RosdepDatabase db;
  db.os_target = os_target;
  for (std::size_t i = 0; i < yaml_docs.size(); ++i) {
    YAML::Node doc;
    try {
      doc = YAML::Load(yaml_docs[i]);
    } catch (const YAML::Exception& e) {
      throw Error(ErrorCode::MalformedDatabase, "document " + std::to_string(i) + ": invalid YAML: " + e.what());
    }
    if (doc.IsNull()) continue;
    if (!doc.IsMap()) throw Error(ErrorCode::MalformedDatabase, "document " + std::to_string(i) + " is not a mapping");
    for (const auto& item : doc) {
      auto key = item.first.as<std::string>();
      if (key.empty()) throw Error(ErrorCode::MalformedDatabase, "empty dependency key");
      if (!item.second.IsMap()) {
        throw Error(ErrorCode::MalformedDatabase, "key '" + key + "' must map operating systems to rules");
      }
      YAML::Node rule = item.second["ubuntu"];
      if (!rule) {
        // No rule for our target; a later document may still add one.
        continue;
      }
      db.entries.insert_or_assign(key, parse_record(rule, key));
    }
  }
  return db;
}

DistroIndex load_distro_index(std::string_view yaml_text) {
  YAML::Node doc;
  try {
    doc = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::MalformedDatabase, std::string("distro index: invalid YAML: ") + e.what());
  }
  YAML::Node distro = doc.IsMap() ? doc["distro"] : YAML::Node();
  if (!distro || !distro.IsMap() || !distro["name"] || !distro["ros_version"]) {
    throw Error(ErrorCode::MalformedDatabase, "distro index must contain distro: {name, ros_version, packages}");
  }
  DistroIndex index;
  try {
    index.distro = distro_from_string(distro["name"].as<std::string>());
    index.ros_version = distro["ros_version"].as<int>();
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::MalformedDatabase, std::string("distro index: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::MalformedDatabase, std::string("distro index: ") + e.what());
  }
  if (index.ros_version != ros_version_of(index.distro)) {
    throw Error(ErrorCode::MalformedDatabase, "distro index: " + std::string(to_string(index.distro)) +
                                                  " requires ros_version " +
                                                  std::to_string(ros_version_of(index.distro)));
  }
  if (YAML::Node packages = distro["packages"]; packages && !packages.IsNull()) {
    if (!packages.IsSequence()) throw Error(ErrorCode::MalformedDatabase, "distro index: packages must be a list");
    for (const auto& p : packages) index.packages.insert(p.as<std::string>());
  }
  return index;
}

std::string ros_package_name(Distro distro, std::string_view key) {
  std::string name = "ros-" + std::string(to_string(distro)) + "-";
  for (char c : key) name += (c == '_') ? '-' : c;
  return name;
}

namespace {

void sort_unique(std::vector<std::string>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

ResolvedDependencies resolve(const DeclaredKeys& keys, const ResolverContext& ctx, Scope scope) {
  std::set<std::string> wanted = keys.exec;
  if (scope == Scope::all) wanted.insert(keys.build.begin(), keys.build.end());

  ResolvedDependencies r;
  r.scope = scope;
  std::map<std::string, sources::RepoSpec> used_repos;
  for (const auto& key : wanted) {
    Bucket bucket = Bucket::unresolved;
    if (ctx.internal.contains(key)) {
      bucket = Bucket::internal;
      r.internal.insert(key);
    } else if (auto repo = ctx.repo_keys.find(key); repo != ctx.repo_keys.end()) {
      bucket = Bucket::source;
      used_repos.emplace(repo->second.local_name, repo->second);
    } else if (ctx.index.packages.contains(key)) {
      bucket = Bucket::ros_distro;
      r.ros_distro_pkgs.push_back(ros_package_name(ctx.index.distro, key));
    } else if (auto entry = ctx.db.entries.find(key); entry != ctx.db.entries.end()) {
      auto& target = entry->second.kind == RosdepRecord::Kind::system ? r.system_pkgs : r.python_pkgs;
      bucket = entry->second.kind == RosdepRecord::Kind::system ? Bucket::system : Bucket::python;
      target.insert(target.end(), entry->second.packages.begin(), entry->second.packages.end());
    } else {
      r.unresolved.push_back(key);
    }
    r.origin.emplace(key, bucket);
  }
  sort_unique(r.ros_distro_pkgs);
  sort_unique(r.system_pkgs);
  sort_unique(r.python_pkgs);
  sort_unique(r.unresolved);
  for (auto& [_, repo] : used_repos) r.source_repos.push_back(std::move(repo));
  return r;
}

ResolvedDependencies runtime_subset(const ResolvedDependencies& all_scope, const DeclaredKeys& keys,
                                    const ResolverContext& ctx) {
  ResolvedDependencies exec = resolve(keys, ctx, Scope::exec_only);
  auto subset = [](const std::vector<std::string>& small, const std::vector<std::string>& big) {
    return std::includes(big.begin(), big.end(), small.begin(), small.end());
  };
  if (!subset(exec.ros_distro_pkgs, all_scope.ros_distro_pkgs) || !subset(exec.system_pkgs, all_scope.system_pkgs) ||
      !subset(exec.python_pkgs, all_scope.python_pkgs) || !subset(exec.unresolved, all_scope.unresolved) ||
      !std::includes(all_scope.internal.begin(), all_scope.internal.end(), exec.internal.begin(),
                     exec.internal.end())) {
    throw Error(ErrorCode::Internal, "exec-scope resolution is not a subset of the all-scope resolution; "
                                     "were both computed from the same inputs?");
  }
  return exec;
}

std::map<std::string, sources::RepoSpec> repo_key_map(const sources::ReposList& repos) {
  std::map<std::string, sources::RepoSpec> keys;
  for (const auto& repo : repos) {
    for (const auto& key : sources::provided_keys(repo)) keys.emplace(key, repo);
  }
  return keys;
}

}  // namespace forge::depgraph
