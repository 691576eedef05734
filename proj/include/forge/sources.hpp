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
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace forge::sources {

enum class VcsType { git };

struct RepoSpec {
  std::string local_name;
  VcsType vcs_type = VcsType::git;
  std::string url;  // may contain ${VAR} placeholders
  std::string version;

  bool operator==(const RepoSpec&) const = default;
};

/// Sorted by local_name.
using ReposList = std::vector<RepoSpec>;

struct CloneStep {
  RepoSpec repo;
  std::filesystem::path destination;
  std::string url;           // placeholders substituted
  std::string redacted_url;  // safe for logs
};

struct ClonePlan {
  std::vector<CloneStep> steps;
};

/// Parses a vcstool `.repos` document (`repositories:` map of
/// `{type, url, version}`). Only git repositories are accepted.
ReposList parse_repos(std::string_view yaml_text);

/// Canonical `.repos` text for `repos`.
std::string render_repos(const ReposList& repos);

/// Merges several lists; a local_name defined twice with different content
/// is a MalformedReposFile error.
ReposList merge_repos(const std::vector<ReposList>& lists);

/// Names of the `${VAR}` placeholders in `url`, in order of first use.
std::vector<std::string> placeholders(std::string_view url);

/// Substitutes credentials into every url and computes a redacted form.
/// Throws MissingCredential naming the first absent variable.
ClonePlan clone_plan(const ReposList& repos, const std::map<std::string, std::string>& credential_env,
                     const std::filesystem::path& source_dir = "/ws/src");

/// Replaces placeholders and URL userinfo with `***` and masks any literal
/// occurrence of a credential value.
std::string redact_url(std::string_view url, const std::map<std::string, std::string>& credential_env = {});

/// Dependency keys a repository is taken to provide: the last path segment of
/// its local_name, with dashes normalized to underscores.
std::set<std::string> provided_keys(const RepoSpec& repo);

/// All `*.repos` files under `root`, relative to it and sorted, skipping
/// ignored subtrees.
std::vector<std::filesystem::path> find_repos_files(const std::filesystem::path& root);

}  // namespace forge::sources
