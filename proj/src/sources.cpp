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

#include "forge/sources.hpp"

#include <algorithm>
#include <regex>

#include <yaml-cpp/yaml.h>

#include "forge/error.hpp"

namespace forge::sources {

namespace fs = std::filesystem;

namespace {

bool is_path_safe(std::string_view name) {
  if (name.empty() || name.front() == '/') return false;
  for (char c : name) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' || c == '/')) return false;
  }
  for (const auto& part : fs::path(name)) {
    if (part == ".." || part == ".") return false;
  }
  return true;
}

std::string scalar_field(const YAML::Node& entry, const std::string& repo, const char* field, bool required) {
  YAML::Node node = entry[field];
  if (!node || node.IsNull()) {
    if (required) throw Error(ErrorCode::MalformedReposFile, "repository '" + repo + "' lacks '" + field + "'");
    return {};
  }
  if (!node.IsScalar()) {
    throw Error(ErrorCode::MalformedReposFile, "repository '" + repo + "': '" + field + "' must be a scalar");
  }
  return node.as<std::string>();
}

const std::regex& placeholder_pattern() {
  static const std::regex pattern(R"(\$\{([A-Za-z_][A-Za-z0-9_]*)\})");
  return pattern;
}

void replace_all(std::string& text, std::string_view from, std::string_view to) {
  if (from.empty()) return;
  for (auto pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size())) {
    text.replace(pos, from.size(), to);
  }
}

}  // namespace

ReposList parse_repos(std::string_view yaml_text) {
  YAML::Node doc;
  try {
    doc = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::MalformedReposFile, std::string("invalid YAML: ") + e.what());
  }
  if (!doc.IsMap()) throw Error(ErrorCode::MalformedReposFile, "top level must be a mapping");
  YAML::Node repositories = doc["repositories"];
  if (!repositories) throw Error(ErrorCode::MalformedReposFile, "missing 'repositories' key");
  if (repositories.IsNull()) return {};
  if (!repositories.IsMap()) throw Error(ErrorCode::MalformedReposFile, "'repositories' must be a mapping");

  ReposList repos;
  std::set<std::string> seen;
  for (const auto& item : repositories) {
    auto name = item.first.as<std::string>();
    if (!is_path_safe(name)) throw Error(ErrorCode::MalformedReposFile, "unsafe repository path '" + name + "'");
    if (!seen.insert(name).second) throw Error(ErrorCode::MalformedReposFile, "duplicate repository '" + name + "'");
    if (!item.second.IsMap()) throw Error(ErrorCode::MalformedReposFile, "repository '" + name + "' must be a mapping");

    std::string type = scalar_field(item.second, name, "type", true);
    if (type != "git") {
      throw Error(ErrorCode::UnsupportedVcsType, "repository '" + name + "' has unsupported type '" + type + "'");
    }
    RepoSpec spec;
    spec.local_name = name;
    spec.url = scalar_field(item.second, name, "url", true);
    if (spec.url.empty()) throw Error(ErrorCode::MalformedReposFile, "repository '" + name + "' has an empty url");
    spec.version = scalar_field(item.second, name, "version", false);
    repos.push_back(std::move(spec));
  }
  std::sort(repos.begin(), repos.end(), [](const auto& a, const auto& b) { return a.local_name < b.local_name; });
  return repos;
}

std::string render_repos(const ReposList& repos) {
  YAML::Emitter out;
  out << YAML::BeginMap << YAML::Key << "repositories" << YAML::Value;
  if (repos.empty()) {
    out << YAML::Flow << YAML::BeginMap << YAML::EndMap;
  } else {
    out << YAML::BeginMap;
    for (const auto& repo : repos) {
      out << YAML::Key << repo.local_name << YAML::Value << YAML::BeginMap;
      out << YAML::Key << "type" << YAML::Value << "git";
      out << YAML::Key << "url" << YAML::Value << YAML::DoubleQuoted << repo.url;
      if (!repo.version.empty()) out << YAML::Key << "version" << YAML::Value << YAML::DoubleQuoted << repo.version;
      out << YAML::EndMap;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

ReposList merge_repos(const std::vector<ReposList>& lists) {
  std::map<std::string, RepoSpec> merged;
  for (const auto& list : lists) {
    for (const auto& repo : list) {
      auto [it, inserted] = merged.emplace(repo.local_name, repo);
      if (!inserted && !(it->second == repo)) {
        throw Error(ErrorCode::MalformedReposFile,
                    "repository '" + repo.local_name + "' is declared twice with different settings");
      }
    }
  }
  ReposList out;
  for (auto& [_, repo] : merged) out.push_back(std::move(repo));
  return out;
}

std::vector<std::string> placeholders(std::string_view url) {
  std::vector<std::string> names;
  std::string text(url);
  for (std::sregex_iterator it(text.begin(), text.end(), placeholder_pattern()), end; it != end; ++it) {
    std::string name = (*it)[1].str();
    if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
  }
  return names;
}

std::string redact_url(std::string_view url, const std::map<std::string, std::string>& credential_env) {
  std::string text = std::regex_replace(std::string(url), placeholder_pattern(), "***");

  auto scheme = text.find("://");
  if (scheme != std::string::npos) {
    auto authority_begin = scheme + 3;
    auto authority_end = text.find('/', authority_begin);
    auto at = text.rfind('@', authority_end == std::string::npos ? std::string::npos : authority_end);
    if (at != std::string::npos && at >= authority_begin) {
      text.replace(authority_begin, at - authority_begin, "***");
    }
  }
  for (const auto& [_, value] : credential_env) replace_all(text, value, "***");
  return text;
}

ClonePlan clone_plan(const ReposList& repos, const std::map<std::string, std::string>& credential_env,
                     const fs::path& source_dir) {
  ClonePlan plan;
  for (const auto& repo : repos) {
    std::string url = repo.url;
    for (const auto& name : placeholders(repo.url)) {
      auto value = credential_env.find(name);
      if (value == credential_env.end()) {
        throw Error(ErrorCode::MissingCredential,
                    "repository '" + repo.local_name + "' references unset credential variable '" + name + "'");
      }
      replace_all(url, "${" + name + "}", value->second);
    }
    plan.steps.push_back(CloneStep{repo, source_dir / repo.local_name, url, redact_url(repo.url, credential_env)});
  }
  return plan;
}

std::set<std::string> provided_keys(const RepoSpec& repo) {
  std::string last = fs::path(repo.local_name).filename().string();
  std::replace(last.begin(), last.end(), '-', '_');
  return {last};
}

std::vector<fs::path> find_repos_files(const fs::path& root) {
  std::vector<fs::path> files;
  for (auto it = fs::recursive_directory_iterator(root, fs::directory_options::skip_permission_denied);
       it != fs::recursive_directory_iterator(); ++it) {
    const auto& path = it->path();
    if (it->is_directory()) {
      if (path.filename().string().starts_with(".") || fs::exists(path / "COLCON_IGNORE") ||
          fs::exists(path / "CATKIN_IGNORE")) {
        it.disable_recursion_pending();
      }
      continue;
    }
    if (it->is_regular_file() && path.extension() == ".repos") files.push_back(fs::relative(path, root));
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace forge::sources
