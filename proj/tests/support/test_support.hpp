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

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "forge/depgraph.hpp"
#include "forge/engine.hpp"
#include "forge/manifest.hpp"
#include "forge/sources.hpp"

namespace forge::testing {

namespace fs = std::filesystem;

inline fs::path fixtures_dir() { return fs::path(FORGE_TEST_FIXTURES); }
inline fs::path workspace_fixture(const std::string& name) { return fixtures_dir() / "workspaces" / name; }
inline fs::path data_dir() { return fs::path(FORGE_TEST_DATA); }
inline fs::path golden_dir() { return fs::path(FORGE_TEST_GOLDEN); }

inline std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Removes itself on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("forge-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }

  fs::path write(const fs::path& relative, const std::string& content) const {
    fs::path target = path_ / relative;
    fs::create_directories(target.parent_path());
    std::ofstream(target, std::ios::binary) << content;
    return target;
  }

 private:
  fs::path path_;
};

inline std::string manifest_xml(const std::string& name, const std::string& body = {}, int format = 3) {
  return "<?xml version=\"1.0\"?>\n<package format=\"" + std::to_string(format) + "\">\n  <name>" + name +
         "</name>\n  <version>1.0.0</version>\n" + body + "</package>\n";
}

// Resolution of a fixture workspace against the bundled data files.
struct Resolved {
  manifest::Workspace ws;
  sources::ReposList repos;
  std::vector<fs::path> repos_files;
  depgraph::RosdepDatabase db;
  depgraph::DistroIndex index;
  depgraph::DeclaredKeys keys;
  depgraph::ResolvedDependencies all;
  depgraph::ResolvedDependencies exec;
};

inline Resolved resolve_workspace(const fs::path& root, depgraph::Distro distro) {
  Resolved r;
  manifest::ConditionEnv env{depgraph::ros_version_of(distro), std::string(depgraph::to_string(distro))};
  r.ws = manifest::scan_workspace(root, env);
  r.repos_files = sources::find_repos_files(root);
  std::vector<sources::ReposList> lists;
  for (const auto& f : r.repos_files) lists.push_back(sources::parse_repos(slurp(root / f)));
  r.repos = sources::merge_repos(lists);
  r.db = depgraph::load_rosdep_db({slurp(data_dir() / "rosdep" / "base.yaml")});
  r.index = depgraph::load_distro_index(
      slurp(data_dir() / "distros" / (std::string(depgraph::to_string(distro)) + ".yaml")));
  r.keys = depgraph::declared_keys(r.ws);
  depgraph::ResolverContext ctx{r.db, r.index, manifest::internal_package_names(r.ws),
                                depgraph::repo_key_map(r.repos)};
  r.all = depgraph::resolve(r.keys, ctx, depgraph::Scope::all);
  r.exec = depgraph::runtime_subset(r.all, r.keys, ctx);
  return r;
}

// Records every command; optional scripted responses and latency.
class FakeDriver : public engine::Driver {
 public:
  using Handler = std::function<engine::EngineResult(const engine::EngineCommand&)>;

  engine::EngineResult execute(const engine::EngineCommand& command) override {
    int now = ++in_flight_;
    {
      std::lock_guard lock(mutex_);
      max_in_flight_ = std::max(max_in_flight_, now);
      std::string tag = engine::primary_tag(command);
      if (!tag.empty() && !active_tags_.insert(tag).second) tag_overlap_ = true;
      commands_.push_back(command);
    }
    if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
    engine::EngineResult result;
    std::exception_ptr failure;
    try {
      Handler handler;
      {
        std::lock_guard lock(mutex_);
        handler = handler_;
      }
      if (handler) result = handler(command);
    } catch (...) {
      failure = std::current_exception();
    }
    {
      std::lock_guard lock(mutex_);
      active_tags_.erase(engine::primary_tag(command));
    }
    --in_flight_;
    if (failure) std::rethrow_exception(failure);
    if (result.exit_code != 0 && !command.attach_stdio) throw engine::NonZeroExit(command, result);
    return result;
  }

  void on_execute(Handler handler) {
    std::lock_guard lock(mutex_);
    handler_ = std::move(handler);
  }
  void set_delay(std::chrono::milliseconds delay) { delay_ = delay; }

  std::vector<engine::EngineCommand> commands() const {
    std::lock_guard lock(mutex_);
    return commands_;
  }
  std::vector<engine::Verb> verbs() const {
    std::vector<engine::Verb> v;
    for (const auto& c : commands()) v.push_back(c.verb);
    return v;
  }
  int max_in_flight() const {
    std::lock_guard lock(mutex_);
    return max_in_flight_;
  }
  bool tag_overlap() const {
    std::lock_guard lock(mutex_);
    return tag_overlap_;
  }

 private:
  mutable std::mutex mutex_;
  Handler handler_;
  std::vector<engine::EngineCommand> commands_;
  std::set<std::string> active_tags_;
  std::atomic<int> in_flight_{0};
  int max_in_flight_ = 0;
  bool tag_overlap_ = false;
  std::chrono::milliseconds delay_{0};
};

// Canonical package.xml writer for the supported element subset.
inline std::string serialize_manifest(const manifest::PackageManifest& m) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\"?>\n<package format=\"" << m.manifest_format << "\">\n";
  out << "  <name>" << m.name << "</name>\n  <version>" << m.version << "</version>\n";
  for (const auto& d : m.deps_build) {
    if (!m.deps_exec.contains(d)) out << "  <build_depend>" << d << "</build_depend>\n";
  }
  for (const auto& d : m.deps_exec) {
    out << (m.deps_build.contains(d) ? "  <depend>" : "  <exec_depend>") << d
        << (m.deps_build.contains(d) ? "</depend>\n" : "</exec_depend>\n");
  }
  for (const auto& d : m.deps_test) out << "  <test_depend>" << d << "</test_depend>\n";
  out << "  <export>\n    <build_type>" << manifest::to_string(m.build_type) << "</build_type>\n  </export>\n";
  out << "</package>\n";
  return out.str();
}

}  // namespace forge::testing
