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
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "forge/error.hpp"
#include "forge/platform.hpp"
#include "forge/run_invocation.hpp"

namespace forge::engine {

enum class Verb { build, run, exec, push, tag, inspect, manifest_merge, remove };

std::string_view to_string(Verb verb);

/// One engine CLI call. `argv` starts at the engine subcommand; the engine
/// binary itself is supplied by the driver.
struct EngineCommand {
  Verb verb = Verb::run;
  std::vector<std::string> argv;
  std::string description;
  /// Interactive commands inherit the terminal instead of being captured.
  bool attach_stdio = false;

  bool operator==(const EngineCommand&) const = default;
};

struct EngineResult {
  int exit_code = 0;
  std::string stdout_text;
  std::string stderr_text;
};

struct ContainerState {
  bool exists = false;
  bool running = false;
  std::string name;
  bool operator==(const ContainerState&) const = default;
};

class NonZeroExit : public Error {
 public:
  NonZeroExit(const EngineCommand& command, EngineResult result);
  const EngineResult& result() const noexcept { return result_; }

 private:
  EngineResult result_;
};

/// The only place engine side effects happen.
class Driver {
 public:
  virtual ~Driver() = default;
  /// Captured commands throw NonZeroExit on failure; attached commands return
  /// the exit code of the engine process.
  virtual EngineResult execute(const EngineCommand& command) = 0;
};

/// Runs the engine CLI as a subprocess. Engine environment variables such as
/// DOCKER_HOST reach it by inheritance.
class ProcessDriver : public Driver {
 public:
  explicit ProcessDriver(std::string binary = "docker");
  EngineResult execute(const EngineCommand& command) override;
  const std::string& binary() const noexcept { return binary_; }

 private:
  std::string binary_;
};

/// Prints each command instead of running it. Inspections report "no such
/// container" so attach decisions fall through to a fresh run.
class DryRunDriver : public Driver {
 public:
  DryRunDriver(std::ostream& out, std::string binary = "docker") : out_(out), binary_(std::move(binary)) {}
  EngineResult execute(const EngineCommand& command) override;

 private:
  std::ostream& out_;
  std::string binary_;
};

struct BuildRequest {
  std::filesystem::path context;
  std::filesystem::path dockerfile_path;
  std::string target;
  std::vector<std::string> tags;
  std::vector<Platform> platforms{Platform::amd64};
  std::map<std::string, std::string> build_args;
  /// Build secrets read from environment variables of the same name.
  std::vector<std::string> secrets;
  bool push = false;
};

EngineCommand build_argv(const BuildRequest& request);
EngineCommand run_argv(const devrun::RunInvocation& inv);
EngineCommand exec_argv(const std::string& container, const std::optional<devrun::UserMap>& user, bool tty,
                        const std::vector<std::string>& shell = {"bash"});
EngineCommand remove_argv(const std::string& container);
EngineCommand inspect_argv(const std::string& container);
EngineCommand push_argv(const std::string& tag);
EngineCommand tag_argv(const std::string& source, const std::string& target);
/// Creates (or re-points) `target` as a manifest list over `sources`.
EngineCommand manifest_merge_argv(const std::string& target, const std::vector<std::string>& sources);

/// Space-joined argv with shell quoting, prefixed by the engine binary.
std::string shell_form(const EngineCommand& command, std::string_view binary = "docker");

/// Parses `inspect` JSON (an array of objects carrying `State.Running`).
ContainerState parse_inspect_output(std::string_view json_text, const std::string& name);

ContainerState inspect_container(Driver& driver, const std::string& name);

/// Executes with one retry of push-class commands failing for network reasons.
EngineResult execute_with_retry(Driver& driver, const EngineCommand& command);

bool is_transient_failure(std::string_view stderr_text);

/// First `-t` value of a build command, or the verb-specific target tag.
std::string primary_tag(const EngineCommand& command);

struct Outcome {
  EngineCommand command;
  std::optional<EngineResult> result;
  std::string error;  // empty on success
};

/// Executes `commands` with at most `parallelism` in flight. Commands sharing a
/// primary tag never overlap. Outcomes keep input order.
std::vector<Outcome> execute_bounded(Driver& driver, const std::vector<EngineCommand>& commands,
                                     std::size_t parallelism = 2);

}  // namespace forge::engine
