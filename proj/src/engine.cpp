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

#include "forge/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <memory>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "forge/process.hpp"

namespace forge::engine {

namespace fs = std::filesystem;

std::string_view to_string(Verb verb) {
  switch (verb) {
    case Verb::build: return "build";
    case Verb::run: return "run";
    case Verb::exec: return "exec";
    case Verb::push: return "push";
    case Verb::tag: return "tag";
    case Verb::inspect: return "inspect";
    case Verb::manifest_merge: return "manifest-merge";
    case Verb::remove: return "remove";
  }
  return "unknown";
}

NonZeroExit::NonZeroExit(const EngineCommand& command, EngineResult result)
    : Error(ErrorCode::NonZeroExit,
            std::string(to_string(command.verb)) + " failed with exit code " + std::to_string(result.exit_code) +
                (result.stderr_text.empty() ? "" : ": " + result.stderr_text)),
      result_(std::move(result)) {}

namespace {

std::string quote(std::string_view token) {
  bool plain = !token.empty() && std::all_of(token.begin(), token.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || std::string_view("_./:@%+=,-").find(c) != std::string_view::npos;
  });
  if (plain) return std::string(token);
  std::string out = "'";
  for (char c : token) out += (c == '\'') ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

void check_tokens(const EngineCommand& command) {
  if (command.argv.empty()) throw Error(ErrorCode::Internal, "engine command without arguments");
  for (const auto& token : command.argv) {
    if (token.empty()) {
      throw Error(ErrorCode::InvalidRequest, std::string(to_string(command.verb)) + ": empty argument in engine command");
    }
  }
}

std::string trim_right(std::string text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
  return text;
}

}  // namespace

std::string shell_form(const EngineCommand& command, std::string_view binary) {
  std::string out(binary);
  for (const auto& token : command.argv) out += " " + quote(token);
  return out;
}

ProcessDriver::ProcessDriver(std::string binary) : binary_(std::move(binary)) {}

EngineResult ProcessDriver::execute(const EngineCommand& command) {
  check_tokens(command);
  std::string executable = find_executable(binary_);
  if (executable.empty()) {
    throw Error(ErrorCode::EngineUnavailable,
                "container engine '" + binary_ +
                    "' not found on PATH; install Docker (or set FORGE_ENGINE to another engine CLI), "
                    "or re-run with --dry-run to print the commands instead");
  }
  if (command.attach_stdio) return EngineResult{run_attached(executable, command.argv), {}, {}};
  ProcessResult r = run_captured(executable, command.argv);
  EngineResult result{r.exit_code, std::move(r.stdout_text), trim_right(std::move(r.stderr_text))};
  if (result.exit_code != 0) throw NonZeroExit(command, std::move(result));
  return result;
}

EngineResult DryRunDriver::execute(const EngineCommand& command) {
  check_tokens(command);
  out_ << shell_form(command, binary_) << "\n";
  if (command.verb == Verb::inspect) {
    throw NonZeroExit(command, EngineResult{1, {}, "dry run: container state unknown"});
  }
  return {};
}

EngineCommand build_argv(const BuildRequest& request) {
  if (request.tags.empty()) throw Error(ErrorCode::InvalidRequest, "build request needs at least one tag");
  if (request.platforms.empty()) throw Error(ErrorCode::InvalidRequest, "build request needs at least one platform");
  if (request.target.empty()) throw Error(ErrorCode::InvalidRequest, "build request needs a target stage");
  if (request.context.empty() || !fs::is_directory(request.context)) {
    throw Error(ErrorCode::InvalidRequest, "build context '" + request.context.string() + "' is not a directory");
  }
  bool multi = request.platforms.size() > 1;
  if (multi && !request.push) {
    throw Error(ErrorCode::InvalidRequest, "multi-platform builds cannot be loaded locally; add --push");
  }

  EngineCommand cmd;
  cmd.verb = Verb::build;
  if (multi) cmd.argv.push_back("buildx");
  cmd.argv.push_back("build");
  if (!request.dockerfile_path.empty()) {
    cmd.argv.push_back("--file");
    cmd.argv.push_back(request.dockerfile_path.string());
  }
  cmd.argv.push_back("--target");
  cmd.argv.push_back(request.target);
  std::string platforms;
  for (Platform p : request.platforms) platforms += (platforms.empty() ? "" : ",") + engine_platform(p);
  cmd.argv.push_back("--platform");
  cmd.argv.push_back(platforms);
  for (const auto& tag : request.tags) {
    cmd.argv.push_back("-t");
    cmd.argv.push_back(tag);
  }
  for (const auto& [name, value] : request.build_args) {
    cmd.argv.push_back("--build-arg");
    cmd.argv.push_back(name + "=" + value);
  }
  std::vector<std::string> secrets = request.secrets;
  std::sort(secrets.begin(), secrets.end());
  secrets.erase(std::unique(secrets.begin(), secrets.end()), secrets.end());
  for (const auto& secret : secrets) {
    cmd.argv.push_back("--secret");
    cmd.argv.push_back("id=" + secret + ",env=" + secret);
  }
  if (multi) cmd.argv.push_back("--push");
  cmd.argv.push_back(request.context.string());
  cmd.description = "build target '" + request.target + "' as " + request.tags.front();
  check_tokens(cmd);
  return cmd;
}

EngineCommand run_argv(const devrun::RunInvocation& inv) {
  EngineCommand cmd;
  cmd.verb = Verb::run;
  cmd.attach_stdio = true;
  cmd.argv.push_back("run");
  if (inv.remove_on_exit) cmd.argv.push_back("--rm");
  cmd.argv.push_back(inv.interactive_tty ? "-it" : "-i");
  if (inv.name) {
    cmd.argv.push_back("--name");
    cmd.argv.push_back(*inv.name);
  }
  for (const auto& [key, value] : inv.env) {
    cmd.argv.push_back("--env");
    cmd.argv.push_back(key + "=" + value);
  }
  for (const auto& mount : inv.mounts) {
    cmd.argv.push_back("--volume");
    cmd.argv.push_back(mount.host_path + ":" + mount.container_path + ":" +
                       (mount.mode == devrun::MountMode::rw ? "rw" : "ro"));
  }
  if (inv.gpu_all) {
    cmd.argv.push_back("--gpus");
    cmd.argv.push_back("all");
  }
  if (inv.user_map) {
    cmd.argv.push_back("--user");
    cmd.argv.push_back(std::to_string(inv.user_map->uid) + ":" + std::to_string(inv.user_map->gid));
  }
  if (inv.workdir) {
    cmd.argv.push_back("--workdir");
    cmd.argv.push_back(*inv.workdir);
  }
  cmd.argv.insert(cmd.argv.end(), inv.passthrough.begin(), inv.passthrough.end());
  cmd.argv.push_back(inv.image);
  cmd.argv.insert(cmd.argv.end(), inv.command.begin(), inv.command.end());
  cmd.description = "run " + inv.image + (inv.name ? " as " + *inv.name : "");
  return cmd;
}

EngineCommand exec_argv(const std::string& container, const std::optional<devrun::UserMap>& user, bool tty,
                        const std::vector<std::string>& shell) {
  EngineCommand cmd{Verb::exec, {"exec", tty ? "-it" : "-i"}, "attach to " + container, true};
  if (user) {
    cmd.argv.push_back("--user");
    cmd.argv.push_back(std::to_string(user->uid) + ":" + std::to_string(user->gid));
  }
  cmd.argv.push_back(container);
  cmd.argv.insert(cmd.argv.end(), shell.begin(), shell.end());
  return cmd;
}

EngineCommand remove_argv(const std::string& container) {
  return {Verb::remove, {"rm", "--force", container}, "remove stale container " + container, false};
}

EngineCommand inspect_argv(const std::string& container) {
  return {Verb::inspect, {"inspect", "--type", "container", container}, "inspect " + container, false};
}

EngineCommand push_argv(const std::string& tag) { return {Verb::push, {"push", tag}, "push " + tag, false}; }

EngineCommand tag_argv(const std::string& source, const std::string& target) {
  return {Verb::tag, {"tag", source, target}, "tag " + source + " as " + target, false};
}

EngineCommand manifest_merge_argv(const std::string& target, const std::vector<std::string>& sources) {
  if (sources.empty()) throw Error(ErrorCode::InvalidRequest, "manifest merge needs at least one source");
  EngineCommand cmd{Verb::manifest_merge, {"buildx", "imagetools", "create", "--tag", target}, "", false};
  cmd.argv.insert(cmd.argv.end(), sources.begin(), sources.end());
  cmd.description = "publish " + target + " from " + std::to_string(sources.size()) + " source(s)";
  check_tokens(cmd);
  return cmd;
}

ContainerState parse_inspect_output(std::string_view json_text, const std::string& name) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedEngineOutput, std::string("inspect output is not JSON: ") + e.what());
  }
  if (doc.is_object()) doc = nlohmann::json::array({doc});
  if (!doc.is_array()) throw Error(ErrorCode::MalformedEngineOutput, "inspect output must be a JSON array");
  if (doc.empty()) return ContainerState{false, false, name};
  const auto& first = doc.front();
  if (!first.is_object() || !first.contains("State") || !first["State"].is_object() ||
      !first["State"].contains("Running") || !first["State"]["Running"].is_boolean()) {
    throw Error(ErrorCode::MalformedEngineOutput, "inspect output lacks a boolean State.Running");
  }
  return ContainerState{true, first["State"]["Running"].get<bool>(), name};
}

ContainerState inspect_container(Driver& driver, const std::string& name) {
  try {
    EngineResult result = driver.execute(inspect_argv(name));
    return parse_inspect_output(result.stdout_text, name);
  } catch (const NonZeroExit&) {
    return ContainerState{false, false, name};
  }
}

bool is_transient_failure(std::string_view stderr_text) {
  std::string text(stderr_text);
  std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) { return std::tolower(c); });
  static const std::vector<std::string_view> markers{
      "i/o timeout",          "connection reset",     "connection refused", "tls handshake timeout",
      "unexpected eof",       "503 service unavailable", "502 bad gateway", "504 gateway timeout",
      "temporary failure in name resolution", "broken pipe", "net/http: request canceled"};
  return std::any_of(markers.begin(), markers.end(),
                     [&](std::string_view m) { return text.find(m) != std::string::npos; });
}

EngineResult execute_with_retry(Driver& driver, const EngineCommand& command) {
  bool retryable = command.verb == Verb::push || command.verb == Verb::manifest_merge;
  try {
    return driver.execute(command);
  } catch (const NonZeroExit& e) {
    if (!retryable || !is_transient_failure(e.result().stderr_text)) throw;
  }
  return driver.execute(command);
}

std::string primary_tag(const EngineCommand& command) {
  const auto& argv = command.argv;
  for (std::size_t i = 0; i + 1 < argv.size(); ++i) {
    if (argv[i] == "-t" || argv[i] == "--tag") return argv[i + 1];
  }
  if (command.verb == Verb::push && argv.size() >= 2) return argv[1];
  if (command.verb == Verb::tag && argv.size() >= 3) return argv[2];
  return {};
}

std::vector<Outcome> execute_bounded(Driver& driver, const std::vector<EngineCommand>& commands,
                                     std::size_t parallelism) {
  if (parallelism == 0) throw Error(ErrorCode::InvalidArgs, "parallelism must be at least 1");
  std::vector<Outcome> outcomes;
  outcomes.reserve(commands.size());
  for (const auto& c : commands) outcomes.push_back(Outcome{c, std::nullopt, {}});

  std::map<std::string, std::unique_ptr<std::mutex>> tag_locks;
  for (const auto& c : commands) {
    auto& lock = tag_locks[primary_tag(c)];
    if (!lock) lock = std::make_unique<std::mutex>();
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < commands.size(); i = next++) {
      std::string tag = primary_tag(commands[i]);
      // Untagged commands are independent of each other.
      std::unique_lock<std::mutex> guard;
      if (!tag.empty()) guard = std::unique_lock<std::mutex>(*tag_locks.at(tag));
      try {
        outcomes[i].result = execute_with_retry(driver, commands[i]);
      } catch (const std::exception& e) {
        outcomes[i].error = e.what();
      }
    }
  };
  {
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < std::min(parallelism, commands.size()); ++w) workers.emplace_back(worker);
  }
  return outcomes;
}

}  // namespace forge::engine
