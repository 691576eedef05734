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

#include "forge/cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <boost/tokenizer.hpp>
#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "forge/cigen.hpp"
#include "forge/config.hpp"
#include "forge/depgraph.hpp"
#include "forge/devrun.hpp"
#include "forge/dockergen.hpp"
#include "forge/error.hpp"
#include "forge/manifest.hpp"
#include "forge/matrix.hpp"
#include "forge/sources.hpp"
#include "forge/version.hpp"

namespace forge::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgs, "cannot read '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_output(const std::string& text, const std::string& path, std::ostream& out) {
  if (path == "-") {
    out << text;
    return;
  }
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  std::ofstream file(target, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::InvalidArgs, "cannot write '" + path + "'");
  file << text;
}

std::vector<std::string> split_command(const std::string& text) {
  boost::escaped_list_separator<char> separator('\\', ' ', '"');
  boost::tokenizer<boost::escaped_list_separator<char>> tokens(text, separator);
  std::vector<std::string> argv;
  try {
    for (const auto& token : tokens) {
      if (!token.empty()) argv.push_back(token);
    }
  } catch (const boost::escaped_list_error& e) {
    throw Error(ErrorCode::InvalidArgs, "cannot split command '" + text + "': " + e.what());
  }
  return argv;
}

void emit_yaml(YAML::Emitter& out, const json& value) {
  if (value.is_object()) {
    out << YAML::BeginMap;
    for (const auto& [k, v] : value.items()) {
      out << YAML::Key << k << YAML::Value;
      emit_yaml(out, v);
    }
    out << YAML::EndMap;
  } else if (value.is_array()) {
    out << YAML::BeginSeq;
    for (const auto& v : value) emit_yaml(out, v);
    out << YAML::EndSeq;
  } else if (value.is_string()) {
    out << value.get<std::string>();
  } else if (value.is_boolean()) {
    out << value.get<bool>();
  } else if (value.is_number_integer()) {
    out << value.get<long long>();
  } else if (value.is_null()) {
    out << YAML::Null;
  } else {
    out << value.dump();
  }
}

std::string to_yaml(const json& value) {
  YAML::Emitter out;
  emit_yaml(out, value);
  return std::string(out.c_str()) + "\n";
}

std::string image_name_for(const fs::path& ws_root) {
  std::string base = fs::absolute(ws_root).lexically_normal().filename().string();
  if (base.empty()) base = fs::absolute(ws_root).lexically_normal().parent_path().filename().string();
  std::string name;
  for (char c : base) {
    unsigned char u = static_cast<unsigned char>(c);
    name += std::isalnum(u) ? static_cast<char>(std::tolower(u)) : (c == '.' || c == '-' ? c : '_');
  }
  return name.empty() ? "forge-image" : name;
}

struct Options {
  // global
  std::string config_path;
  bool dry_run = false;
  std::string engine;
  std::string registry;
  std::optional<long> parallelism;
  bool strict = false;
  std::string distro;
  std::vector<std::string> rosdep;
  std::string distro_index;
  std::string format = "text";

  // shared by workspace commands
  std::string workspace = ".";
  std::string target = "run";
  std::string base;
  std::string command;
  std::string output;
  bool slim = false;
  std::string pre_script;
  std::string post_script;
  std::vector<std::string> extra_apt;
  std::vector<std::string> extra_pip;
  std::vector<std::string> platforms;
  std::vector<std::string> tags;
  bool push = false;
  bool run_as_user = false;
  std::string dockerfile_out;

  // generate ci
  std::string ci_platform;
  std::string image_name;
  bool enable_test = false;
  std::string branch = "main";
  std::vector<std::string> targets;
  std::string test_command;
  std::string setup_command;

  // matrix
  std::vector<std::string> m_distros;
  std::vector<std::string> m_components;
  std::vector<std::string> m_flavors;
  std::vector<std::string> m_archs;
  std::string m_plan;
  std::string m_dockerfile = "Dockerfile.base";
  std::string m_base_table;

  // manifest merge / promote
  std::string merge_tag;
  std::vector<std::string> sources;
  std::string promote_source;
  std::string promote_target;

  // bench
  std::string bench_image;
  int bench_runs = 5;
};

class Session {
 public:
  Session(Io& io, const Options& opts) : io_(io), opts_(opts) {}

  const config::GlobalConfig& config(const fs::path& workspace_hint = {}) {
    if (cfg_) return *cfg_;
    config::ConfigLayer flags;
    if (!opts_.registry.empty()) flags.registry = opts_.registry;
    if (!opts_.distro.empty()) flags.distro = opts_.distro;
    if (!opts_.rosdep.empty()) flags.rosdep_paths = std::vector<fs::path>(opts_.rosdep.begin(), opts_.rosdep.end());
    if (!opts_.distro_index.empty()) flags.distro_index_path = opts_.distro_index;
    if (opts_.parallelism) flags.parallelism = opts_.parallelism;
    if (opts_.strict) flags.strict = true;
    if (!opts_.engine.empty()) flags.engine = opts_.engine;

    config::ConfigLayer file;
    fs::path config_path = opts_.config_path;
    if (config_path.empty() && !workspace_hint.empty() && fs::is_regular_file(workspace_hint / "forge.yaml")) {
      config_path = workspace_hint / "forge.yaml";
    }
    if (!config_path.empty()) file = config::load_config_file(config_path);
    cfg_ = config::resolve_config(flags, config::layer_from_env(io_.env), file, config::data_dir(io_.env));
    if (!config_path.empty()) cfg_->config_file = config_path;
    return *cfg_;
  }

  engine::Driver& driver() {
    if (!driver_) {
      if (opts_.dry_run) {
        owned_ = std::make_unique<engine::DryRunDriver>(io_.out, config().engine);
        driver_ = owned_.get();
      } else if (io_.driver) {
        driver_ = io_.driver;
      } else {
        owned_ = std::make_unique<engine::ProcessDriver>(config().engine);
        driver_ = owned_.get();
      }
    }
    return *driver_;
  }

  Io& io() { return io_; }
  const Options& opts() const { return opts_; }

 private:
  Io& io_;
  const Options& opts_;
  std::optional<config::GlobalConfig> cfg_;
  std::unique_ptr<engine::Driver> owned_;
  engine::Driver* driver_ = nullptr;
};

struct LoadedWorkspace {
  manifest::Workspace ws;
  std::vector<fs::path> repos_files;
  sources::ReposList repos;
  depgraph::RosdepDatabase db;
  depgraph::DistroIndex index;
  depgraph::DeclaredKeys keys;
  depgraph::ResolvedDependencies all;
  depgraph::ResolvedDependencies exec;
};

LoadedWorkspace load_workspace(const fs::path& root, const config::GlobalConfig& cfg) {
  config::check_data_paths(cfg);
  LoadedWorkspace lw;
  manifest::ConditionEnv env{depgraph::ros_version_of(cfg.distro), std::string(depgraph::to_string(cfg.distro))};
  lw.ws = manifest::scan_workspace(root, env);
  lw.repos_files = sources::find_repos_files(root);
  std::vector<sources::ReposList> lists;
  for (const auto& f : lw.repos_files) {
    try {
      lists.push_back(sources::parse_repos(read_file(root / f)));
    } catch (const Error& e) {
      throw Error(e.code(), f.string() + ": " + e.what());
    }
  }
  lw.repos = sources::merge_repos(lists);

  std::vector<std::string> docs;
  for (const auto& p : cfg.rosdep_paths) docs.push_back(read_file(p));
  lw.db = depgraph::load_rosdep_db(docs);
  lw.index = depgraph::load_distro_index(read_file(cfg.distro_index_path));
  if (lw.index.distro != cfg.distro) {
    throw Error(ErrorCode::InvalidConfig, "distro index '" + cfg.distro_index_path.string() + "' describes " +
                                              std::string(depgraph::to_string(lw.index.distro)) + ", not " +
                                              std::string(depgraph::to_string(cfg.distro)));
  }
  lw.keys = depgraph::declared_keys(lw.ws);
  depgraph::ResolverContext ctx{lw.db, lw.index, manifest::internal_package_names(lw.ws),
                                depgraph::repo_key_map(lw.repos)};
  lw.all = depgraph::resolve(lw.keys, ctx, depgraph::Scope::all);
  lw.exec = depgraph::runtime_subset(lw.all, lw.keys, ctx);
  return lw;
}

json resolution_json(const depgraph::ResolvedDependencies& r) {
  json repos = json::array();
  for (const auto& repo : r.source_repos) {
    repos.push_back({{"local_name", repo.local_name}, {"url", sources::redact_url(repo.url)}, {"version", repo.version}});
  }
  json keys = json::object();
  for (const auto& [key, bucket] : r.origin) keys[key] = std::string(depgraph::to_string(bucket));
  return json{{"internal", r.internal},        {"ros_distro_pkgs", r.ros_distro_pkgs},
              {"system_pkgs", r.system_pkgs},  {"python_pkgs", r.python_pkgs},
              {"source_repos", repos},         {"unresolved", r.unresolved},
              {"keys", keys}};
}

std::string resolves_to(const std::string& key, depgraph::Bucket bucket, const LoadedWorkspace& lw) {
  switch (bucket) {
    case depgraph::Bucket::internal: return "(workspace package)";
    case depgraph::Bucket::ros_distro: return depgraph::ros_package_name(lw.index.distro, key);
    case depgraph::Bucket::system:
    case depgraph::Bucket::python: {
      std::string joined;
      for (const auto& p : lw.db.entries.at(key).packages) joined += (joined.empty() ? "" : " ") + p;
      return joined;
    }
    case depgraph::Bucket::source:
      for (const auto& repo : lw.repos) {
        if (sources::provided_keys(repo).contains(key)) return "clone " + repo.local_name;
      }
      return "clone";
    case depgraph::Bucket::unresolved: return "-";
  }
  return "-";
}

int cmd_analyze(Session& s) {
  fs::path root = s.opts().workspace;
  const auto& cfg = s.config(root);
  LoadedWorkspace lw = load_workspace(root, cfg);
  auto& out = s.io().out;

  if (s.opts().format == "json" || s.opts().format == "yaml") {
    std::vector<std::string> names;
    for (const auto& p : lw.ws.packages) names.push_back(p.name);
    json doc{{"workspace", root.string()},
             {"distro", std::string(depgraph::to_string(cfg.distro))},
             {"packages", names},
             {"all", resolution_json(lw.all)},
             {"exec_only", resolution_json(lw.exec)}};
    out << (s.opts().format == "json" ? doc.dump(2) + "\n" : to_yaml(doc));
  } else {
    std::size_t width = 3;
    for (const auto& [key, _] : lw.all.origin) width = std::max(width, key.size());
    out << std::left << std::setw(static_cast<int>(width) + 2) << "KEY" << std::setw(12) << "BUCKET"
        << std::setw(6) << "EXEC"
        << "RESOLVES TO\n";
    for (const auto& [key, bucket] : lw.all.origin) {
      out << std::left << std::setw(static_cast<int>(width) + 2) << key << std::setw(12) << depgraph::to_string(bucket)
          << std::setw(6) << (lw.exec.origin.contains(key) ? "yes" : "no") << resolves_to(key, bucket, lw) << "\n";
    }
    out << lw.ws.packages.size() << " package(s), " << lw.all.origin.size() << " dependency key(s), "
        << lw.all.unresolved.size() << " unresolved\n";
  }

  if (cfg.strict && !lw.all.unresolved.empty()) {
    std::string joined;
    for (const auto& k : lw.all.unresolved) joined += (joined.empty() ? "" : ", ") + k;
    throw Error(ErrorCode::UnresolvedDependencies, "unresolved dependency keys: " + joined);
  }
  return 0;
}

dockergen::ImageSpec image_spec(Session& s, const config::GlobalConfig& cfg, const LoadedWorkspace& lw) {
  const Options& o = s.opts();
  dockergen::ImageSpec spec;
  spec.ros_distro = cfg.distro;
  spec.target = dockergen::target_from_string(o.target);
  spec.base_image = !o.base.empty() ? o.base
                                    : cfg.base_image.value_or("ros:" + std::string(depgraph::to_string(cfg.distro)) +
                                                              "-ros-core");
  std::string command = !o.command.empty() ? o.command : cfg.command.value_or("");
  spec.launch_command = split_command(command);
  if (!o.pre_script.empty()) spec.custom_script_pre = fs::path(o.pre_script);
  if (!o.post_script.empty()) spec.custom_script_post = fs::path(o.post_script);
  spec.extra_apt = o.extra_apt;
  spec.extra_pip = o.extra_pip;
  spec.repos_files = lw.repos_files;
  if (!o.platforms.empty()) {
    spec.platforms.clear();
    for (const auto& p : o.platforms) {
      for (Platform platform : parse_platform_list(p)) {
        if (std::find(spec.platforms.begin(), spec.platforms.end(), platform) == spec.platforms.end()) {
          spec.platforms.push_back(platform);
        }
      }
    }
  }
  spec.slim_runtime = o.slim;
  spec.strict = cfg.strict;
  spec.run_as_user = o.run_as_user;
  return spec;
}

int cmd_generate_dockerfile(Session& s) {
  fs::path root = s.opts().workspace;
  const auto& cfg = s.config(root);
  LoadedWorkspace lw = load_workspace(root, cfg);
  auto spec = image_spec(s, cfg, lw);
  auto plan = dockergen::plan_stages(spec, lw.ws, lw.all, lw.exec, lw.repos);
  if (auto violations = dockergen::validate_plan(plan); !violations.empty()) {
    throw Error(ErrorCode::Internal, "generated plan violates '" + violations.front().rule + "': " +
                                         violations.front().detail);
  }
  std::string output = s.opts().output.empty() ? "Dockerfile" : s.opts().output;
  write_output(dockergen::render(plan), output, s.io().out);
  if (output != "-") s.io().err << "wrote " << output << "\n";
  return 0;
}

int cmd_generate_ci(Session& s) {
  const Options& o = s.opts();
  fs::path root = o.workspace;
  const auto& cfg = s.config(root);
  cigen::PipelineSpec spec;
  spec.platform = cigen::ci_platform_from_string(o.ci_platform);
  spec.image_name = !o.image_name.empty() ? o.image_name : cfg.image_name.value_or(image_name_for(root));
  spec.registry = cfg.registry;
  if (!o.platforms.empty()) {
    spec.platforms.clear();
    for (const auto& p : o.platforms) {
      for (Platform platform : parse_platform_list(p)) spec.platforms.push_back(platform);
    }
  }
  spec.enable_test_stage = o.enable_test;
  spec.push_on_branch = o.branch;
  spec.base_image = !o.base.empty() ? o.base : cfg.base_image.value_or("");
  if (!o.targets.empty()) {
    spec.target_stages.clear();
    for (const auto& t : o.targets) spec.target_stages.insert(dockergen::target_from_string(t));
  }
  if (!o.distro.empty()) spec.distro = o.distro;
  if (!o.command.empty()) spec.launch_command = o.command;
  if (dockergen::default_build_tool(cfg.distro) == dockergen::BuildTool::catkin) {
    spec.test_command = "catkin_make_isolated --catkin-make-args run_tests && catkin_test_results";
  }
  if (!o.test_command.empty()) spec.test_command = o.test_command;
  spec.setup_command = o.setup_command;
  if (fs::is_directory(root)) {
    std::set<std::string> vars;
    for (const auto& f : sources::find_repos_files(root)) {
      for (const auto& repo : sources::parse_repos(read_file(root / f))) {
        for (const auto& v : sources::placeholders(repo.url)) vars.insert(v);
      }
    }
    spec.credential_vars.assign(vars.begin(), vars.end());
  }
  std::string output = !o.output.empty() ? o.output : (root / cigen::default_output_path(spec.platform)).string();
  write_output(cigen::generate_pipeline(spec), output, s.io().out);
  if (output != "-") s.io().err << "wrote " << output << "\n";
  return 0;
}

int cmd_build(Session& s) {
  const Options& o = s.opts();
  fs::path root = o.workspace;
  const auto& cfg = s.config(root);
  LoadedWorkspace lw = load_workspace(root, cfg);
  auto spec = image_spec(s, cfg, lw);

  // Fails early with MissingCredential when a private repository cannot be cloned.
  auto clones = sources::clone_plan(lw.repos, s.io().env);
  for (const auto& step : clones.steps) s.io().err << "clone " << step.redacted_url << " -> " << step.destination.string() << "\n";

  auto plan = dockergen::plan_stages(spec, lw.ws, lw.all, lw.exec, lw.repos);
  if (auto violations = dockergen::validate_plan(plan); !violations.empty()) {
    throw Error(ErrorCode::Internal, "generated plan violates '" + violations.front().rule + "'");
  }
  std::string text = dockergen::render(plan);
  fs::path dockerfile = o.dockerfile_out;
  if (dockerfile.empty()) {
    std::string tag = std::to_string(std::hash<std::string>{}(fs::absolute(root).string()));
    dockerfile = fs::temp_directory_path() / ("forge-" + tag) / ("Dockerfile." + std::string(dockergen::to_string(spec.target)));
  }
  write_output(text, dockerfile.string(), s.io().out);

  engine::BuildRequest request;
  request.context = root;
  request.dockerfile_path = dockerfile;
  request.target = std::string(dockergen::to_string(spec.target));
  request.tags = o.tags;
  if (request.tags.empty()) {
    std::string repo = cfg.image_name.value_or(image_name_for(root));
    if (!cfg.registry.empty()) repo = cfg.registry + "/" + repo;
    request.tags.push_back(repo + (spec.target == dockergen::Target::run ? ":latest" : ":latest-dev"));
  }
  request.platforms = spec.platforms;
  for (const auto& repo : lw.repos) {
    for (const auto& var : sources::placeholders(repo.url)) request.secrets.push_back(var);
  }
  request.push = o.push;

  auto& driver = s.driver();
  driver.execute(engine::build_argv(request));
  if (o.push && request.platforms.size() == 1) {
    for (const auto& tag : request.tags) engine::execute_with_retry(driver, engine::push_argv(tag));
  }
  return 0;
}

matrix::MatrixFilter matrix_filter(const Options& o) {
  matrix::MatrixFilter filter;
  if (!o.m_distros.empty()) {
    filter.distros.emplace();
    for (const auto& d : o.m_distros) filter.distros->insert(depgraph::distro_from_string(d));
  }
  if (!o.m_components.empty()) {
    filter.components.emplace();
    for (const auto& c : o.m_components) filter.components->insert(matrix::component_from_string(c));
  }
  if (!o.m_flavors.empty()) {
    filter.ml_flavors.emplace();
    for (const auto& f : o.m_flavors) filter.ml_flavors->insert(matrix::ml_flavor_from_string(f));
  }
  if (!o.m_archs.empty()) {
    filter.architectures.emplace();
    for (const auto& a : o.m_archs) filter.architectures->insert(platform_from_string(a));
  }
  return filter;
}

std::string matrix_registry(const config::GlobalConfig& cfg) { return cfg.registry.empty() ? "forge" : cfg.registry; }

matrix::BaseImageTable base_table(const Options& o) {
  if (o.m_base_table.empty()) return matrix::BaseImageTable::builtin();
  return matrix::BaseImageTable::from_yaml(read_file(o.m_base_table));
}

int cmd_matrix_list(Session& s) {
  const auto& cfg = s.config();
  auto entries = matrix::enumerate_matrix(matrix_filter(s.opts()));
  auto& out = s.io().out;
  if (s.opts().format == "json" || s.opts().format == "yaml") {
    json doc = json::array();
    for (const auto& e : entries) {
      std::vector<std::string> archs;
      for (Platform p : e.architectures) archs.emplace_back(to_string(p));
      doc.push_back({{"tag", matrix::tag_of(e, matrix_registry(cfg))},
                     {"distro", std::string(depgraph::to_string(e.distro))},
                     {"component", std::string(matrix::to_string(e.component))},
                     {"ml_flavor", std::string(matrix::to_string(e.ml_flavor))},
                     {"architectures", archs}});
    }
    out << (s.opts().format == "json" ? doc.dump(2) + "\n" : to_yaml(doc));
    return 0;
  }
  for (const auto& e : entries) out << matrix::tag_of(e, matrix_registry(cfg)) << "\n";
  return 0;
}

int cmd_matrix_plan(Session& s) {
  const auto& cfg = s.config();
  auto entries = matrix::enumerate_matrix(matrix_filter(s.opts()));
  auto plan = matrix::build_plan(entries, matrix_registry(cfg), s.opts().m_dockerfile, base_table(s.opts()));
  write_output(matrix::render_build_plan(plan), s.opts().output.empty() ? "-" : s.opts().output, s.io().out);
  return 0;
}

int cmd_matrix_dockerfile(Session& s) {
  write_output(matrix::base_dockerfile(), s.opts().output.empty() ? "-" : s.opts().output, s.io().out);
  return 0;
}

int cmd_matrix_build(Session& s) {
  const Options& o = s.opts();
  const auto& cfg = s.config();
  std::vector<matrix::PlanItem> plan;
  if (!o.m_plan.empty()) {
    plan = matrix::parse_build_plan(read_file(o.m_plan));
  } else {
    plan = matrix::build_plan(matrix::enumerate_matrix(matrix_filter(o)), matrix_registry(cfg), o.m_dockerfile,
                              base_table(o));
  }
  std::vector<engine::EngineCommand> commands;
  for (const auto& item : plan) {
    engine::BuildRequest request;
    fs::path dockerfile(item.dockerfile_path);
    request.context = dockerfile.has_parent_path() ? dockerfile.parent_path() : fs::path(".");
    request.dockerfile_path = dockerfile;
    request.target = "ros";
    request.tags = {item.tag};
    request.platforms = item.platforms;
    request.build_args = item.build_args;
    request.push = o.push;
    commands.push_back(engine::build_argv(request));
    if (o.push && item.platforms.size() == 1) commands.push_back(engine::push_argv(item.tag));
  }
  auto outcomes = engine::execute_bounded(s.driver(), commands, cfg.parallelism);
  std::size_t failed = 0;
  for (const auto& outcome : outcomes) {
    if (outcome.error.empty()) continue;
    ++failed;
    s.io().err << "failed: " << outcome.command.description << ": " << outcome.error << "\n";
  }
  if (failed) {
    throw Error(ErrorCode::NonZeroExit, std::to_string(failed) + " of " + std::to_string(outcomes.size()) +
                                            " matrix build command(s) failed");
  }
  return 0;
}

int cmd_manifest_merge(Session& s) {
  engine::execute_with_retry(s.driver(), engine::manifest_merge_argv(s.opts().merge_tag, s.opts().sources));
  return 0;
}

int cmd_promote(Session& s) {
  engine::execute_with_retry(s.driver(),
                             engine::manifest_merge_argv(s.opts().promote_target, {s.opts().promote_source}));
  return 0;
}

int cmd_bench_startup(Session& s) {
  const Options& o = s.opts();
  if (o.bench_runs < 1) throw Error(ErrorCode::InvalidArgs, "--runs must be at least 1");
  devrun::RunInvocation inv;
  inv.image = o.bench_image;
  inv.interactive_tty = false;
  inv.command = {"true"};
  auto cmd = engine::run_argv(inv);
  cmd.attach_stdio = false;
  std::vector<double> seconds;
  for (int i = 0; i < o.bench_runs; ++i) {
    auto start = std::chrono::steady_clock::now();
    s.driver().execute(cmd);
    seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  double mean = 0;
  for (double v : seconds) mean += v;
  mean /= static_cast<double>(seconds.size());
  auto [lo, hi] = std::minmax_element(seconds.begin(), seconds.end());
  s.io().out << std::fixed << std::setprecision(3) << "startup of " << o.bench_image << " over " << seconds.size()
             << " run(s): mean " << mean << " s, min " << *lo << " s, max " << *hi << " s\n";
  return 0;
}

constexpr std::string_view kRunUsage =
    R"(Usage: forge run [forge options] [engine flags] IMAGE [-- ENGINE FLAGS] [-- COMMAND...]

Starts IMAGE with X11 forwarding, GPU access, host user mapping and the
enclosing workspace's src mounted, or attaches to the container when it is
already running.

With a single `--`, everything after it is the command. With two, the tokens
between them are forwarded to the engine verbatim and the rest is the command.
Flags forge does not know are forwarded too; the last bare word before the
first `--` is the image.

Options:
  --name NAME            container name (default: derived from image and cwd)
  --no-x11               do not forward the X11 display
  --xauth                also forward the X authority cookie file
  --no-gpu               do not request GPUs
  --no-user-map          run as the image's default user
  --no-mount-ws          do not mount the detected workspace
  --workspace-dir DIR    in-container workspace (default /ws)
  --no-rm                keep the container after it exits
  --no-tty               never allocate a terminal
  --plugin-dir DIR       plugin directory (default ~/.config/forge/plugins)
  --no-plugins           skip plugins
  --dry-run              print engine commands instead of running them
  -h, --help             show this message
)";

int cmd_run(Session& s, const std::vector<std::string>& tokens, bool dry_run_global) {
  std::vector<std::vector<std::string>> segments(1);
  for (const auto& t : tokens) {
    if (t == "--" && segments.size() < 3) {
      segments.emplace_back();
    } else {
      segments.back().push_back(t);
    }
  }

  devrun::UserArgs args;
  devrun::HostOverrides overrides;
  std::optional<fs::path> plugin_dir;
  bool no_plugins = false;
  bool dry_run = dry_run_global;
  std::vector<std::string> rest;
  const auto& head = segments.front();
  for (std::size_t i = 0; i < head.size(); ++i) {
    const std::string& t = head[i];
    auto value = [&](const std::string& flag) -> std::string {
      if (t.size() > flag.size() && t.compare(0, flag.size() + 1, flag + "=") == 0) return t.substr(flag.size() + 1);
      if (i + 1 >= head.size()) throw Error(ErrorCode::InvalidArgs, flag + " needs a value");
      return head[++i];
    };
    auto is = [&](const std::string& flag) { return t == flag || t.starts_with(flag + "="); };
    if (t == "-h" || t == "--help") {
      s.io().out << kRunUsage;
      return 0;
    } else if (is("--name")) {
      args.name = value("--name");
    } else if (t == "--no-x11") {
      args.no_x11 = true;
    } else if (t == "--xauth") {
      args.forward_xauthority = true;
    } else if (t == "--no-gpu") {
      args.no_gpu = true;
    } else if (t == "--no-user-map") {
      args.no_user_map = true;
    } else if (t == "--no-mount-ws") {
      args.mount_workspace = false;
    } else if (is("--workspace-dir")) {
      args.workspace_dir = value("--workspace-dir");
    } else if (t == "--no-rm") {
      args.remove_on_exit = false;
    } else if (t == "--no-tty") {
      overrides.tty_available = false;
    } else if (is("--plugin-dir")) {
      plugin_dir = value("--plugin-dir");
    } else if (t == "--no-plugins") {
      no_plugins = true;
    } else if (t == "--dry-run") {
      dry_run = true;
    } else {
      rest.push_back(t);
    }
  }
  auto image_it = std::find_if(rest.rbegin(), rest.rend(), [](const std::string& t) { return !t.starts_with("-"); });
  if (image_it == rest.rend()) throw Error(ErrorCode::InvalidArgs, "an image is required (see forge run --help)");
  args.image = *image_it;
  rest.erase(std::next(image_it).base());
  args.passthrough = rest;
  if (segments.size() == 2) {
    args.command = segments[1];
  } else if (segments.size() == 3) {
    args.passthrough.insert(args.passthrough.end(), segments[1].begin(), segments[1].end());
    args.command = segments[2];
  }

  auto display = s.io().env.find("DISPLAY");
  overrides.display = display == s.io().env.end() ? std::string{} : display->second;
  devrun::HostEnvironment host = devrun::probe_host(overrides);
  devrun::RunInvocation inv = devrun::synthesize_invocation(host, args);
  if (!no_plugins) {
    inv = devrun::apply_plugins(inv, devrun::load_plugin_dir(plugin_dir.value_or(devrun::default_plugin_dir())));
  }

  std::unique_ptr<engine::DryRunDriver> dry;
  engine::Driver* driver = nullptr;
  if (dry_run) {
    dry = std::make_unique<engine::DryRunDriver>(s.io().out, s.config().engine);
    driver = dry.get();
  } else {
    driver = &s.driver();
  }
  auto state = engine::inspect_container(*driver, *inv.name);
  auto decision = devrun::attach_or_run(*inv.name, inv, state);
  int exit_code = 0;
  for (const auto& cmd : decision.commands) exit_code = driver->execute(cmd).exit_code;
  return exit_code;
}

std::string single_line(std::string text) {
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text;
}

}  // namespace

int run(const std::vector<std::string>& args, Io& io) {
  Options o;
  CLI::App app{"forge: build development and deployment container images for ROS workspaces", "forge"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--config", o.config_path, "Config file (default: <workspace>/forge.yaml)");
  app.add_flag("--dry-run", o.dry_run, "Print engine commands instead of executing them");
  app.add_option("--engine", o.engine, "Container engine CLI (default docker, env FORGE_ENGINE)");
  app.add_option("--registry", o.registry, "Image registry prefix (env FORGE_REGISTRY)");
  app.add_option("--parallelism", o.parallelism, "Concurrent builds (env FORGE_PARALLELISM, default 2)");
  app.add_flag("--strict", o.strict, "Fail on unresolved dependency keys (env FORGE_STRICT)");
  app.add_option("--distro", o.distro, "ROS distro: noetic, foxy, humble, iron, rolling (default humble)");
  app.add_option("--rosdep", o.rosdep, "rosdep database YAML (repeatable; later files override earlier ones)");
  app.add_option("--distro-index", o.distro_index, "Distro package index YAML");
  app.add_option("--format", o.format, "Output format of read-only commands")
      ->check(CLI::IsMember({"text", "json", "yaml"}));

  auto* analyze = app.add_subcommand("analyze", "Resolve and report workspace dependencies");
  analyze->add_option("workspace", o.workspace, "Workspace root")->required();

  auto* generate = app.add_subcommand("generate", "Generate build files");
  generate->require_subcommand(1);
  auto* gen_docker = generate->add_subcommand("dockerfile", "Write the multi-stage Dockerfile for a workspace");
  auto* build = app.add_subcommand("build", "Generate the Dockerfile and build an image");
  for (auto* sub : {gen_docker, build}) {
    sub->add_option("workspace", o.workspace, "Workspace root (build context)")->required();
    sub->add_option("--target", o.target, "dev or run")->check(CLI::IsMember({"dev", "run"}));
    sub->add_option("--base", o.base, "Base image (default ros:<distro>-ros-core)");
    sub->add_option("--command", o.command, "Default command of the run image");
    sub->add_flag("--slim", o.slim, "Install only exec dependencies in the run image");
    sub->add_option("--pre-script", o.pre_script, "Script run before cloning upstream repositories");
    sub->add_option("--post-script", o.post_script, "Script run after cloning upstream repositories");
    sub->add_option("--apt", o.extra_apt, "Extra apt package (repeatable)");
    sub->add_option("--pip", o.extra_pip, "Extra pip package (repeatable)");
    sub->add_option("--platform", o.platforms, "amd64 and/or arm64 (comma separated or repeated)");
    sub->add_flag("--run-as-user", o.run_as_user, "Run the deployment image as the non-root ros user");
  }
  gen_docker->add_option("-o,--output", o.output, "Output path, - for stdout (default ./Dockerfile)");
  build->add_option("-t,--tag", o.tags, "Image tag (repeatable)");
  build->add_flag("--push", o.push, "Push after building");
  build->add_option("--dockerfile-out", o.dockerfile_out, "Where to write the generated Dockerfile");

  auto* gen_ci = generate->add_subcommand("ci", "Write a CI pipeline configuration");
  gen_ci->add_option("workspace", o.workspace, "Repository root (default .)");
  gen_ci->add_option("--platform", o.ci_platform, "github or gitlab")->required()->check(
      CLI::IsMember({"github", "gitlab"}));
  gen_ci->add_option("--image", o.image_name, "Image name (default: workspace directory name)");
  gen_ci->add_option("--arch", o.platforms, "amd64 and/or arm64 (default amd64)");
  gen_ci->add_flag("--test", o.enable_test, "Add a test job running in the dev image");
  gen_ci->add_option("--branch", o.branch, "Branch whose builds are pushed (default main)");
  gen_ci->add_option("--base", o.base, "Base image passed to forge build");
  gen_ci->add_option("--targets", o.targets, "Subset of dev,run")->delimiter(',');
  gen_ci->add_option("--command", o.command, "Default command of the run image");
  gen_ci->add_option("--test-command", o.test_command, "Test command run in the dev image");
  gen_ci->add_option("--setup-command", o.setup_command, "Shell command installing forge on the runner");
  gen_ci->add_option("-o,--output", o.output, "Output path (default: platform convention under the workspace)");

  auto* matrix_cmd = app.add_subcommand("matrix", "ML-enabled base image matrix");
  matrix_cmd->require_subcommand(1);
  auto* m_list = matrix_cmd->add_subcommand("list", "List image tags");
  auto* m_plan = matrix_cmd->add_subcommand("plan", "Write the machine-readable build plan");
  auto* m_build = matrix_cmd->add_subcommand("build", "Build matrix images");
  auto* m_docker = matrix_cmd->add_subcommand("dockerfile", "Write the generic base-image Dockerfile");
  for (auto* sub : {m_list, m_plan, m_build}) {
    sub->add_option("--distro", o.m_distros, "Restrict distros")->delimiter(',');
    sub->add_option("--component", o.m_components, "Restrict ROS components")->delimiter(',');
    sub->add_option("--ml", o.m_flavors, "Restrict ML flavors (none, cuda, tf-py, tf-cpp, torch-py, torch-cpp)")
        ->delimiter(',');
    sub->add_option("--arch", o.m_archs, "Restrict architectures")->delimiter(',');
  }
  for (auto* sub : {m_plan, m_build}) {
    sub->add_option("--dockerfile", o.m_dockerfile, "Generic Dockerfile path recorded in the plan");
    sub->add_option("--base-table", o.m_base_table, "Base image table YAML");
  }
  m_plan->add_option("-o,--output", o.output, "Output path (default stdout)");
  m_docker->add_option("-o,--output", o.output, "Output path (default stdout)");
  m_build->add_option("--plan", o.m_plan, "Build plan file (default: enumerate with the filters)");
  m_build->add_flag("--push", o.push, "Push images (required for multi-arch entries)");

  auto* run_cmd = app.add_subcommand("run", "Run or attach to a development container (see forge run --help)");
  run_cmd->prefix_command();
  run_cmd->fallthrough(false);
  run_cmd->set_help_flag();

  auto* manifest_cmd = app.add_subcommand("manifest", "Multi-arch manifest lists");
  manifest_cmd->require_subcommand(1);
  auto* merge = manifest_cmd->add_subcommand("merge", "Create a manifest list from per-arch images");
  merge->add_option("--tag", o.merge_tag, "Manifest list tag")->required();
  merge->add_option("sources", o.sources, "Per-arch image references")->required();

  auto* promote = app.add_subcommand("promote", "Copy a (multi-arch) image to another tag in the registry");
  promote->add_option("source", o.promote_source)->required();
  promote->add_option("target", o.promote_target)->required();

  auto* bench = app.add_subcommand("bench", "Report-only measurements");
  bench->require_subcommand(1);
  auto* bench_startup = bench->add_subcommand("startup", "Time container startup");
  bench_startup->add_option("image", o.bench_image)->required();
  bench_startup->add_option("--runs", o.bench_runs, "Number of runs (default 5)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, io.out, io.err);
    return code == 0 ? 0 : 2;
  }

  Session session(io, o);
  try {
    if (analyze->parsed()) return cmd_analyze(session);
    if (gen_docker->parsed()) return cmd_generate_dockerfile(session);
    if (gen_ci->parsed()) return cmd_generate_ci(session);
    if (build->parsed()) return cmd_build(session);
    if (m_list->parsed()) return cmd_matrix_list(session);
    if (m_plan->parsed()) return cmd_matrix_plan(session);
    if (m_build->parsed()) return cmd_matrix_build(session);
    if (m_docker->parsed()) return cmd_matrix_dockerfile(session);
    if (run_cmd->parsed()) return cmd_run(session, run_cmd->remaining(), o.dry_run);
    if (merge->parsed()) return cmd_manifest_merge(session);
    if (promote->parsed()) return cmd_promote(session);
    if (bench_startup->parsed()) return cmd_bench_startup(session);
  } catch (const Error& e) {
    io.err << "forge: error[" << to_string(e.code()) << "]: " << single_line(e.what()) << "\n";
    return is_user_error(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    io.err << "forge: error[Internal]: " << single_line(e.what()) << "\n";
    return 1;
  }
  io.err << "forge: error[InvalidArgs]: no command given\n";
  return 2;
}

}  // namespace forge::cli
