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

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "forge/devrun.hpp"
#include "forge/engine.hpp"

// Randomized (HostEnvironment, UserArgs) pairs and the feature-flag checks.
namespace forge::testing {

struct DevrunCase {
  devrun::HostEnvironment host;
  devrun::UserArgs args;
};

inline DevrunCase random_devrun_case(std::mt19937& rng) {
  static const std::vector<std::string> displays = {":0", ":1", "localhost:10.0", "host.docker.internal:0"};
  static const std::vector<std::string> vocab = {"--net", "host", "--ipc=host", "-p", "8080:80", "--privileged",
                                                 "--shm-size=2g", "-e", "ROS_DOMAIN_ID=7", "--device", "/dev/video0",
                                                 "--rm", "--", "bash"};
  DevrunCase c;
  if (rng() % 2) {
    c.host.display = displays[rng() % displays.size()];
    c.host.x11_socket_dir = "/tmp/.X11-unix";
  }
  c.host.gpu_count = static_cast<int>(rng() % 3 == 0 ? 0 : rng() % 9);
  c.host.uid = static_cast<int>(rng() % 70000);
  c.host.gid = static_cast<int>(rng() % 70000);
  c.host.cwd = "/home/dev/ws" + std::to_string(rng() % 5) + "/src/pkg";
  if (rng() % 2) c.host.detected_workspace = "/home/dev/ws" + std::to_string(rng() % 5);
  c.host.tty_available = rng() % 2;
  if (rng() % 3 == 0) c.host.xauthority = "/home/dev/.Xauthority";

  c.args.image = "registry.example.com/team/app:dev-" + std::to_string(rng() % 100);
  if (rng() % 2) c.args.name = "box" + std::to_string(rng() % 50);
  c.args.no_x11 = rng() % 2;
  c.args.no_gpu = rng() % 2;
  c.args.no_user_map = rng() % 2;
  c.args.mount_workspace = rng() % 2;
  c.args.forward_xauthority = rng() % 2;
  c.args.remove_on_exit = rng() % 2;
  for (std::size_t i = 0, n = rng() % 7; i < n; ++i) c.args.passthrough.push_back(vocab[rng() % vocab.size()]);
  for (std::size_t i = 0, n = rng() % 4; i < n; ++i) c.args.command.push_back(vocab[rng() % vocab.size()]);
  return c;
}

// Empty when the three biconditionals and passthrough fidelity hold.
inline std::vector<std::string> devrun_violations(const DevrunCase& c, const devrun::RunInvocation& inv,
                                                  const engine::EngineCommand& cmd) {
  std::vector<std::string> v;
  bool x11_expected = c.host.display.has_value() && !c.args.no_x11;
  bool has_display_env = inv.env.count("DISPLAY") > 0;
  bool has_socket = std::any_of(inv.mounts.begin(), inv.mounts.end(),
                                [](const devrun::Mount& m) { return m.container_path == "/tmp/.X11-unix"; });
  bool has_xauth = inv.env.count("XAUTHORITY") > 0;
  if (has_display_env != x11_expected || has_socket != x11_expected) v.push_back("x11 biconditional");
  if (has_xauth && !x11_expected) v.push_back("xauthority without x11");
  if (inv.gpu_all != (c.host.gpu_count > 0 && !c.args.no_gpu)) v.push_back("gpu biconditional");
  if (inv.user_map.has_value() != !c.args.no_user_map) v.push_back("user-map biconditional");
  if (inv.user_map && (inv.user_map->uid != c.host.uid || inv.user_map->gid != c.host.gid)) v.push_back("user ids");

  const auto& argv = cmd.argv;
  const std::vector<std::string> gpus_all = {"--gpus", "all"};
  bool gpu_flag = std::search(argv.begin(), argv.end(), gpus_all.begin(), gpus_all.end()) != argv.end();
  bool passthrough_has_gpus = std::count(c.args.passthrough.begin(), c.args.passthrough.end(), "--gpus") > 0;
  if (!passthrough_has_gpus && gpu_flag != inv.gpu_all) v.push_back("gpu flag in argv");

  std::size_t image_pos = argv.size() - inv.command.size() - 1;
  if (argv[image_pos] != c.args.image) {
    v.push_back("image position");
    return v;
  }
  if (!std::equal(c.args.command.begin(), c.args.command.end(), argv.begin() + image_pos + 1)) v.push_back("command");
  if (image_pos < c.args.passthrough.size() ||
      !std::equal(c.args.passthrough.begin(), c.args.passthrough.end(),
                  argv.begin() + (image_pos - c.args.passthrough.size()))) {
    v.push_back("passthrough fidelity");
  }
  return v;
}

}  // namespace forge::testing
