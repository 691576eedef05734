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

#include "forge/process.hpp"

#include <future>

#include <unistd.h>

#include <boost/asio/io_context.hpp>
#include <boost/process.hpp>

namespace forge {

namespace bp = boost::process;

std::string find_executable(const std::string& program) {
  if (program.find('/') != std::string::npos) {
    return ::access(program.c_str(), X_OK) == 0 ? program : std::string{};
  }
  return bp::search_path(program).string();
}

ProcessResult run_captured(const std::string& executable, const std::vector<std::string>& args,
                           const std::string& input) {
  boost::asio::io_context ios;
  std::future<std::string> out;
  std::future<std::string> err;
  bp::child child(executable, bp::args(args), bp::std_in < boost::asio::buffer(input), bp::std_out > out,
                  bp::std_err > err, ios);
  ios.run();
  child.wait();
  return ProcessResult{child.exit_code(), out.get(), err.get()};
}

int run_attached(const std::string& executable, const std::vector<std::string>& args) {
  return bp::system(executable, bp::args(args));
}

}  // namespace forge
