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

#include <stdexcept>
#include <string>
#include <string_view>

namespace forge {

enum class ErrorCode {
  MalformedManifest,
  UnsupportedFormat,
  DuplicatePackageName,
  EmptyWorkspace,
  MalformedDatabase,
  MalformedReposFile,
  UnsupportedVcsType,
  MissingCredential,
  UnresolvedDependencies,
  InvalidSpec,
  InvalidRequest,
  InvalidArgs,
  InvalidConfig,
  PluginViolation,
  EngineUnavailable,
  NonZeroExit,
  MalformedEngineOutput,
  Internal,
};

std::string_view to_string(ErrorCode code);

/// True for errors caused by user input (CLI exit code 2); false for engine
/// and internal failures (exit code 1).
bool is_user_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace forge
