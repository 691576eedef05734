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

#include "forge/error.hpp"

namespace forge {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedManifest: return "MalformedManifest";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::DuplicatePackageName: return "DuplicatePackageName";
    case ErrorCode::EmptyWorkspace: return "EmptyWorkspace";
    case ErrorCode::MalformedDatabase: return "MalformedDatabase";
    case ErrorCode::MalformedReposFile: return "MalformedReposFile";
    case ErrorCode::UnsupportedVcsType: return "UnsupportedVcsType";
    case ErrorCode::MissingCredential: return "MissingCredential";
    case ErrorCode::UnresolvedDependencies: return "UnresolvedDependencies";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidRequest: return "InvalidRequest";
    case ErrorCode::InvalidArgs: return "InvalidArgs";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::PluginViolation: return "PluginViolation";
    case ErrorCode::EngineUnavailable: return "EngineUnavailable";
    case ErrorCode::NonZeroExit: return "NonZeroExit";
    case ErrorCode::MalformedEngineOutput: return "MalformedEngineOutput";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

bool is_user_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::EngineUnavailable:
    case ErrorCode::NonZeroExit:
    case ErrorCode::MalformedEngineOutput:
    case ErrorCode::PluginViolation:
    case ErrorCode::Internal:
      return false;
    default:
      return true;
  }
}

}  // namespace forge
