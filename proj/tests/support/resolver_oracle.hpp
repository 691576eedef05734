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

#include <map>
#include <set>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

// Brute-force key classifier that reads the database YAML itself and applies
// the precedence order internal > repository > distro index > rosdep.
namespace forge::testing {

struct OracleClassification {
  std::map<std::string, std::string> bucket;  // key -> bucket name
  std::set<std::string> ros_pkgs;
  std::set<std::string> system_pkgs;
  std::set<std::string> python_pkgs;
  std::set<std::string> unresolved;
};

class ResolverOracle {
 public:
  ResolverOracle(const std::vector<std::string>& db_docs, std::string distro, std::set<std::string> index_keys)
      : distro_(std::move(distro)), index_(std::move(index_keys)) {
    for (const auto& doc_text : db_docs) {
      YAML::Node doc = YAML::Load(doc_text);
      for (auto it = doc.begin(); it != doc.end(); ++it) {
        YAML::Node rule = it->second["ubuntu"];
        if (!rule) continue;
        Rule r;
        if (rule.IsSequence()) {
          r.python = false;
          for (const auto& p : rule) r.packages.push_back(p.as<std::string>());
        } else {
          r.python = true;
          for (const auto& p : rule["pip"]["packages"]) r.packages.push_back(p.as<std::string>());
        }
        rules_[it->first.as<std::string>()] = r;
      }
    }
  }

  OracleClassification classify(const std::set<std::string>& keys, const std::set<std::string>& internal,
                                const std::set<std::string>& repo_keys) const {
    OracleClassification out;
    for (const auto& key : keys) {
      if (internal.count(key)) {
        out.bucket[key] = "internal";
        continue;
      }
      if (repo_keys.count(key)) {
        out.bucket[key] = "source";
        continue;
      }
      if (index_.count(key)) {
        out.bucket[key] = "ros_distro";
        std::string name = "ros-" + distro_ + "-";
        for (char c : key) name.push_back(c == '_' ? '-' : c);
        out.ros_pkgs.insert(name);
        continue;
      }
      auto rule = rules_.find(key);
      if (rule != rules_.end()) {
        out.bucket[key] = rule->second.python ? "python" : "system";
        auto& target = rule->second.python ? out.python_pkgs : out.system_pkgs;
        target.insert(rule->second.packages.begin(), rule->second.packages.end());
        continue;
      }
      out.bucket[key] = "unresolved";
      out.unresolved.insert(key);
    }
    return out;
  }

  std::vector<std::string> known_keys() const {
    std::vector<std::string> k;
    for (const auto& [key, _] : rules_) k.push_back(key);
    return k;
  }

 private:
  struct Rule {
    bool python = false;
    std::vector<std::string> packages;
  };
  std::string distro_;
  std::set<std::string> index_;
  std::map<std::string, Rule> rules_;
};

}  // namespace forge::testing
