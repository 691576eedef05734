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

#include "forge/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "forge/error.hpp"

namespace forge::manifest {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

std::string_view to_string(BuildType type) {
  switch (type) {
    case BuildType::catkin: return "catkin";
    case BuildType::ament_cmake: return "ament_cmake";
    case BuildType::ament_python: return "ament_python";
    case BuildType::cmake: return "cmake";
  }
  return "unknown";
}

std::optional<BuildType> build_type_from_string(std::string_view text) {
  if (text == "catkin") return BuildType::catkin;
  if (text == "ament_cmake") return BuildType::ament_cmake;
  if (text == "ament_python") return BuildType::ament_python;
  if (text == "cmake") return BuildType::cmake;
  return std::nullopt;
}

bool is_valid_package_name(std::string_view name) {
  if (name.empty() || !std::isalpha(static_cast<unsigned char>(name.front()))) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

namespace {

std::string trim(std::string_view s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

// Recursive-descent evaluator over the condition grammar:
//   expr   := and_expr ("or" and_expr)*
//   and    := cmp ("and" cmp)*
//   cmp    := "(" expr ")" | value ("==" | "!=") value
// A variable without a value poisons the whole expression.
class ConditionParser {
 public:
  ConditionParser(std::string_view text, const ConditionEnv& env) : env_(env) { tokenize(text); }

  bool evaluate() {
    bool value = parse_or();
    if (pos_ != tokens_.size()) throw std::invalid_argument("trailing tokens");
    return value && !unknown_variable_;
  }

 private:
  void tokenize(std::string_view text) {
    std::size_t i = 0;
    while (i < text.size()) {
      char c = text[i];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
      } else if (c == '(' || c == ')') {
        tokens_.emplace_back(1, c);
        ++i;
      } else if ((c == '=' || c == '!') && i + 1 < text.size() && text[i + 1] == '=') {
        tokens_.push_back(std::string(text.substr(i, 2)));
        i += 2;
      } else if (c == '<' || c == '>') {
        std::size_t len = (i + 1 < text.size() && text[i + 1] == '=') ? 2 : 1;
        tokens_.push_back(std::string(text.substr(i, len)));
        i += len;
      } else if (c == '"' || c == '\'') {
        auto close = text.find(c, i + 1);
        if (close == std::string_view::npos) throw std::invalid_argument("unterminated quote");
        tokens_.push_back("'" + std::string(text.substr(i + 1, close - i - 1)));
        i = close + 1;
      } else {
        std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) && text[i] != '(' &&
               text[i] != ')' && text[i] != '=' && text[i] != '!' && text[i] != '<' && text[i] != '>') {
          ++i;
        }
        if (i == start) throw std::invalid_argument("unexpected character");
        tokens_.push_back(std::string(text.substr(start, i - start)));
      }
    }
  }

  const std::string& peek() const {
    static const std::string end;
    return pos_ < tokens_.size() ? tokens_[pos_] : end;
  }

  std::string next() {
    if (pos_ >= tokens_.size()) throw std::invalid_argument("unexpected end of condition");
    return tokens_[pos_++];
  }

  bool parse_or() {
    bool value = parse_and();
    while (peek() == "or") {
      ++pos_;
      bool rhs = parse_and();
      value = value || rhs;
    }
    return value;
  }

  bool parse_and() {
    bool value = parse_cmp();
    while (peek() == "and") {
      ++pos_;
      bool rhs = parse_cmp();
      value = value && rhs;
    }
    return value;
  }

  bool parse_cmp() {
    if (peek() == "(") {
      ++pos_;
      bool value = parse_or();
      if (next() != ")") throw std::invalid_argument("expected ')'");
      return value;
    }
    std::string lhs = value_of(next());
    std::string op = next();
    std::string rhs = value_of(next());
    if (op == "==") return lhs == rhs;
    if (op == "!=") return lhs != rhs;
    if (op == "<" || op == "<=" || op == ">" || op == ">=") {
      int order = compare(lhs, rhs);
      if (op == "<") return order < 0;
      if (op == "<=") return order <= 0;
      if (op == ">") return order > 0;
      return order >= 0;
    }
    throw std::invalid_argument("expected comparison operator");
  }

  // Numeric when both sides are integers, otherwise lexicographic.
  static int compare(const std::string& a, const std::string& b) {
    auto numeric = [](const std::string& s) {
      return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
    };
    if (numeric(a) && numeric(b) && a.size() < 10 && b.size() < 10) return std::stoi(a) - std::stoi(b);
    return a.compare(b);
  }

  std::string value_of(const std::string& token) {
    if (token.empty() || token == "(" || token == ")" || token == "==" || token == "!=" || token == "<" ||
        token == "<=" || token == ">" || token == ">=") {
      throw std::invalid_argument("expected operand");
    }
    if (token.front() == '\'') return token.substr(1);
    if (token.front() != '$') return token;
    std::string name = token.substr(1);
    if (name == "ROS_VERSION" && env_.ros_version) return std::to_string(*env_.ros_version);
    if (name == "ROS_DISTRO" && env_.ros_distro) return *env_.ros_distro;
    unknown_variable_ = true;
    return {};
  }

  const ConditionEnv& env_;
  std::vector<std::string> tokens_;
  std::size_t pos_ = 0;
  bool unknown_variable_ = false;
};

enum class DepKind { build, exec, build_exec, test };

const std::map<std::string, DepKind, std::less<>>& dependency_elements() {
  static const std::map<std::string, DepKind, std::less<>> elements{
      {"depend", DepKind::build_exec},
      {"build_depend", DepKind::build},
      {"build_export_depend", DepKind::build},
      {"buildtool_depend", DepKind::build},
      {"buildtool_export_depend", DepKind::build},
      {"exec_depend", DepKind::exec},
      {"run_depend", DepKind::exec},
      {"test_depend", DepKind::test},
  };
  return elements;
}

bool is_ros1(const ConditionEnv& env) {
  if (env.ros_version) return *env.ros_version == 1;
  return env.ros_distro && *env.ros_distro == "noetic";
}

}  // namespace

bool evaluate_condition(std::string_view expression, const ConditionEnv& env) {
  if (trim(expression).empty()) return true;
  try {
    return ConditionParser(expression, env).evaluate();
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorCode::MalformedManifest,
                "invalid condition '" + std::string(expression) + "': " + e.what());
  }
}

PackageManifest parse_manifest(std::string_view xml_text, const ConditionEnv& env) {
  pt::ptree doc;
  try {
    std::istringstream in{std::string(xml_text)};
    pt::read_xml(in, doc, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    throw Error(ErrorCode::MalformedManifest, std::string("malformed XML: ") + e.message());
  }

  auto root_it = std::find_if(doc.begin(), doc.end(), [](const auto& child) {
    return child.first != "<xmlcomment>" && child.first != "<xmlattr>";
  });
  if (root_it == doc.end() || root_it->first != "package") {
    throw Error(ErrorCode::MalformedManifest, "root element must be <package>");
  }
  const pt::ptree& root = root_it->second;

  PackageManifest m;
  std::string format_text = root.get<std::string>("<xmlattr>.format", "1");
  if (format_text == "1" || format_text == "2" || format_text == "3") {
    m.manifest_format = format_text[0] - '0';
  } else {
    throw Error(ErrorCode::UnsupportedFormat, "unsupported manifest format '" + format_text + "'");
  }

  m.name = trim(root.get<std::string>("name", ""));
  if (m.name.empty()) throw Error(ErrorCode::MalformedManifest, "missing <name>");
  if (!is_valid_package_name(m.name)) {
    throw Error(ErrorCode::MalformedManifest, "invalid package name '" + m.name + "'");
  }
  m.version = trim(root.get<std::string>("version", ""));
  if (m.version.empty()) throw Error(ErrorCode::MalformedManifest, "missing <version> in package '" + m.name + "'");

  m.build_type = is_ros1(env) ? BuildType::catkin : BuildType::ament_cmake;

  const auto& elements = dependency_elements();
  for (const auto& [tag, child] : root) {
    if (tag == "export") {
      for (const auto& [export_tag, export_child] : child) {
        if (export_tag != "build_type") continue;
        if (!evaluate_condition(export_child.get<std::string>("<xmlattr>.condition", ""), env)) continue;
        std::string text = trim(export_child.get_value<std::string>());
        auto type = build_type_from_string(text);
        if (!type) throw Error(ErrorCode::MalformedManifest, "unknown build_type '" + text + "'");
        m.build_type = *type;
      }
      continue;
    }
    auto kind = elements.find(tag);
    if (kind == elements.end()) continue;
    if (!evaluate_condition(child.get<std::string>("<xmlattr>.condition", ""), env)) continue;
    std::string key = trim(child.get_value<std::string>());
    if (key.empty()) {
      throw Error(ErrorCode::MalformedManifest, "empty <" + tag + "> in package '" + m.name + "'");
    }
    switch (kind->second) {
      case DepKind::build: m.deps_build.insert(key); break;
      case DepKind::exec: m.deps_exec.insert(key); break;
      case DepKind::build_exec:
        m.deps_build.insert(key);
        m.deps_exec.insert(key);
        break;
      case DepKind::test: m.deps_test.insert(key); break;
    }
  }
  return m;
}

Workspace scan_workspace(const fs::path& root, const ConditionEnv& env) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw Error(ErrorCode::InvalidArgs, "workspace root '" + root.string() + "' is not a directory");
  }

  Workspace ws;
  ws.root = root;

  auto visit = [&](const fs::path& dir) -> bool {
    if (fs::exists(dir / "COLCON_IGNORE") || fs::exists(dir / "CATKIN_IGNORE")) {
      ws.ignored_dirs.push_back(fs::relative(dir, root));
      return false;
    }
    fs::path manifest_path = dir / "package.xml";
    if (fs::is_regular_file(manifest_path)) {
      std::ifstream in(manifest_path, std::ios::binary);
      std::stringstream buffer;
      buffer << in.rdbuf();
      try {
        PackageManifest m = parse_manifest(buffer.str(), env);
        m.source_dir = fs::relative(dir, root).lexically_normal();
        ws.packages.push_back(std::move(m));
      } catch (const Error& e) {
        throw Error(e.code(), manifest_path.string() + ": " + e.what());
      }
      return false;  // packages do not nest
    }
    return true;
  };

  if (visit(root)) {
    for (auto it = fs::recursive_directory_iterator(root, fs::directory_options::skip_permission_denied);
         it != fs::recursive_directory_iterator(); ++it) {
      if (!it->is_directory() || it->is_symlink()) {
        if (it->is_symlink() && it->is_directory()) it.disable_recursion_pending();
        continue;
      }
      if (!visit(it->path())) it.disable_recursion_pending();
    }
  }

  std::sort(ws.packages.begin(), ws.packages.end(),
            [](const auto& a, const auto& b) { return a.name < b.name; });
  std::sort(ws.ignored_dirs.begin(), ws.ignored_dirs.end());
  for (std::size_t i = 1; i < ws.packages.size(); ++i) {
    if (ws.packages[i].name == ws.packages[i - 1].name) {
      throw Error(ErrorCode::DuplicatePackageName,
                  "package '" + ws.packages[i].name + "' found in both '" + ws.packages[i - 1].source_dir.string() +
                      "' and '" + ws.packages[i].source_dir.string() + "'");
    }
  }
  if (ws.packages.empty()) {
    throw Error(ErrorCode::EmptyWorkspace, "no package.xml found under '" + root.string() + "'");
  }
  return ws;
}

std::set<std::string> internal_package_names(const Workspace& ws) {
  std::set<std::string> names;
  for (const auto& p : ws.packages) names.insert(p.name);
  return names;
}

}  // namespace forge::manifest
