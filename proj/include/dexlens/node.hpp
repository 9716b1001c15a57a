/*
 * Copyright (C) 2026 The dexlens Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dexlens/disasm.hpp"
#include "dexlens/label.hpp"

namespace dexlens {

enum class Tier { Function, Class, Package };

constexpr std::string_view tier_name(Tier t) {
  switch (t) {
    case Tier::Function: return "FUNCTION";
    case Tier::Class: return "CLASS";
    case Tier::Package: return "PACKAGE";
  }
  return "FUNCTION";
}

std::optional<Tier> parse_tier(std::string_view text);

enum class Scope { Vanilla, ApiScoped, MalwareScoped };

constexpr std::string_view scope_name(Scope s) {
  switch (s) {
    case Scope::Vanilla: return "VANILLA";
    case Scope::ApiScoped: return "API_SCOPED";
    case Scope::MalwareScoped: return "MALWARE_SCOPED";
  }
  return "VANILLA";
}

/// Short form used on the command line and as the template directory name.
constexpr std::string_view scope_slug(Scope s) {
  switch (s) {
    case Scope::Vanilla: return "vanilla";
    case Scope::ApiScoped: return "api";
    case Scope::MalwareScoped: return "malware";
  }
  return "vanilla";
}

/// Accepts either the slug or the upper-case name.
std::optional<Scope> parse_scope(std::string_view text);

inline constexpr Scope kAllScopes[] = {Scope::Vanilla, Scope::ApiScoped, Scope::MalwareScoped};

/// One tier's summary in the hierarchy.
///
/// Ids: "P:<package>", "C:<class>", "F:<class>-><signature>".
struct SummaryNode {
  std::string id;
  Tier tier = Tier::Function;
  std::string subject_name;           // signature, dotted class name, or package name
  std::optional<std::string> alias;   // model-proposed readable name, advisory only
  std::string text;
  std::set<std::string> tags;
  Label label = Label::Unknown;       // sentinel found in the text, if any
  std::vector<std::string> children;
  std::optional<SourceRef> source_ref;
  std::string code;                   // FUNCTION tier: rendered bytecode the summary was made from
  std::string prompt_key;
  bool failed = false;

  bool operator==(const SummaryNode&) const = default;
};

std::string package_node_id(std::string_view package_name);
std::string class_node_id(std::string_view class_name);
std::string function_node_id(std::string_view class_name, std::string_view signature);

}  // namespace dexlens
