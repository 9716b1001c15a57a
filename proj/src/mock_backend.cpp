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

#include <algorithm>
#include <string>
#include <vector>

#include "dexlens/llm.hpp"
#include "dexlens/prompt.hpp"
#include "dexlens/verdict.hpp"

namespace dexlens {

namespace {

bool has(std::string_view text, std::string_view needle) { return text.find(needle) != std::string_view::npos; }

struct RuleHits {
  bool dex_class_loader = false;
  bool load_class = false;
  bool exec_su = false;
  bool root_perm_api = false;
  bool system_bin = false;
  bool reflect_invoke = false;

  bool rooting() const { return exec_su || root_perm_api || system_bin; }
  bool dynamic() const { return dex_class_loader || load_class; }
};

RuleHits scan(std::string_view text) {
  RuleHits h;
  h.dex_class_loader = has(text, "DexClassLoader");
  h.load_class = has(text, "loadClass");
  h.exec_su = has(text, "Runtime.exec") && has(text, "\"su\"");
  h.root_perm_api = has(text, "RootPermApi");
  h.system_bin = has(text, "/system/bin");
  h.reflect_invoke = has(text, "java.lang.reflect.Method.invoke");
  return h;
}

std::vector<std::string> tags_for(const RuleHits& h) {
  std::vector<std::string> out;
  if (h.rooting()) {
    out.emplace_back(tags::kRooting);
    out.emplace_back(tags::kPrivilegeEscalation);
  }
  if (h.reflect_invoke) out.emplace_back(tags::kObfuscatedCode);
  if (h.dynamic()) out.emplace_back(tags::kDynamicCode);
  return out;
}

std::string join_and(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += i + 1 == parts.size() ? " and " : ", ";
    out += parts[i];
  }
  return out;
}

// Evidence sentences repeat the matched keywords so the same rules fire again one tier up.
std::string evidence(const RuleHits& h) {
  std::string out;
  if (h.rooting()) {
    std::vector<std::string> parts;
    if (h.root_perm_api) parts.push_back("references the root helper RootPermApi");
    if (h.exec_su) parts.push_back("runs \"su\" through java.lang.Runtime.exec");
    if (h.system_bin) parts.push_back("touches /system/bin");
    out += " It " + join_and(parts) + ", which indicates Rooting and Privilege Escalation and Control.";
  }
  if (h.reflect_invoke) {
    out += " It calls java.lang.reflect.Method.invoke so the real call target stays hidden, a sign of Obfuscated Code.";
  }
  if (h.dynamic()) {
    std::vector<std::string> parts;
    if (h.dex_class_loader) parts.push_back("DexClassLoader");
    if (h.load_class) parts.push_back("loadClass");
    out += " It loads code at runtime through " + join_and(parts) + ", which is Dynamic Code Execution.";
  }
  return out;
}

std::string tag_line(const std::vector<std::string>& tags) {
  std::string out;
  for (const auto& t : tags) {
    if (!out.empty()) out += ' ';
    out += "(" + t + ")";
  }
  return out;
}

std::size_t count_instructions(std::string_view body) {
  std::size_t n = 0;
  std::size_t at = 0;
  while ((at = body.find("\n  ", at)) != std::string_view::npos) {
    ++n;
    at += 3;
  }
  return n;
}

std::string method_name(std::string_view signature) {
  auto paren = signature.find('(');
  return std::string(signature.substr(0, paren));
}

/// Rule tags first, then canonical tags inherited from child summaries, without duplicates.
std::vector<std::string> aggregate_tags(std::string_view payload) {
  std::vector<std::string> out = tags_for(scan(payload));
  const auto& table = CanonicalTagTable::instance();
  for (const auto& t : parse_tags(payload).tags) {
    if (table.is_canonical(t) && std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  }
  return out;
}

std::string inherited_sentence(const std::vector<std::string>& tags, const RuleHits& hits) {
  std::vector<std::string> own = tags_for(hits);
  std::vector<std::string> extra;
  for (const auto& t : tags) {
    if (std::find(own.begin(), own.end(), t) == own.end()) extra.push_back(t);
  }
  if (extra.empty()) return {};
  return " Its parts were also tagged " + join_and(extra) + ".";
}

std::string function_reply(std::string_view payload) {
  std::string out;
  for (const auto& section : split_sections(payload)) {
    RuleHits hits = scan(section.body);
    auto tags = tags_for(hits);
    if (!out.empty()) out += "\n";
    out += "### " + section.heading + "\n";
    out += "The method " + method_name(section.heading) + " executes " +
           std::to_string(count_instructions(section.body)) + " instructions.";
    out += tags.empty() ? std::string(" No suspicious behavior was found.") : evidence(hits);
    out += "\n";
    if (!tags.empty()) out += tag_line(tags) + "\n";
  }
  return out;
}

std::string class_reply(std::string_view payload) {
  auto sections = split_sections(payload);
  RuleHits hits = scan(payload);
  auto tags = aggregate_tags(payload);
  std::string out = "The class combines " + std::to_string(sections.size()) + " summarized methods.";
  out += tags.empty() ? std::string(" No suspicious behavior was found.") : evidence(hits) + inherited_sentence(tags, hits);
  if (!tags.empty()) out += "\n" + tag_line(tags);
  return out + "\n";
}

std::string package_reply(std::string_view payload) {
  auto sections = split_sections(payload);
  RuleHits hits = scan(payload);
  auto tags = aggregate_tags(payload);
  std::string out = "The package contains " + std::to_string(sections.size()) + " summarized classes.";
  if (tags.empty()) {
    out += " No suspicious behavior was found.\nVERDICT: (BENIGN)\n";
  } else {
    out += evidence(hits) + inherited_sentence(tags, hits);
    out += "\nVERDICT: (MALWARE) " + tag_line(tags) + "\n";
  }
  return out;
}

}  // namespace

std::vector<std::string> MockBackend::rule_tags(std::string_view text) { return tags_for(scan(text)); }

ModelResponse MockBackend::complete(const ChatRequest& request) {
  ++invocations_;
  ModelResponse r;
  std::string_view payload = prompt_payload(request.user_text);
  switch (prompt_tier(request.user_text).value_or(Tier::Function)) {
    case Tier::Function: r.text = function_reply(payload); break;
    case Tier::Class: r.text = class_reply(payload); break;
    case Tier::Package: r.text = package_reply(payload); break;
  }
  return r;
}

}  // namespace dexlens
