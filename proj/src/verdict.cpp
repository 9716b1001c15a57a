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

#include "dexlens/verdict.hpp"

#include <algorithm>
#include <cctype>

namespace dexlens {

namespace {

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$' || c == '>';
}

bool is_tag_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == ' ' || c == '-' || c == '&' || c == '/' || c == '\'';
}

constexpr std::size_t kMaxTagLength = 64;

struct Phrase {
  std::string text;
  std::size_t open;   // index of '('
  std::size_t close;  // index of ')'
};

std::vector<Phrase> scan_phrases(std::string_view text) {
  std::vector<Phrase> out;
  std::size_t at = 0;
  while ((at = text.find('(', at)) != std::string_view::npos) {
    std::size_t open = at++;
    if (open > 0 && is_ident_char(text[open - 1])) continue;
    std::size_t close = open + 1;
    while (close < text.size() && text[close] != ')' && text[close] != '(' && close - open <= kMaxTagLength + 1) {
      ++close;
    }
    if (close >= text.size() || text[close] != ')') continue;
    std::string_view inner = text.substr(open + 1, close - open - 1);
    if (inner.empty() || inner.size() > kMaxTagLength) continue;
    if (!std::isalpha(static_cast<unsigned char>(inner.front()))) continue;
    if (!std::all_of(inner.begin(), inner.end(), is_tag_char)) continue;
    std::string collapsed;
    for (char c : inner) {
      if (c == ' ' && (collapsed.empty() || collapsed.back() == ' ')) continue;
      collapsed.push_back(c);
    }
    while (!collapsed.empty() && collapsed.back() == ' ') collapsed.pop_back();
    out.push_back(Phrase{collapsed, open, close});
    at = close + 1;
  }
  return out;
}

bool joinable_gap(std::string_view gap) {
  std::string g = normalize_phrase(gap);
  return g.empty() || g == "and" || g == "&";
}

bool is_sentinel(const std::string& normalized, Label& label) {
  if (normalized == "malware") {
    label = Label::Malware;
    return true;
  }
  if (normalized == "benign") {
    label = Label::Benign;
    return true;
  }
  return false;
}

}  // namespace

std::string normalize_phrase(std::string_view phrase) {
  std::string out;
  for (char c : phrase) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
    } else {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

CanonicalTagTable::CanonicalTagTable() {
  using namespace tags;
  auto add = [&](std::string_view canonical, std::initializer_list<std::string_view> extra) {
    std::string c(canonical);
    entries_[c].insert(normalize_phrase(c));
    for (auto s : extra) entries_[c].insert(normalize_phrase(s));
    for (const auto& s : entries_[c]) by_surface_[s] = c;
  };
  add(kRooting, {"root exploit"});
  add(kPrivilegeEscalation, {"Privilege Escalation & Control", "Privilege Escalation"});
  add(kStealth, {"Stealth & Resource Exploitation", "Steal and Resource Exploitation"});
  add(kDynamicCode, {"Dynamic Code Loading"});
  add(kObfuscatedCode, {"Obfuscation", "Code Obfuscation"});
  add(kSystemModification, {"Modification of Critical System Component", "System Modification"});
  add(kCodeExecutionManipulation, {"Code Execution Manipulations"});
  add(kRootAccess, {});
  add(kDataExfiltration, {"Exfiltration", "Data Theft"});

  auto link = [&](std::string_view a, std::initializer_list<std::string_view> bs) {
    for (auto b : bs) related_[std::string(a)].insert(std::string(b));
  };
  link(kRooting, {kRootAccess, kSystemModification, kDynamicCode, kPrivilegeEscalation});
  link(kPrivilegeEscalation, {kRooting, kRootAccess, kSystemModification});
  link(kRootAccess, {kRooting, kPrivilegeEscalation});
  link(kCodeExecutionManipulation, {kDynamicCode, kObfuscatedCode, kSystemModification});
  link(kDynamicCode, {kCodeExecutionManipulation});
  link(kObfuscatedCode, {kCodeExecutionManipulation});
  link(kStealth, {kDataExfiltration, kObfuscatedCode});
  link(kDataExfiltration, {kStealth});
  link(kSystemModification, {kPrivilegeEscalation, kRooting});

  const std::vector<std::string> root = {"\"su\"", "Root", "root", "/system/bin", "/system/xbin",
                                         "java.lang.Runtime.exec"};
  const std::vector<std::string> dynamic = {"DexClassLoader", "PathClassLoader", "loadClass", "ClassLoader"};
  const std::vector<std::string> reflect = {"java.lang.reflect.", "java.lang.Class.forName", "getMethod",
                                            "getDeclaredMethod", "setAccessible"};
  const std::vector<std::string> system = {"/system/", "mount", "chmod"};
  const std::vector<std::string> exfil = {"getDeviceId", "getSubscriberId", "getLine1Number", "sendTextMessage",
                                          "java.net.", "content://sms"};
  keywords_[std::string(kRooting)] = root;
  keywords_[std::string(kPrivilegeEscalation)] = root;
  keywords_[std::string(kRootAccess)] = root;
  keywords_[std::string(kDynamicCode)] = dynamic;
  keywords_[std::string(kObfuscatedCode)] = reflect;
  keywords_[std::string(kSystemModification)] = system;
  std::vector<std::string> cem = dynamic;
  cem.insert(cem.end(), reflect.begin(), reflect.end());
  cem.push_back("java.lang.Runtime.exec");
  keywords_[std::string(kCodeExecutionManipulation)] = cem;
  keywords_[std::string(kDataExfiltration)] = exfil;
  std::vector<std::string> stealth = exfil;
  stealth.push_back("setComponentEnabledSetting");
  stealth.push_back("WakeLock");
  keywords_[std::string(kStealth)] = stealth;
}

const CanonicalTagTable& CanonicalTagTable::instance() {
  static const CanonicalTagTable table;
  return table;
}

std::vector<std::string> CanonicalTagTable::canonical_tags() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_) out.push_back(k);
  return out;
}

std::optional<std::string> CanonicalTagTable::canonicalize(std::string_view phrase) const {
  auto it = by_surface_.find(normalize_phrase(phrase));
  if (it == by_surface_.end()) return std::nullopt;
  return it->second;
}

const std::set<std::string>& CanonicalTagTable::related(std::string_view tag) const {
  static const std::set<std::string> none;
  auto it = related_.find(std::string(tag));
  return it == related_.end() ? none : it->second;
}

const std::vector<std::string>& CanonicalTagTable::keywords(std::string_view tag) const {
  static const std::vector<std::string> none;
  auto it = keywords_.find(std::string(tag));
  return it == keywords_.end() ? none : it->second;
}

Verdict parse_tags(std::string_view text) {
  const auto& table = CanonicalTagTable::instance();
  Verdict v;
  bool malware = false, benign = false;
  auto phrases = scan_phrases(text);
  for (std::size_t i = 0; i < phrases.size(); ++i) {
    std::string phrase = phrases[i].text;
    if (i + 1 < phrases.size()) {
      std::string_view gap = text.substr(phrases[i].close + 1, phrases[i + 1].open - phrases[i].close - 1);
      if (joinable_gap(gap)) {
        std::string joined = phrase + " and " + phrases[i + 1].text;
        if (table.canonicalize(joined)) {
          phrase = joined;
          ++i;
        }
      }
    }
    Label label;
    if (is_sentinel(normalize_phrase(phrase), label)) {
      (label == Label::Malware ? malware : benign) = true;
      continue;
    }
    if (auto canonical = table.canonicalize(phrase)) {
      v.tags.insert(*canonical);
    } else {
      v.tags.insert(phrase);
    }
  }
  if (malware) {
    v.label = Label::Malware;
    if (benign) v.warnings.push_back("Ambiguous: both (MALWARE) and (BENIGN) present; MALWARE wins");
  } else if (benign) {
    v.label = Label::Benign;
  }
  return v;
}

std::string serialize(const Verdict& verdict) {
  std::string out;
  auto append = [&](std::string_view t) {
    if (!out.empty()) out += "; ";
    out += '(';
    out += t;
    out += ')';
  };
  if (verdict.label != Label::Unknown) append(label_name(verdict.label));
  for (const auto& t : verdict.tags) append(t);
  return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    std::size_t b = current.find_first_not_of(" \t\r");
    if (b != std::string::npos) out.push_back(current.substr(b));
    current.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\n') {
      flush();
      continue;
    }
    current.push_back(c);
    if ((c == '.' || c == '!' || c == '?') && (i + 1 == text.size() || text[i + 1] == ' ' || text[i + 1] == '\n')) {
      flush();
    }
  }
  flush();
  return out;
}

std::string excerpt_for(std::string_view text, const std::set<std::string>& tags) {
  const auto& table = CanonicalTagTable::instance();
  std::vector<std::string> forms;
  for (const auto& t : tags) {
    auto it = table.entries().find(t);
    if (it == table.entries().end()) {
      forms.push_back(normalize_phrase(t));
    } else {
      forms.insert(forms.end(), it->second.begin(), it->second.end());
    }
  }
  for (const auto& sentence : split_sentences(text)) {
    std::string norm = normalize_phrase(sentence);
    for (const auto& f : forms) {
      if (!f.empty() && norm.find(f) != std::string::npos) return sentence;
    }
  }
  return {};
}

}  // namespace dexlens
