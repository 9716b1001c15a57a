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

#include "dexlens/prompt.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>

#include "json.hpp"

namespace dexlens {

namespace {

constexpr std::string_view kTierFiles[] = {"function", "class", "package"};

std::string_view tier_slug(Tier tier) { return kTierFiles[static_cast<int>(tier)]; }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::TemplateError, "cannot read template file " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string trim_trailing_newlines(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

std::vector<std::string> read_blocks(const std::filesystem::path& dir) {
  std::vector<std::string> blocks;
  if (!std::filesystem::is_directory(dir)) return blocks;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) blocks.push_back(trim_trailing_newlines(read_file(f)));
  return blocks;
}

struct Placeholder {
  std::size_t begin;
  std::size_t end;  // one past the closing braces
  std::string name;
};

std::vector<Placeholder> scan_placeholders(std::string_view tpl) {
  std::vector<Placeholder> out;
  std::size_t at = 0;
  while ((at = tpl.find("{{", at)) != std::string_view::npos) {
    std::size_t close = tpl.find("}}", at + 2);
    if (close == std::string_view::npos) fail(Errc::TemplateError, "unterminated placeholder");
    out.push_back(Placeholder{at, close + 2, std::string(tpl.substr(at + 2, close - at - 2))});
    at = close + 2;
  }
  return out;
}

const std::set<std::string>& allowed_placeholders(Tier tier) {
  static const std::set<std::string> function = {"class_name", "functions", "few_shot", "knowledge"};
  static const std::set<std::string> cls = {"class_name", "summaries", "few_shot", "knowledge"};
  static const std::set<std::string> package = {"package_name", "summaries", "few_shot", "knowledge",
                                                "external_knowledge"};
  switch (tier) {
    case Tier::Function: return function;
    case Tier::Class: return cls;
    case Tier::Package: return package;
  }
  return function;
}

std::string payload_placeholder(Tier tier) { return tier == Tier::Function ? "functions" : "summaries"; }

void validate_template(const std::string& tpl, Tier tier, const std::string& where) {
  int payload = 0;
  for (const auto& p : scan_placeholders(tpl)) {
    if (!allowed_placeholders(tier).count(p.name)) {
      fail(Errc::TemplateError, where + ": unknown placeholder {{" + p.name + "}}");
    }
    payload += p.name == payload_placeholder(tier);
  }
  if (payload != 1) {
    fail(Errc::TemplateError, where + ": {{" + payload_placeholder(tier) + "}} must appear exactly once");
  }
  if (tier == Tier::Package &&
      (tpl.find("(MALWARE)") == std::string::npos || tpl.find("(BENIGN)") == std::string::npos)) {
    fail(Errc::TemplateError, where + ": package template must name both sentinels (MALWARE) and (BENIGN)");
  }
}

/// Single-pass substitution; substituted values are never rescanned. A placeholder that
/// fills a whole line and expands to nothing removes the line.
std::string substitute(std::string_view tpl, const std::map<std::string, std::string_view>& values) {
  std::string out;
  std::size_t at = 0;
  for (const auto& p : scan_placeholders(tpl)) {
    auto it = values.find(p.name);
    std::string_view value = it == values.end() ? std::string_view() : it->second;
    bool line_start = p.begin == 0 || tpl[p.begin - 1] == '\n';
    bool line_end = p.end < tpl.size() && tpl[p.end] == '\n';
    out.append(tpl.substr(at, p.begin - at));
    at = p.end;
    if (value.empty() && line_start && line_end) {
      ++at;
      continue;
    }
    out.append(value);
  }
  out.append(tpl.substr(at));
  return out;
}

std::string join_blocks(const std::vector<std::string>& blocks) {
  std::string out;
  for (const auto& b : blocks) {
    if (!out.empty()) out += "\n\n";
    out += b;
  }
  return out;
}

std::string render_few_shot(const std::vector<FewShotExample>& examples) {
  std::string out;
  for (const auto& ex : examples) {
    if (!out.empty()) out += "\n\n";
    out += "Example input:\n" + ex.input + "\nExample output:\n" + ex.output;
  }
  return out;
}

}  // namespace

std::optional<Tier> parse_tier(std::string_view text) {
  for (Tier t : {Tier::Function, Tier::Class, Tier::Package}) {
    if (text == tier_name(t)) return t;
  }
  return std::nullopt;
}

std::optional<Scope> parse_scope(std::string_view text) {
  for (Scope s : kAllScopes) {
    if (text == scope_slug(s) || text == scope_name(s)) return s;
  }
  return std::nullopt;
}

std::string package_node_id(std::string_view package_name) { return "P:" + std::string(package_name); }

std::string class_node_id(std::string_view class_name) { return "C:" + std::string(class_name); }

std::string function_node_id(std::string_view class_name, std::string_view signature) {
  return "F:" + std::string(class_name) + "->" + std::string(signature);
}

const std::string& TemplateSet::tier_template(Tier tier) const {
  switch (tier) {
    case Tier::Function: return function_template;
    case Tier::Class: return class_template;
    case Tier::Package: return package_template;
  }
  return function_template;
}

std::vector<FewShotExample> parse_few_shot(std::string_view text) {
  std::vector<FewShotExample> out;
  std::string* target = nullptr;
  std::size_t at = 0;
  while (at <= text.size()) {
    std::size_t nl = text.find('\n', at);
    std::string_view line = text.substr(at, nl == std::string_view::npos ? std::string_view::npos : nl - at);
    if (line == "--- input") {
      out.emplace_back();
      target = &out.back().input;
    } else if (line == "--- output") {
      if (out.empty()) fail(Errc::TemplateError, "few-shot output without input");
      target = &out.back().output;
    } else if (target) {
      if (!target->empty()) *target += '\n';
      *target += line;
    } else if (!line.empty()) {
      fail(Errc::TemplateError, "few-shot text outside an input/output block");
    }
    if (nl == std::string_view::npos) break;
    at = nl + 1;
  }
  for (auto& ex : out) {
    ex.input = trim_trailing_newlines(ex.input);
    ex.output = trim_trailing_newlines(ex.output);
    if (ex.input.empty() || ex.output.empty()) fail(Errc::TemplateError, "few-shot example missing input or output");
  }
  return out;
}

TemplateLibrary TemplateLibrary::load(const std::filesystem::path& dir) {
  TemplateLibrary lib;
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
    lib.version_ = manifest.at("version").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::TemplateError, "bad template manifest: " + std::string(e.what()));
  }
  if (lib.version_.empty()) fail(Errc::TemplateError, "template manifest has an empty version");

  for (Scope scope : kAllScopes) {
    auto sdir = dir / std::string(scope_slug(scope));
    TemplateSet& set = lib.sets_[static_cast<std::size_t>(scope)];
    set.scope = scope;
    set.version = lib.version_;
    set.system_text = trim_trailing_newlines(read_file(sdir / "system.txt"));
    set.function_template = trim_trailing_newlines(read_file(sdir / "function.txt"));
    set.class_template = trim_trailing_newlines(read_file(sdir / "class.txt"));
    set.package_template = trim_trailing_newlines(read_file(sdir / "package.txt"));
    for (Tier tier : {Tier::Function, Tier::Class, Tier::Package}) {
      std::string where = std::string(scope_slug(scope)) + "/" + std::string(tier_slug(tier)) + ".txt";
      validate_template(set.tier_template(tier), tier, where);
      auto shots = sdir / ("few_shot_" + std::string(tier_slug(tier)) + ".txt");
      if (std::filesystem::exists(shots)) set.few_shot[tier] = parse_few_shot(read_file(shots));
    }
    set.knowledge_blocks = read_blocks(sdir / "knowledge");
    set.external_blocks = read_blocks(sdir / "external");
    if (scope == Scope::Vanilla && (!set.knowledge_blocks.empty() || !set.external_blocks.empty())) {
      fail(Errc::TemplateError, "the vanilla scope must not carry knowledge blocks");
    }
  }
  return lib;
}

std::size_t TierBudgets::for_tier(Tier tier) const {
  switch (tier) {
    case Tier::Function: return function;
    case Tier::Class: return class_;
    case Tier::Package: return package;
  }
  return function;
}

PromptEngine::PromptEngine(const TemplateLibrary& library, TierBudgets budgets)
    : library_(library), budgets_(budgets) {}

std::string PromptEngine::render_text(Scope scope, Tier tier, std::string_view subject,
                                      std::string_view payload) const {
  const TemplateSet& set = library_.set(scope);
  std::string few_shot;
  if (auto it = set.few_shot.find(tier); it != set.few_shot.end()) few_shot = render_few_shot(it->second);
  std::string knowledge = join_blocks(set.knowledge_blocks);
  std::string external = tier == Tier::Package ? join_blocks(set.external_blocks) : std::string();
  std::map<std::string, std::string_view> values = {
      {"few_shot", few_shot}, {"knowledge", knowledge}, {"external_knowledge", external},
      {payload_placeholder(tier), payload}};
  values[tier == Tier::Package ? "package_name" : "class_name"] = subject;
  return substitute(set.tier_template(tier), values);
}

namespace {

std::string payload_head(Tier tier) { return std::string(kInputBegin) + std::string(tier_slug(tier)) + ">>>\n"; }

}  // namespace

PromptInstance PromptEngine::render(Scope scope, Tier tier, std::string_view subject,
                                    const std::vector<PromptSection>& sections) const {
  if (sections.empty()) fail(Errc::PreconditionViolated, "prompt needs at least one input section");
  std::string payload = payload_head(tier);
  for (const auto& s : sections) {
    payload += kSectionPrefix;
    payload += s.heading;
    payload += '\n';
    payload += s.body;
    payload += "\n\n";
  }
  payload += kInputEnd;

  PromptInstance p;
  p.scope = scope;
  p.tier = tier;
  p.system_text = library_.set(scope).system_text;
  p.text = render_text(scope, tier, subject, payload);
  p.template_version = library_.version();
  p.estimated_tokens = (p.system_text.size() + p.text.size() + 3) / 4;
  std::size_t budget = budgets_.for_tier(tier);
  if (p.estimated_tokens > budget) {
    fail(Errc::BudgetExceeded, std::string(tier_name(tier)) + " prompt needs " + std::to_string(p.estimated_tokens) +
                                   " tokens, budget is " + std::to_string(budget));
  }
  return p;
}

std::size_t PromptEngine::fixed_bytes(Scope scope, Tier tier, std::string_view subject) const {
  std::string empty_payload = payload_head(tier) + std::string(kInputEnd);
  return library_.set(scope).system_text.size() + render_text(scope, tier, subject, empty_payload).size();
}

std::size_t PromptEngine::section_bytes(const PromptSection& section) {
  return kSectionPrefix.size() + section.heading.size() + 1 + section.body.size() + 2;
}

std::size_t PromptEngine::max_single_body_bytes(Scope scope, Tier tier, std::string_view subject,
                                                std::string_view heading) const {
  std::size_t limit = budgets_.for_tier(tier) * 4;
  std::size_t overhead = fixed_bytes(scope, tier, subject) + section_bytes(PromptSection{std::string(heading), {}});
  return limit > overhead ? limit - overhead : 0;
}

PromptSection PromptEngine::function_section(const FunctionUnit& unit) {
  return PromptSection{unit.signature, unit.rendered_text};
}

PromptSection PromptEngine::summary_section(const SummaryNode& node) {
  std::string heading = node.subject_name;
  if (node.alias) heading += " (proposed name: " + *node.alias + ")";
  return PromptSection{heading, node.text};
}

PromptInstance PromptEngine::render_function_prompt(Scope scope, std::string_view class_name,
                                                    const std::vector<const FunctionUnit*>& functions) const {
  if (functions.empty()) fail(Errc::PreconditionViolated, "function prompt needs at least one function");
  std::vector<PromptSection> sections;
  for (const FunctionUnit* f : functions) sections.push_back(function_section(*f));
  return render(scope, Tier::Function, class_name, sections);
}

PromptInstance PromptEngine::render_class_prompt(Scope scope, std::string_view class_name,
                                                 const std::vector<const SummaryNode*>& function_summaries) const {
  if (function_summaries.empty()) fail(Errc::PreconditionViolated, "class prompt needs at least one function summary");
  std::vector<PromptSection> sections;
  for (const SummaryNode* n : function_summaries) {
    if (n->tier != Tier::Function) fail(Errc::PreconditionViolated, "class prompt input must be FUNCTION nodes");
    sections.push_back(summary_section(*n));
  }
  return render(scope, Tier::Class, class_name, sections);
}

PromptInstance PromptEngine::render_package_prompt(Scope scope, std::string_view package_name,
                                                   const std::vector<const SummaryNode*>& class_summaries) const {
  if (class_summaries.empty()) fail(Errc::PreconditionViolated, "package prompt needs at least one class summary");
  std::vector<PromptSection> sections;
  for (const SummaryNode* n : class_summaries) {
    if (n->tier != Tier::Class) fail(Errc::PreconditionViolated, "package prompt input must be CLASS nodes");
    sections.push_back(summary_section(*n));
  }
  return render(scope, Tier::Package, package_name, sections);
}

std::string_view prompt_payload(std::string_view prompt) {
  std::size_t begin = prompt.find(kInputBegin);
  if (begin == std::string_view::npos) return {};
  std::size_t line_end = prompt.find('\n', begin);
  if (line_end == std::string_view::npos) return {};
  std::size_t end = prompt.rfind(kInputEnd);
  if (end == std::string_view::npos || end <= line_end) return {};
  return prompt.substr(line_end + 1, end - line_end - 1);
}

std::optional<Tier> prompt_tier(std::string_view prompt) {
  std::size_t begin = prompt.find(kInputBegin);
  if (begin == std::string_view::npos) return std::nullopt;
  begin += kInputBegin.size();
  std::size_t end = prompt.find(">>>", begin);
  if (end == std::string_view::npos) return std::nullopt;
  std::string_view slug = prompt.substr(begin, end - begin);
  for (Tier t : {Tier::Function, Tier::Class, Tier::Package}) {
    if (slug == tier_slug(t)) return t;
  }
  return std::nullopt;
}

std::vector<PromptSection> split_sections(std::string_view text, std::string* preamble) {
  std::vector<PromptSection> out;
  std::string pre;
  std::size_t at = 0;
  while (at < text.size()) {
    std::size_t nl = text.find('\n', at);
    std::string_view line = text.substr(at, nl == std::string_view::npos ? std::string_view::npos : nl - at);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.starts_with(kSectionPrefix)) {
      std::string_view heading = line.substr(kSectionPrefix.size());
      while (!heading.empty() && heading.back() == ' ') heading.remove_suffix(1);
      out.push_back(PromptSection{std::string(heading), {}});
    } else {
      std::string& body = out.empty() ? pre : out.back().body;
      body.append(line);
      body.push_back('\n');
    }
    if (nl == std::string_view::npos) break;
    at = nl + 1;
  }
  auto trim = [](std::string& s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == ' ')) s.pop_back();
    std::size_t b = s.find_first_not_of("\n");
    s.erase(0, b == std::string::npos ? s.size() : b);
  };
  for (auto& s : out) trim(s.body);
  trim(pre);
  if (preamble) *preamble = std::move(pre);
  return out;
}

}  // namespace dexlens
