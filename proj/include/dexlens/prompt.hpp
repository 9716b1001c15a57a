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

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dexlens/disasm.hpp"
#include "dexlens/node.hpp"

namespace dexlens {

/// ceil(bytes / 4).
constexpr std::size_t estimate_tokens(std::string_view text) { return (text.size() + 3) / 4; }

struct FewShotExample {
  std::string input;
  std::string output;
};

struct TemplateSet {
  Scope scope = Scope::Vanilla;
  std::string version;
  std::string system_text;
  std::string function_template;
  std::string class_template;
  std::string package_template;
  std::map<Tier, std::vector<FewShotExample>> few_shot;
  /// Context injected at every tier. Empty for VANILLA.
  std::vector<std::string> knowledge_blocks;
  /// External knowledge injected at the package tier only. Empty for VANILLA.
  std::vector<std::string> external_blocks;

  const std::string& tier_template(Tier tier) const;
};

/// Three template sets loaded from an asset directory:
///
///   manifest.json               {"version": "..."}
///   <scope>/system.txt
///   <scope>/{function,class,package}.txt
///   <scope>/few_shot_{function,class,package}.txt   "--- input" / "--- output" blocks
///   <scope>/knowledge/*.txt     one block per file, sorted by name
///   <scope>/external/*.txt
class TemplateLibrary {
 public:
  static TemplateLibrary load(const std::filesystem::path& dir);

  const TemplateSet& set(Scope scope) const { return sets_[static_cast<std::size_t>(scope)]; }
  const std::string& version() const { return version_; }

 private:
  std::string version_;
  std::array<TemplateSet, 3> sets_;
};

/// Parses "--- input" / "--- output" blocks.
std::vector<FewShotExample> parse_few_shot(std::string_view text);

struct TierBudgets {
  std::size_t function = 24000;
  std::size_t class_ = 16000;
  std::size_t package = 24000;

  std::size_t for_tier(Tier tier) const;
};

struct PromptInstance {
  Scope scope = Scope::Vanilla;
  Tier tier = Tier::Function;
  std::string system_text;
  std::string text;  // user message
  std::string template_version;
  std::size_t estimated_tokens = 0;  // system + user
};

/// One "### <heading>" block of the prompt payload.
struct PromptSection {
  std::string heading;
  std::string body;
};

/// Payload markers. Everything between them is sample-derived input.
inline constexpr std::string_view kInputBegin = "<<<INPUT tier=";
inline constexpr std::string_view kInputEnd = "<<<END INPUT>>>";
inline constexpr std::string_view kSectionPrefix = "### ";

class PromptEngine {
 public:
  PromptEngine(const TemplateLibrary& library, TierBudgets budgets = {});

  PromptInstance render_function_prompt(Scope scope, std::string_view class_name,
                                        const std::vector<const FunctionUnit*>& functions) const;
  PromptInstance render_class_prompt(Scope scope, std::string_view class_name,
                                     const std::vector<const SummaryNode*>& function_summaries) const;
  PromptInstance render_package_prompt(Scope scope, std::string_view package_name,
                                       const std::vector<const SummaryNode*>& class_summaries) const;

  /// Renders from raw sections; throws BudgetExceeded past the tier budget.
  PromptInstance render(Scope scope, Tier tier, std::string_view subject,
                        const std::vector<PromptSection>& sections) const;

  /// Bytes of system + user text with zero sections.
  std::size_t fixed_bytes(Scope scope, Tier tier, std::string_view subject) const;
  /// Bytes one section adds to the user text.
  static std::size_t section_bytes(const PromptSection& section);
  /// Largest section body that fits alone under the tier budget.
  std::size_t max_single_body_bytes(Scope scope, Tier tier, std::string_view subject, std::string_view heading) const;

  static PromptSection function_section(const FunctionUnit& unit);
  static PromptSection summary_section(const SummaryNode& node);

  const TierBudgets& budgets() const { return budgets_; }
  const TemplateLibrary& library() const { return library_; }

 private:
  std::string render_text(Scope scope, Tier tier, std::string_view subject, std::string_view payload) const;

  const TemplateLibrary& library_;
  TierBudgets budgets_;
};

/// Returns the text between the payload markers (empty if absent).
std::string_view prompt_payload(std::string_view prompt);

/// Tier named by the payload marker, if present.
std::optional<Tier> prompt_tier(std::string_view prompt);

/// Splits text into "### <heading>" sections. Text before the first heading goes to `preamble`.
std::vector<PromptSection> split_sections(std::string_view text, std::string* preamble = nullptr);

}  // namespace dexlens
