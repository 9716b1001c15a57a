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
#include <atomic>
#include <cstddef>
#include <functional>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "dexlens/apk.hpp"
#include "dexlens/disasm.hpp"
#include "dexlens/llm.hpp"
#include "dexlens/node.hpp"
#include "dexlens/prompt.hpp"
#include "dexlens/verdict.hpp"

namespace dexlens {

inline constexpr std::string_view kNoExecutableCode = "no executable code";
inline constexpr std::string_view kSummaryUnavailable = "summary unavailable";
inline constexpr std::string_view kTruncatedMarker = "[TRUNCATED]";

struct SummarizerConfig {
  std::string model_id = "mock";
  double temperature = 0.0;
  std::size_t max_output_tokens = 4096;
  /// Classes (then packages) summarized in parallel.
  std::size_t concurrency = 4;
};

struct ReportStats {
  std::size_t prompts = 0;
  /// Responses served from the cache. Not persisted: it depends on cache state, not on the sample.
  std::size_t cached = 0;
  std::size_t estimated_tokens = 0;
  std::array<std::size_t, 3> prompts_by_tier{};  // indexed by Tier

  bool operator==(const ReportStats& o) const {
    return prompts == o.prompts && estimated_tokens == o.estimated_tokens && prompts_by_tier == o.prompts_by_tier;
  }
};

/// One sample's summary hierarchy.
///
/// `nodes` is flat and ordered: each package node, then each of its class nodes
/// followed by that class's function nodes.
struct AnalysisReport {
  SampleId sample;
  Scope scope = Scope::Vanilla;
  std::string model_id;
  std::string template_version;
  std::vector<std::string> packages;  // package node ids, sorted
  std::vector<SummaryNode> nodes;
  Verdict verdict;
  Warnings warnings;
  bool incomplete = false;  // more than half of the packages failed
  ReportStats stats;

  const SummaryNode* find(std::string_view id) const;
  /// Nodes of one tier, in report order.
  std::vector<const SummaryNode*> tier_nodes(Tier tier) const;

  bool operator==(const AnalysisReport& o) const {
    return sample == o.sample && scope == o.scope && model_id == o.model_id &&
           template_version == o.template_version && packages == o.packages && nodes == o.nodes &&
           verdict == o.verdict && verdict.warnings == o.verdict.warnings && warnings == o.warnings &&
           incomplete == o.incomplete && stats == o.stats;
  }
};

/// Called for every outbound prompt, possibly from several threads at once.
using PromptObserver = std::function<void(const PromptInstance&)>;

/// Bottom-up summarization: functions, classes, packages, then an APK-level verdict.
class Summarizer {
 public:
  Summarizer(const PromptEngine& engine, Completer& completer, SummarizerConfig config = {});

  void set_prompt_observer(PromptObserver observer) { observer_ = std::move(observer); }

  /// One FUNCTION node per FunctionUnit, in class order.
  std::vector<SummaryNode> summarize_functions(const ClassUnit& cls, Scope scope, Warnings* warnings = nullptr,
                                               ReportStats* stats = nullptr) const;

  SummaryNode summarize_class(const ClassUnit& cls, const std::vector<SummaryNode>& function_nodes, Scope scope,
                              Warnings* warnings = nullptr, ReportStats* stats = nullptr) const;

  SummaryNode summarize_package(const PackageUnit& package, const std::vector<SummaryNode>& class_nodes, Scope scope,
                                Warnings* warnings = nullptr, ReportStats* stats = nullptr) const;

  AnalysisReport summarize_apk(const SampleId& sample, const std::vector<PackageUnit>& packages, Scope scope) const;

  const PromptEngine& engine() const { return engine_; }
  const SummarizerConfig& config() const { return config_; }

 private:
  struct Context;

  std::string ask(Context& ctx, const PromptInstance& prompt, std::string* key) const;
  std::string reduce(Context& ctx, Scope scope, Tier tier, std::string_view subject,
                     std::vector<PromptSection> sections, std::string* key) const;
  std::vector<SummaryNode> functions_impl(Context& ctx, const ClassUnit& cls, Scope scope) const;
  SummaryNode class_impl(Context& ctx, const ClassUnit& cls, const std::vector<SummaryNode>& function_nodes,
                         Scope scope) const;
  SummaryNode package_impl(Context& ctx, const PackageUnit& package, const std::vector<SummaryNode>& class_nodes,
                           Scope scope) const;

  const PromptEngine& engine_;
  Completer& completer_;
  SummarizerConfig config_;
  PromptObserver observer_;
};

/// APK label from package labels: any MALWARE wins, all BENIGN is BENIGN, otherwise UNKNOWN.
Label aggregate_labels(const std::vector<Label>& package_labels);

/// "ALIAS: Name" line of a class response, if present and a plausible identifier.
std::optional<std::string> parse_alias(std::string_view text);

/// Checks the coverage and tier-ordering invariants. Returns one message per violation.
std::vector<std::string> check_hierarchy(const AnalysisReport& report, const std::vector<PackageUnit>& packages);

}  // namespace dexlens
