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

#include "dexlens/summarizer.hpp"

#include <algorithm>
#include <cctype>
#include <exception>
#include <map>
#include <set>

#include "dexlens/parallel.hpp"

namespace dexlens {

struct Summarizer::Context {
  Warnings warnings;
  ReportStats stats;
};

namespace {

bool is_fatal(Errc code) {
  return code == Errc::BackendUnavailable || code == Errc::AuthFailure || code == Errc::ConfigError;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

/// Cuts `body` at a line boundary so that it plus the marker fits in `max_bytes`.
std::string truncate_body(const std::string& body, std::size_t max_bytes) {
  std::string marker = "\n" + std::string(kTruncatedMarker);
  if (max_bytes < kTruncatedMarker.size()) return {};
  if (max_bytes < marker.size()) return std::string(kTruncatedMarker);
  std::size_t keep = max_bytes - marker.size();
  std::size_t cut = body.rfind('\n', keep);
  if (cut == std::string::npos) return std::string(kTruncatedMarker);
  return body.substr(0, cut) + marker;
}

struct Packing {
  std::vector<PromptSection> sections;          // possibly truncated
  std::vector<std::vector<std::size_t>> bins;   // indices into sections
};

/// Greedy first-fit of sections into prompts of at most `limit` bytes. Oversized sections are truncated.
/// With `pair_cap`, every body is capped so that any two sections share a prompt.
Packing first_fit(std::vector<PromptSection> sections, std::size_t fixed, std::size_t limit,
                  std::string_view subject, Tier tier, bool pair_cap, Warnings& warnings) {
  if (fixed >= limit) {
    fail(Errc::BudgetExceeded, std::string(tier_name(tier)) + " template for " + std::string(subject) +
                                   " exceeds the budget before any input");
  }
  std::size_t capacity = limit - fixed;
  std::size_t section_cap = pair_cap ? capacity / 2 : capacity;
  Packing out;
  std::vector<std::size_t> used;
  for (auto& s : sections) {
    std::size_t bytes = PromptEngine::section_bytes(s);
    if (bytes > section_cap) {
      std::size_t overhead = PromptEngine::section_bytes(PromptSection{s.heading, {}});
      if (overhead + kTruncatedMarker.size() > section_cap) {
        fail(Errc::BudgetExceeded, "section '" + s.heading + "' of " + std::string(subject) + " cannot fit the " +
                                       std::string(tier_name(tier)) + " budget");
      }
      s.body = truncate_body(s.body, section_cap - overhead);
      bytes = PromptEngine::section_bytes(s);
      warnings.push_back(std::string(subject) + ": input '" + s.heading + "' truncated to fit the " +
                         std::string(tier_name(tier)) + " budget");
    }
    std::size_t index = out.sections.size();
    out.sections.push_back(std::move(s));
    bool placed = false;
    for (std::size_t b = 0; b < out.bins.size(); ++b) {
      if (used[b] + bytes <= capacity) {
        out.bins[b].push_back(index);
        used[b] += bytes;
        placed = true;
        break;
      }
    }
    if (!placed) {
      out.bins.push_back({index});
      used.push_back(bytes);
    }
  }
  return out;
}

std::string normalize_heading(std::string_view heading) {
  std::string h = trim(heading);
  while (h.size() >= 2 && h.front() == '`' && h.back() == '`') h = trim(std::string_view(h).substr(1, h.size() - 2));
  return h;
}

std::map<std::string, std::string> sections_by_heading(std::string_view response, std::string_view subject,
                                                        Warnings& warnings) {
  std::map<std::string, std::string> out;
  for (auto& s : split_sections(response)) {
    std::string h = normalize_heading(s.heading);
    if (!out.emplace(h, std::move(s.body)).second) {
      warnings.push_back(std::string(subject) + ": duplicate response section '" + h + "' ignored");
    }
  }
  return out;
}

SummaryNode function_node(const std::string& class_name, const FunctionUnit& f) {
  SummaryNode n;
  n.id = function_node_id(class_name, f.signature);
  n.tier = Tier::Function;
  n.subject_name = f.signature;
  n.source_ref = f.source_ref;
  n.code = f.rendered_text;
  return n;
}

void apply_text(SummaryNode& n, std::string text) {
  Verdict v = parse_tags(text);
  n.text = std::move(text);
  n.tags = std::move(v.tags);
  n.label = v.label;
}

void merge_stats(ReportStats& into, const ReportStats& from) {
  into.prompts += from.prompts;
  into.cached += from.cached;
  into.estimated_tokens += from.estimated_tokens;
  for (std::size_t i = 0; i < into.prompts_by_tier.size(); ++i) into.prompts_by_tier[i] += from.prompts_by_tier[i];
}

void append(Warnings& into, const Warnings& from) { into.insert(into.end(), from.begin(), from.end()); }

}  // namespace

const SummaryNode* AnalysisReport::find(std::string_view id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

std::vector<const SummaryNode*> AnalysisReport::tier_nodes(Tier tier) const {
  std::vector<const SummaryNode*> out;
  for (const auto& n : nodes) {
    if (n.tier == tier) out.push_back(&n);
  }
  return out;
}

Summarizer::Summarizer(const PromptEngine& engine, Completer& completer, SummarizerConfig config)
    : engine_(engine), completer_(completer), config_(std::move(config)) {}

std::string Summarizer::ask(Context& ctx, const PromptInstance& prompt, std::string* key) const {
  if (observer_) observer_(prompt);
  ChatRequest req;
  req.model_id = config_.model_id;
  req.system_text = prompt.system_text;
  req.user_text = prompt.text;
  req.temperature = config_.temperature;
  req.max_output_tokens = config_.max_output_tokens;
  ModelResponse resp = completer_.complete(req, prompt.template_version, prompt.scope, key);
  ctx.stats.prompts += 1;
  ctx.stats.prompts_by_tier[static_cast<std::size_t>(prompt.tier)] += 1;
  ctx.stats.estimated_tokens += prompt.estimated_tokens;
  if (resp.from_cache) ctx.stats.cached += 1;
  if (resp.finish_reason == FinishReason::Length) {
    ctx.warnings.push_back(std::string(tier_name(prompt.tier)) + " response cut at the output limit");
  }
  return resp.text;
}

std::string Summarizer::reduce(Context& ctx, Scope scope, Tier tier, std::string_view subject,
                               std::vector<PromptSection> sections, std::string* key) const {
  std::size_t limit = engine_.budgets().for_tier(tier) * 4;
  std::size_t fixed = engine_.fixed_bytes(scope, tier, subject);
  bool folding = false;
  for (;;) {
    Packing packing = first_fit(std::move(sections), fixed, limit, subject, tier, folding, ctx.warnings);
    if (packing.bins.size() == 1) {
      return ask(ctx, engine_.render(scope, tier, subject, packing.sections), key);
    }
    if (!folding) {
      // Retry with capped bodies so that every fold round at least halves the input.
      folding = true;
      std::size_t capacity = limit - fixed;
      bool oversized = std::any_of(packing.sections.begin(), packing.sections.end(), [&](const PromptSection& s) {
        return PromptEngine::section_bytes(s) > capacity / 2;
      });
      if (oversized) {
        sections = std::move(packing.sections);
        continue;
      }
    }
    std::vector<PromptSection> parts;
    std::size_t n = packing.bins.size();
    for (std::size_t b = 0; b < n; ++b) {
      std::vector<PromptSection> chunk;
      for (std::size_t i : packing.bins[b]) chunk.push_back(packing.sections[i]);
      std::string text = ask(ctx, engine_.render(scope, tier, subject, chunk), nullptr);
      parts.push_back(PromptSection{"part " + std::to_string(b + 1) + " of " + std::to_string(n), trim(text)});
    }
    sections = std::move(parts);
  }
}

std::vector<SummaryNode> Summarizer::functions_impl(Context& ctx, const ClassUnit& cls, Scope scope) const {
  if (cls.functions.empty()) fail(Errc::PreconditionViolated, cls.original_name + " has no functions to summarize");
  const std::string& subject = cls.original_name;
  std::vector<PromptSection> sections;
  for (const auto& f : cls.functions) sections.push_back(PromptEngine::function_section(f));

  std::size_t limit = engine_.budgets().function * 4;
  Packing packing = first_fit(std::move(sections), engine_.fixed_bytes(scope, Tier::Function, subject), limit,
                              subject, Tier::Function, false, ctx.warnings);

  std::vector<SummaryNode> nodes;
  for (const auto& f : cls.functions) nodes.push_back(function_node(subject, f));
  std::vector<bool> done(nodes.size(), false);

  for (const auto& bin : packing.bins) {
    std::vector<PromptSection> chunk;
    for (std::size_t i : bin) chunk.push_back(packing.sections[i]);
    std::string key;
    std::string text = ask(ctx, engine_.render(scope, Tier::Function, subject, chunk), &key);
    auto by_heading = sections_by_heading(text, subject, ctx.warnings);
    for (std::size_t i : bin) {
      auto it = by_heading.find(cls.functions[i].signature);
      if (it == by_heading.end()) continue;
      apply_text(nodes[i], trim(it->second));
      nodes[i].prompt_key = key;
      done[i] = true;
      by_heading.erase(it);
    }
    for (const auto& [heading, body] : by_heading) {
      ctx.warnings.push_back(subject + ": response section '" + heading + "' matches no function");
    }
  }

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (done[i]) continue;
    const std::string& sig = cls.functions[i].signature;
    ctx.warnings.push_back(subject + ": no summary for " + sig + ", asking again");
    std::string key;
    std::string text = ask(ctx, engine_.render(scope, Tier::Function, subject, {packing.sections[i]}), &key);
    Warnings ignored;
    auto by_heading = sections_by_heading(text, subject, ignored);
    nodes[i].prompt_key = key;
    if (auto it = by_heading.find(sig); it != by_heading.end()) {
      apply_text(nodes[i], trim(it->second));
    } else {
      ctx.warnings.push_back(subject + ": " + std::string(kSummaryUnavailable) + " for " + sig);
      nodes[i].text = std::string(kSummaryUnavailable);
      nodes[i].failed = true;
    }
  }
  return nodes;
}

SummaryNode Summarizer::class_impl(Context& ctx, const ClassUnit& cls, const std::vector<SummaryNode>& function_nodes,
                                   Scope scope) const {
  SummaryNode n;
  n.id = class_node_id(cls.original_name);
  n.tier = Tier::Class;
  n.subject_name = cls.original_name;
  for (const auto& f : function_nodes) {
    if (f.tier != Tier::Function) fail(Errc::PreconditionViolated, "class input must be FUNCTION nodes");
    n.children.push_back(f.id);
  }
  if (function_nodes.empty()) {
    n.text = std::string(kNoExecutableCode);
    return n;
  }
  std::vector<PromptSection> sections;
  for (const auto& f : function_nodes) sections.push_back(PromptEngine::summary_section(f));
  std::string text = reduce(ctx, scope, Tier::Class, cls.original_name, std::move(sections), &n.prompt_key);
  n.alias = parse_alias(text);
  apply_text(n, trim(text));
  return n;
}

SummaryNode Summarizer::package_impl(Context& ctx, const PackageUnit& package,
                                     const std::vector<SummaryNode>& class_nodes, Scope scope) const {
  if (class_nodes.empty()) fail(Errc::PreconditionViolated, package.package_name + " has no classes");
  SummaryNode n;
  n.id = package_node_id(package.package_name);
  n.tier = Tier::Package;
  n.subject_name = package.package_name;
  std::vector<PromptSection> sections;
  for (const auto& c : class_nodes) {
    if (c.tier != Tier::Class) fail(Errc::PreconditionViolated, "package input must be CLASS nodes");
    n.children.push_back(c.id);
    sections.push_back(PromptEngine::summary_section(c));
  }
  std::string text = reduce(ctx, scope, Tier::Package, package.package_name, std::move(sections), &n.prompt_key);
  apply_text(n, trim(text));
  if (n.label == Label::Unknown) {
    ctx.warnings.push_back(package.package_name + ": package summary carries no (MALWARE)/(BENIGN) verdict");
  }
  return n;
}

std::vector<SummaryNode> Summarizer::summarize_functions(const ClassUnit& cls, Scope scope, Warnings* warnings,
                                                         ReportStats* stats) const {
  Context ctx;
  auto out = functions_impl(ctx, cls, scope);
  if (warnings) append(*warnings, ctx.warnings);
  if (stats) merge_stats(*stats, ctx.stats);
  return out;
}

SummaryNode Summarizer::summarize_class(const ClassUnit& cls, const std::vector<SummaryNode>& function_nodes,
                                        Scope scope, Warnings* warnings, ReportStats* stats) const {
  Context ctx;
  auto out = class_impl(ctx, cls, function_nodes, scope);
  if (warnings) append(*warnings, ctx.warnings);
  if (stats) merge_stats(*stats, ctx.stats);
  return out;
}

SummaryNode Summarizer::summarize_package(const PackageUnit& package, const std::vector<SummaryNode>& class_nodes,
                                          Scope scope, Warnings* warnings, ReportStats* stats) const {
  Context ctx;
  auto out = package_impl(ctx, package, class_nodes, scope);
  if (warnings) append(*warnings, ctx.warnings);
  if (stats) merge_stats(*stats, ctx.stats);
  return out;
}

AnalysisReport Summarizer::summarize_apk(const SampleId& sample, const std::vector<PackageUnit>& packages,
                                         Scope scope) const {
  if (packages.empty()) fail(Errc::PreconditionViolated, "sample has no packages to summarize");

  struct ClassJob {
    std::size_t package;
    const ClassUnit* cls;
    Context ctx;
    std::vector<SummaryNode> functions;
    SummaryNode node;
  };
  std::vector<ClassJob> class_jobs;
  for (std::size_t p = 0; p < packages.size(); ++p) {
    for (const auto& c : packages[p].classes) class_jobs.push_back(ClassJob{p, &c, {}, {}, {}});
  }

  parallel_for(class_jobs.size(), config_.concurrency, [&](std::size_t i) {
    ClassJob& job = class_jobs[i];
    const ClassUnit& cls = *job.cls;
    try {
      if (!cls.functions.empty()) job.functions = functions_impl(job.ctx, cls, scope);
      job.node = class_impl(job.ctx, cls, job.functions, scope);
    } catch (const Error& e) {
      if (is_fatal(e.code())) throw;
      job.ctx.warnings.push_back(cls.original_name + ": class summary failed: " + e.what());
      job.functions.clear();
      for (const auto& f : cls.functions) {
        SummaryNode n = function_node(cls.original_name, f);
        n.text = std::string(kSummaryUnavailable);
        n.failed = true;
        job.functions.push_back(std::move(n));
      }
      job.node = SummaryNode{};
      job.node.id = class_node_id(cls.original_name);
      job.node.tier = Tier::Class;
      job.node.subject_name = cls.original_name;
      job.node.text = std::string(kSummaryUnavailable);
      job.node.failed = true;
      for (const auto& f : job.functions) job.node.children.push_back(f.id);
    }
  });

  struct PackageJob {
    Context ctx;
    std::vector<SummaryNode> classes;
    SummaryNode node;
  };
  std::vector<PackageJob> package_jobs(packages.size());
  for (const auto& job : class_jobs) package_jobs[job.package].classes.push_back(job.node);

  parallel_for(packages.size(), config_.concurrency, [&](std::size_t p) {
    PackageJob& job = package_jobs[p];
    try {
      job.node = package_impl(job.ctx, packages[p], job.classes, scope);
    } catch (const Error& e) {
      if (is_fatal(e.code())) throw;
      job.ctx.warnings.push_back(packages[p].package_name + ": package summary failed: " + e.what());
      job.node = SummaryNode{};
      job.node.id = package_node_id(packages[p].package_name);
      job.node.tier = Tier::Package;
      job.node.subject_name = packages[p].package_name;
      job.node.text = std::string(kSummaryUnavailable);
      job.node.failed = true;
      for (const auto& c : job.classes) job.node.children.push_back(c.id);
    }
  });

  AnalysisReport report;
  report.sample = sample;
  report.scope = scope;
  report.model_id = config_.model_id;
  report.template_version = engine_.library().version();

  std::size_t next_class = 0;
  std::size_t failed_packages = 0;
  std::vector<Label> labels;
  for (std::size_t p = 0; p < packages.size(); ++p) {
    PackageJob& pj = package_jobs[p];
    report.packages.push_back(pj.node.id);
    report.nodes.push_back(pj.node);
    labels.push_back(pj.node.label);
    if (pj.node.failed) ++failed_packages;
    report.verdict.tags.insert(pj.node.tags.begin(), pj.node.tags.end());
    while (next_class < class_jobs.size() && class_jobs[next_class].package == p) {
      ClassJob& cj = class_jobs[next_class++];
      report.nodes.push_back(std::move(cj.node));
      for (auto& f : cj.functions) report.nodes.push_back(std::move(f));
      append(report.warnings, cj.ctx.warnings);
      merge_stats(report.stats, cj.ctx.stats);
    }
    append(report.warnings, pj.ctx.warnings);
    merge_stats(report.stats, pj.ctx.stats);
  }

  report.verdict.label = aggregate_labels(labels);
  if (report.verdict.label == Label::Unknown) {
    std::size_t missing = std::count(labels.begin(), labels.end(), Label::Unknown);
    report.warnings.push_back("sample verdict UNKNOWN: " + std::to_string(missing) +
                              " package(s) without a verdict");
  }
  if (failed_packages * 2 > packages.size()) {
    report.incomplete = true;
    report.warnings.push_back("INCOMPLETE: " + std::to_string(failed_packages) + " of " +
                              std::to_string(packages.size()) + " packages failed");
  }
  return report;
}

Label aggregate_labels(const std::vector<Label>& package_labels) {
  if (package_labels.empty()) return Label::Unknown;
  bool all_benign = true;
  for (Label l : package_labels) {
    if (l == Label::Malware) return Label::Malware;
    if (l != Label::Benign) all_benign = false;
  }
  return all_benign ? Label::Benign : Label::Unknown;
}

std::optional<std::string> parse_alias(std::string_view text) {
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    if (line.size() < 6) continue;
    std::string head = line.substr(0, 6);
    std::transform(head.begin(), head.end(), head.begin(), [](unsigned char c) { return std::toupper(c); });
    if (head != "ALIAS:") continue;
    std::string name = trim(std::string_view(line).substr(6));
    while (!name.empty() && (name.back() == '.' || name.back() == ',')) name.pop_back();
    if (name.empty() || name.size() > 128) return std::nullopt;
    if (!(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_' || name[0] == '$')) return std::nullopt;
    for (char c : name) {
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$' || c == '.')) return std::nullopt;
    }
    return name;
  }
  return std::nullopt;
}

std::vector<std::string> check_hierarchy(const AnalysisReport& report, const std::vector<PackageUnit>& packages) {
  std::vector<std::string> problems;
  std::map<std::string, const SummaryNode*> by_id;
  for (const auto& n : report.nodes) {
    if (!by_id.emplace(n.id, &n).second) problems.push_back("duplicate node id " + n.id);
  }
  auto expect_children = [&](const SummaryNode& n, const std::set<std::string>& want, Tier child_tier) {
    std::set<std::string> got(n.children.begin(), n.children.end());
    if (got.size() != n.children.size()) problems.push_back(n.id + " lists a child twice");
    if (got != want) problems.push_back(n.id + " children do not cover its units");
    for (const auto& c : n.children) {
      auto it = by_id.find(c);
      if (it == by_id.end()) {
        problems.push_back(n.id + " references missing node " + c);
      } else if (it->second->tier != child_tier) {
        problems.push_back(n.id + " has child " + c + " of the wrong tier");
      }
    }
  };

  std::size_t function_nodes = 0;
  for (const auto& n : report.nodes) {
    if (n.tier != Tier::Function) continue;
    ++function_nodes;
    if (!n.children.empty()) problems.push_back(n.id + " is a FUNCTION node with children");
    if (!n.source_ref) problems.push_back(n.id + " has no source_ref");
  }
  if (function_nodes != count_functions(packages)) {
    problems.push_back("FUNCTION node count " + std::to_string(function_nodes) + " != code-bearing methods " +
                       std::to_string(count_functions(packages)));
  }

  for (const auto& p : packages) {
    auto pit = by_id.find(package_node_id(p.package_name));
    if (pit == by_id.end() || pit->second->tier != Tier::Package) {
      problems.push_back("missing PACKAGE node for " + p.package_name);
      continue;
    }
    std::set<std::string> class_ids;
    for (const auto& c : p.classes) {
      class_ids.insert(class_node_id(c.original_name));
      auto cit = by_id.find(class_node_id(c.original_name));
      if (cit == by_id.end() || cit->second->tier != Tier::Class) {
        problems.push_back("missing CLASS node for " + c.original_name);
        continue;
      }
      std::set<std::string> fn_ids;
      for (const auto& f : c.functions) fn_ids.insert(function_node_id(c.original_name, f.signature));
      expect_children(*cit->second, fn_ids, Tier::Function);
    }
    if (class_ids.empty()) problems.push_back(pit->second->id + " has no children");
    expect_children(*pit->second, class_ids, Tier::Class);
  }
  return problems;
}

}  // namespace dexlens
