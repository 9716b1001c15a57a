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

#include <gtest/gtest.h>

#include <mutex>
#include <random>

#include "dexlens/pipeline.hpp"
#include "dexlens/summarizer.hpp"
#include "support/fixtures.hpp"

namespace dexlens {
namespace {

const TemplateLibrary& library() {
  static const TemplateLibrary lib = TemplateLibrary::load(DEXLENS_TEMPLATES);
  return lib;
}

Errc error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::ConfigError;
}

/// Answers through a caller-supplied function.
class ScriptedBackend : public Backend {
 public:
  explicit ScriptedBackend(std::function<std::string(const ChatRequest&)> fn) : fn_(std::move(fn)) {}
  ModelResponse complete(const ChatRequest& r) override {
    ++calls;
    return ModelResponse{fn_(r), FinishReason::Stop, false, 0.0};
  }
  std::atomic<int> calls{0};

 private:
  std::function<std::string(const ChatRequest&)> fn_;
};

FunctionUnit synthetic_function(std::size_t cls, std::size_t i, const std::string& extra = {}) {
  FunctionUnit f;
  f.signature = "m" + std::to_string(i) + "()V";
  f.qualified_name = "p.C" + std::to_string(cls) + ".m" + std::to_string(i);
  f.rendered_text = ".method public m" + std::to_string(i) + "()V  registers=1\n  0000: nop";
  if (!extra.empty()) f.rendered_text += "\n  0001: " + extra;
  f.rendered_text += "\n  0002: return-void";
  f.source_ref = SourceRef{0, cls, static_cast<std::uint32_t>(i)};
  f.instruction_count = extra.empty() ? 2 : 3;
  return f;
}

ClassUnit synthetic_class(const std::string& pkg, std::size_t index, std::size_t methods) {
  ClassUnit c;
  c.original_name = pkg + ".C" + std::to_string(index);
  c.descriptor = "L" + pkg + "/C" + std::to_string(index) + ";";
  c.declaration = ".class public " + c.original_name;
  for (std::size_t i = 0; i < methods; ++i) c.functions.push_back(synthetic_function(index, i));
  return c;
}

struct Harness {
  explicit Harness(Backend& backend, TierBudgets budgets = {}, std::size_t concurrency = 4)
      : engine(library(), budgets), completer(backend, nullptr, 8), summarizer(engine, completer, config(concurrency)) {
    summarizer.set_prompt_observer([this](const PromptInstance& p) {
      std::lock_guard<std::mutex> lock(mu);
      prompts.push_back(p);
    });
  }
  static SummarizerConfig config(std::size_t concurrency) {
    SummarizerConfig c;
    c.concurrency = concurrency;
    return c;
  }
  std::size_t count(Tier tier) {
    std::lock_guard<std::mutex> lock(mu);
    return std::count_if(prompts.begin(), prompts.end(), [&](const PromptInstance& p) { return p.tier == tier; });
  }

  PromptEngine engine;
  Completer completer;
  Summarizer summarizer;
  std::mutex mu;
  std::vector<PromptInstance> prompts;
};

const ClassUnit& find_class(const std::vector<PackageUnit>& packages, const std::string& name) {
  for (const auto& p : packages) {
    for (const auto& c : p.classes) {
      if (c.original_name == name) return c;
    }
  }
  throw std::runtime_error("class not found: " + name);
}

const PackageUnit& find_package(const std::vector<PackageUnit>& packages, const std::string& name) {
  for (const auto& p : packages) {
    if (p.package_name == name) return p;
  }
  throw std::runtime_error("package not found: " + name);
}

TEST(SummarizeFunctionsTest, SmallClassIsOnePrompt) {
  MockBackend mock;
  Harness h(mock);
  ClassUnit cls = synthetic_class("p", 0, 3);
  Warnings w;
  auto nodes = h.summarizer.summarize_functions(cls, Scope::MalwareScoped, &w);
  ASSERT_EQ(nodes.size(), 3u);
  EXPECT_EQ(mock.invocations(), 1u);
  EXPECT_TRUE(w.empty());
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(nodes[i].subject_name, cls.functions[i].signature);
    EXPECT_EQ(nodes[i].id, "F:p.C0->m" + std::to_string(i) + "()V");
    EXPECT_TRUE(nodes[i].children.empty());
    ASSERT_TRUE(nodes[i].source_ref.has_value());
    EXPECT_EQ(*nodes[i].source_ref, cls.functions[i].source_ref);
    EXPECT_FALSE(nodes[i].failed);
    EXPECT_NE(nodes[i].text.find("No suspicious behavior"), std::string::npos);
    EXPECT_FALSE(nodes[i].prompt_key.empty());
  }
}

TEST(SummarizeFunctionsTest, OversizedFunctionIsTruncated) {
  PromptEngine probe(library());
  ClassUnit cls = synthetic_class("p", 0, 0);
  FunctionUnit big = synthetic_function(0, 0);
  for (int i = 0; i < 400; ++i) big.rendered_text += "\n  0003: const-string v0, \"padding line " + std::to_string(i) + "\"";
  cls.functions.push_back(big);
  std::size_t fixed = probe.fixed_bytes(Scope::MalwareScoped, Tier::Function, cls.original_name);
  TierBudgets budgets;
  budgets.function = (fixed + 2000) / 4;

  MockBackend mock;
  Harness h(mock, budgets);
  Warnings w;
  auto nodes = h.summarizer.summarize_functions(cls, Scope::MalwareScoped, &w);
  ASSERT_EQ(nodes.size(), 1u);
  ASSERT_EQ(h.prompts.size(), 1u);
  EXPECT_LE(h.prompts[0].estimated_tokens, budgets.function);
  std::string payload(prompt_payload(h.prompts[0].text));
  EXPECT_NE(payload.find("\n[TRUNCATED]\n"), std::string::npos);
  EXPECT_NE(payload.find(".method public m0()V"), std::string::npos);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_NE(w[0].find("truncated"), std::string::npos);
  EXPECT_FALSE(nodes[0].failed);
  EXPECT_EQ(nodes[0].code, big.rendered_text);
}

TEST(SummarizeFunctionsTest, BatchesUnderBudget) {
  PromptEngine probe(library());
  ClassUnit cls = synthetic_class("p", 0, 60);
  std::size_t fixed = probe.fixed_bytes(Scope::Vanilla, Tier::Function, cls.original_name);
  TierBudgets budgets;
  budgets.function = (fixed + 1200) / 4;
  MockBackend mock;
  Harness h(mock, budgets);
  auto nodes = h.summarizer.summarize_functions(cls, Scope::Vanilla);
  EXPECT_EQ(nodes.size(), 60u);
  EXPECT_GT(h.prompts.size(), 1u);
  for (const auto& p : h.prompts) EXPECT_LE(p.estimated_tokens, budgets.function);
  for (const auto& n : nodes) EXPECT_FALSE(n.failed);
}

TEST(SummarizeFunctionsTest, RootingFixtureDynamicCodeExecution) {
  LoadedSample s = load_sample(testing::fixture("apk/rooting.apk"));
  const ClassUnit& cls = find_class(s.packages, "cn.utils.RTUtils");
  MockBackend mock;
  Harness h(mock);
  auto nodes = h.summarizer.summarize_functions(cls, Scope::MalwareScoped);
  auto b = std::find_if(nodes.begin(), nodes.end(), [](const SummaryNode& n) { return n.subject_name.starts_with("b("); });
  ASSERT_NE(b, nodes.end());
  EXPECT_TRUE(b->tags.count("Dynamic Code Execution"));
  EXPECT_NE(b->text.find("(Dynamic Code Execution)"), std::string::npos);
}

TEST(SummarizeFunctionsTest, UnmatchedSectionsAreReasked) {
  ClassUnit cls = synthetic_class("p", 0, 2);
  ScriptedBackend backend([](const ChatRequest& r) {
    std::string payload(prompt_payload(r.user_text));
    auto sections = split_sections(payload);
    if (sections.size() == 2) return std::string("### m0()V\nFirst method.\n\n### bogus()V\nNoise.");
    return "### " + sections[0].heading + "\nAnswered alone.";
  });
  Harness h(backend);
  Warnings w;
  auto nodes = h.summarizer.summarize_functions(cls, Scope::Vanilla, &w);
  EXPECT_EQ(backend.calls, 2);
  EXPECT_EQ(nodes[0].text, "First method.");
  EXPECT_EQ(nodes[1].text, "Answered alone.");
  EXPECT_FALSE(nodes[1].failed);
  bool mismatch = std::any_of(w.begin(), w.end(), [](const std::string& s) { return s.find("bogus()V") != std::string::npos; });
  EXPECT_TRUE(mismatch);
}

TEST(SummarizeFunctionsTest, SummaryUnavailableAfterOneRetry) {
  ClassUnit cls = synthetic_class("p", 0, 2);
  ScriptedBackend backend([](const ChatRequest&) { return std::string("### m0()V\nOnly the first."); });
  Harness h(backend);
  Warnings w;
  auto nodes = h.summarizer.summarize_functions(cls, Scope::Vanilla, &w);
  EXPECT_EQ(backend.calls, 2);
  EXPECT_EQ(nodes[0].text, "Only the first.");
  EXPECT_EQ(nodes[1].text, kSummaryUnavailable);
  EXPECT_TRUE(nodes[1].failed);
}

TEST(SummarizeClassTest, RootingFixturePrivilegeEscalation) {
  LoadedSample s = load_sample(testing::fixture("apk/rooting.apk"));
  const ClassUnit& cls = find_class(s.packages, "cn.utils.RTUtils");
  MockBackend mock;
  Harness h(mock);
  auto fns = h.summarizer.summarize_functions(cls, Scope::MalwareScoped);
  auto node = h.summarizer.summarize_class(cls, fns, Scope::MalwareScoped);
  EXPECT_EQ(node.tier, Tier::Class);
  EXPECT_EQ(node.subject_name, "cn.utils.RTUtils");
  EXPECT_TRUE(node.tags.count("Privilege Escalation and Control"));
  EXPECT_EQ(node.children.size(), fns.size());
}

TEST(SummarizeClassTest, NoCodeMeansNoBackendCall) {
  MockBackend mock;
  Harness h(mock);
  ClassUnit cls = synthetic_class("p", 0, 0);
  auto node = h.summarizer.summarize_class(cls, {}, Scope::MalwareScoped);
  EXPECT_EQ(node.text, kNoExecutableCode);
  EXPECT_TRUE(node.children.empty());
  EXPECT_EQ(mock.invocations(), 0u);
}

TEST(SummarizeClassTest, AliasIsAdvisory) {
  ScriptedBackend backend([](const ChatRequest& r) {
    if (prompt_tier(r.user_text) == Tier::Function) return std::string("### m0()V\nRuns a root shell. (Rooting)");
    return std::string("ALIAS: RTAccessHandler\nThis class obtains root. (Privilege Escalation and Control)");
  });
  Harness h(backend);
  ClassUnit cls = synthetic_class("cn.utils", 0, 1);
  cls.original_name = "cn.utils.RTUtils";
  auto fns = h.summarizer.summarize_functions(cls, Scope::MalwareScoped);
  auto node = h.summarizer.summarize_class(cls, fns, Scope::MalwareScoped);
  ASSERT_TRUE(node.alias.has_value());
  EXPECT_EQ(*node.alias, "RTAccessHandler");
  EXPECT_EQ(node.subject_name, "cn.utils.RTUtils");
  EXPECT_EQ(node.id, "C:cn.utils.RTUtils");
  EXPECT_EQ(fns[0].id, "F:cn.utils.RTUtils->m0()V");
}

TEST(ParseAliasTest, Examples) {
  EXPECT_EQ(parse_alias("ALIAS: RTAccessHandler\nrest"), "RTAccessHandler");
  EXPECT_EQ(parse_alias("text\n  alias: Foo_Bar.\n"), "Foo_Bar");
  EXPECT_FALSE(parse_alias("ALIAS: two words").has_value());
  EXPECT_FALSE(parse_alias("no alias here").has_value());
}

TEST(SummarizePackageTest, RootingFixtureIsMalware) {
  LoadedSample s = load_sample(testing::fixture("apk/rooting.apk"));
  const PackageUnit& pkg = find_package(s.packages, "cn.utils");
  MockBackend mock;
  Harness h(mock);
  std::vector<SummaryNode> classes;
  for (const auto& c : pkg.classes) {
    auto fns = c.functions.empty() ? std::vector<SummaryNode>{} : h.summarizer.summarize_functions(c, Scope::MalwareScoped);
    classes.push_back(h.summarizer.summarize_class(c, fns, Scope::MalwareScoped));
  }
  auto node = h.summarizer.summarize_package(pkg, classes, Scope::MalwareScoped);
  EXPECT_NE(node.text.find("(MALWARE)"), std::string::npos);
  EXPECT_EQ(node.label, Label::Malware);
  EXPECT_TRUE(node.tags.count("Rooting"));
  EXPECT_FALSE(node.children.empty());
}

TEST(SummarizePackageTest, TagFreePackageIsBenign) {
  MockBackend mock;
  Harness h(mock);
  PackageUnit pkg{"p", {synthetic_class("p", 0, 2), synthetic_class("p", 1, 1)}};
  std::vector<SummaryNode> classes;
  for (const auto& c : pkg.classes) {
    classes.push_back(h.summarizer.summarize_class(c, h.summarizer.summarize_functions(c, Scope::Vanilla), Scope::Vanilla));
  }
  auto node = h.summarizer.summarize_package(pkg, classes, Scope::Vanilla);
  EXPECT_EQ(node.label, Label::Benign);
  EXPECT_TRUE(node.tags.empty());
}

TEST(SummarizePackageTest, ChunkAndFold) {
  PackageUnit pkg{"p", {}};
  std::vector<SummaryNode> classes;
  for (std::size_t i = 0; i < 100; ++i) {
    pkg.classes.push_back(synthetic_class("p", i, 1));
    SummaryNode n;
    n.id = class_node_id(pkg.classes.back().original_name);
    n.tier = Tier::Class;
    n.subject_name = pkg.classes.back().original_name;
    n.text = "This class formats strings for display and stores user preferences. Entry " + std::to_string(i) + ".";
    classes.push_back(n);
  }
  PromptEngine probe(library());
  std::size_t fixed = probe.fixed_bytes(Scope::MalwareScoped, Tier::Package, "p");
  std::size_t capacity = 3000;
  TierBudgets budgets;
  budgets.package = (fixed + capacity) / 4;
  std::size_t usable = budgets.package * 4 - fixed;

  // Expected partition: sections are equal-sized, so first-fit packs floor(usable / size) per prompt.
  std::size_t total = 0, per_prompt = 0, size = 0;
  for (const auto& c : classes) {
    size = PromptEngine::section_bytes(PromptEngine::summary_section(c));
    total += size;
  }
  ASSERT_GT(total, usable);
  per_prompt = usable / size;
  std::size_t chunks = (classes.size() + per_prompt - 1) / per_prompt;

  MockBackend mock;
  Harness h(mock, budgets);
  auto node = h.summarizer.summarize_package(pkg, classes, Scope::MalwareScoped);
  EXPECT_GE(chunks, 2u);
  EXPECT_EQ(h.prompts.size(), chunks + 1);
  for (const auto& p : h.prompts) EXPECT_LE(p.estimated_tokens, budgets.package);
  EXPECT_EQ(node.children.size(), 100u);
  EXPECT_EQ(node.label, Label::Benign);
}

TEST(AggregateTest, Rules) {
  using L = Label;
  EXPECT_EQ(aggregate_labels({L::Benign, L::Benign, L::Malware, L::Benign, L::Benign}), L::Malware);
  EXPECT_EQ(aggregate_labels({L::Benign, L::Benign}), L::Benign);
  EXPECT_EQ(aggregate_labels({L::Benign, L::Unknown}), L::Unknown);
  EXPECT_EQ(aggregate_labels({L::Unknown, L::Malware}), L::Malware);
  EXPECT_EQ(aggregate_labels({}), L::Unknown);
}

TEST(SummarizeApkTest, MissingSentinelIsUnknown) {
  ScriptedBackend backend([](const ChatRequest& r) {
    auto tier = prompt_tier(r.user_text);
    if (tier == Tier::Function) {
      std::string out;
      for (const auto& s : split_sections(prompt_payload(r.user_text))) out += "### " + s.heading + "\nDoes little.\n\n";
      return out;
    }
    if (tier == Tier::Class) return std::string("A helper class.");
    if (r.user_text.find("### q.") != std::string::npos) return std::string("VERDICT: unsure");
    return std::string("VERDICT: (BENIGN)");
  });
  Harness h(backend);
  std::vector<PackageUnit> pkgs{{"p", {synthetic_class("p", 0, 1)}}, {"q", {synthetic_class("q", 0, 1)}}};
  auto report = h.summarizer.summarize_apk(SampleId{"d", {}}, pkgs, Scope::Vanilla);
  EXPECT_EQ(report.verdict.label, Label::Unknown);
  bool warned = std::any_of(report.warnings.begin(), report.warnings.end(),
                            [](const std::string& s) { return s.find("UNKNOWN") != std::string::npos; });
  EXPECT_TRUE(warned);
  EXPECT_FALSE(report.incomplete);
}

TEST(SummarizeApkTest, FailedPackagesMarkIncomplete) {
  ScriptedBackend backend([](const ChatRequest& r) -> std::string {
    if (prompt_tier(r.user_text) == Tier::Package && r.user_text.find("### p.") == std::string::npos) {
      throw Error(Errc::ResponseMalformed, "scripted");
    }
    if (prompt_tier(r.user_text) == Tier::Package) return "VERDICT: (BENIGN)";
    std::string out;
    for (const auto& s : split_sections(prompt_payload(r.user_text))) out += "### " + s.heading + "\nok\n\n";
    return out.empty() ? "ok" : out;
  });
  Harness h(backend);
  std::vector<PackageUnit> pkgs{{"p", {synthetic_class("p", 0, 1)}},
                                {"q", {synthetic_class("q", 0, 1)}},
                                {"r", {synthetic_class("r", 0, 1)}}};
  auto report = h.summarizer.summarize_apk(SampleId{"d", {}}, pkgs, Scope::Vanilla);
  EXPECT_TRUE(report.incomplete);
  EXPECT_EQ(report.verdict.label, Label::Unknown);
  EXPECT_TRUE(report.find("P:q")->failed);
  EXPECT_TRUE(check_hierarchy(report, pkgs).empty());
}

TEST(SummarizeApkTest, BackendUnavailablePropagates) {
  ScriptedBackend backend([](const ChatRequest&) -> std::string { throw Error(Errc::BackendUnavailable, "down"); });
  Harness h(backend);
  std::vector<PackageUnit> pkgs{{"p", {synthetic_class("p", 0, 1)}}};
  EXPECT_EQ(error_of([&] { h.summarizer.summarize_apk(SampleId{"d", {}}, pkgs, Scope::Vanilla); }),
            Errc::BackendUnavailable);
}

TEST(SummarizeApkTest, RootingFixtureReport) {
  LoadedSample s = load_sample(testing::fixture("apk/rooting.apk"));
  MockBackend mock;
  Harness h(mock);
  auto report = h.summarizer.summarize_apk(s.id, s.packages, Scope::MalwareScoped);
  EXPECT_EQ(report.verdict.label, Label::Malware);
  EXPECT_TRUE(report.verdict.tags.count("Rooting"));
  EXPECT_TRUE(check_hierarchy(report, s.packages).empty());
  EXPECT_EQ(report.stats.prompts, h.prompts.size());
  EXPECT_EQ(report.stats.cached, 0u);
  EXPECT_EQ(report.packages.size(), s.packages.size());
}

TEST(SummarizeApkTest, DeterministicAcrossConcurrency) {
  LoadedSample s = load_sample(testing::fixture("apk/multidex.apk"));
  MockBackend a, b;
  Harness serial(a, {}, 1);
  Harness wide(b, {}, 8);
  auto r1 = serial.summarizer.summarize_apk(s.id, s.packages, Scope::ApiScoped);
  auto r2 = wide.summarizer.summarize_apk(s.id, s.packages, Scope::ApiScoped);
  EXPECT_EQ(r1, r2);
}

TEST(HierarchyPropertyTest, RandomizedShapes) {
  std::mt19937 rng(20261015);
  PromptEngine probe(library());
  for (int round = 0; round < 12; ++round) {
    std::vector<PackageUnit> pkgs;
    std::size_t package_count = 1 + rng() % 4;
    std::size_t budget_left = 500;
    for (std::size_t p = 0; p < package_count; ++p) {
      PackageUnit pkg{"pkg" + std::to_string(p), {}};
      std::size_t class_count = 1 + rng() % 8;
      for (std::size_t c = 0; c < class_count; ++c) {
        std::size_t methods = std::min<std::size_t>(budget_left, rng() % 40);
        budget_left -= methods;
        ClassUnit cls = synthetic_class(pkg.package_name, c, 0);
        for (std::size_t m = 0; m < methods; ++m) {
          cls.functions.push_back(synthetic_function(c, m, m % 7 == 3 ? "invoke-virtual {v0}, dalvik.system.DexClassLoader.loadClass()V" : ""));
        }
        pkg.classes.push_back(std::move(cls));
      }
      pkgs.push_back(std::move(pkg));
    }
    TierBudgets budgets;
    budgets.function = (probe.fixed_bytes(Scope::MalwareScoped, Tier::Function, "pkg0.C0") + 600 + rng() % 3000) / 4;
    budgets.class_ = (probe.fixed_bytes(Scope::MalwareScoped, Tier::Class, "pkg0.C0") + 600 + rng() % 3000) / 4;
    budgets.package = (probe.fixed_bytes(Scope::MalwareScoped, Tier::Package, "pkg0") + 800 + rng() % 3000) / 4;
    MockBackend mock;
    Harness h(mock, budgets, 1 + rng() % 6);
    auto report = h.summarizer.summarize_apk(SampleId{"d", {}}, pkgs, Scope::MalwareScoped);
    auto problems = check_hierarchy(report, pkgs);
    EXPECT_TRUE(problems.empty()) << "round " << round << ": " << (problems.empty() ? "" : problems[0]);
    for (const auto& p : h.prompts) {
      EXPECT_LE(p.estimated_tokens, budgets.for_tier(p.tier)) << "round " << round;
    }
    EXPECT_EQ(report.stats.prompts, h.prompts.size());
  }
}

TEST(HierarchyPropertyTest, DetectsViolations) {
  MockBackend mock;
  Harness h(mock);
  std::vector<PackageUnit> pkgs{{"p", {synthetic_class("p", 0, 2)}}};
  auto report = h.summarizer.summarize_apk(SampleId{"d", {}}, pkgs, Scope::Vanilla);
  ASSERT_TRUE(check_hierarchy(report, pkgs).empty());
  auto broken = report;
  broken.nodes.pop_back();
  EXPECT_FALSE(check_hierarchy(broken, pkgs).empty());
  broken = report;
  broken.nodes[1].children.pop_back();
  EXPECT_FALSE(check_hierarchy(broken, pkgs).empty());
}

}  // namespace
}  // namespace dexlens
