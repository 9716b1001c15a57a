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

#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <memory>

#include "CLI11.hpp"
#include "dexlens/evaluator.hpp"
#include "dexlens/llm.hpp"
#include "dexlens/log.hpp"
#include "dexlens/pipeline.hpp"
#include "dexlens/report_io.hpp"
#include "dexlens/summarizer.hpp"
#include "dexlens/trace.hpp"

namespace dexlens::cli {

namespace {

struct RunOptions {
  std::string scope = "malware";
  std::string backend = "http";
  std::string endpoint;
  std::string model;
  std::string out;
  std::string cache_dir;
  bool no_cache = false;
  std::string templates;
  std::size_t concurrency = 4;
  TierBudgets budgets;
};

/// Resolved configuration. Building it validates everything before any sample or network work.
struct RunConfig {
  Scope scope = Scope::MalwareScoped;
  bool mock = false;
  std::string endpoint_url;
  std::string api_key;
  std::string model_id;
  TierBudgets budgets;
  std::size_t concurrency = 4;
  std::optional<std::filesystem::path> cache_dir;
  std::filesystem::path template_dir;
};

RunConfig resolve(const RunOptions& o, const EnvLookup& env) {
  RunConfig c;
  auto scope = parse_scope(o.scope);
  if (!scope) fail(Errc::ConfigError, "unknown scope '" + o.scope + "' (vanilla, api, malware)");
  c.scope = *scope;

  if (o.backend == "mock") {
    c.mock = true;
  } else if (o.backend != "http") {
    fail(Errc::ConfigError, "unknown backend '" + o.backend + "' (http, mock)");
  }

  c.endpoint_url = !o.endpoint.empty() ? o.endpoint : env("ANALYZER_ENDPOINT").value_or("");
  c.model_id = !o.model.empty() ? o.model : env("ANALYZER_MODEL").value_or(c.mock ? "mock" : "");
  if (!c.mock) {
    if (c.endpoint_url.empty()) fail(Errc::ConfigError, "http backend needs --endpoint or ANALYZER_ENDPOINT");
    c.api_key = env("ANALYZER_API_KEY").value_or("");
    if (c.api_key.empty()) fail(Errc::ConfigError, "http backend needs the ANALYZER_API_KEY environment variable");
    if (c.model_id.empty()) fail(Errc::ConfigError, "http backend needs --model or ANALYZER_MODEL");
  }

  if (o.concurrency == 0) fail(Errc::ConfigError, "--concurrency must be at least 1");
  c.concurrency = o.concurrency;
  c.budgets = o.budgets;
  if (c.budgets.function == 0 || c.budgets.class_ == 0 || c.budgets.package == 0) {
    fail(Errc::ConfigError, "budgets must be positive");
  }

  if (!o.templates.empty()) {
    c.template_dir = o.templates;
  } else if (auto t = env("DEXLENS_TEMPLATES")) {
    c.template_dir = *t;
  } else {
    c.template_dir = DEXLENS_DEFAULT_TEMPLATES;
  }

  if (!o.no_cache) {
    if (!o.cache_dir.empty()) {
      c.cache_dir = o.cache_dir;
    } else if (auto x = env("XDG_CACHE_HOME"); x && !x->empty()) {
      c.cache_dir = std::filesystem::path(*x) / "dexlens";
    } else if (auto h = env("HOME"); h && !h->empty()) {
      c.cache_dir = std::filesystem::path(*h) / ".cache" / "dexlens";
    }
  }
  return c;
}

/// Backend, cache, engine and summarizer for one run.
class Pipeline {
 public:
  explicit Pipeline(const RunConfig& c) : library_(TemplateLibrary::load(c.template_dir)), engine_(library_, c.budgets) {
    if (c.mock) {
      backend_ = std::make_unique<MockBackend>();
    } else {
      HttpBackendConfig h;
      h.endpoint_url = c.endpoint_url;
      h.api_key = c.api_key;
      backend_ = std::make_unique<HttpBackend>(std::move(h));
    }
    std::shared_ptr<ResponseCache> cache;
    if (c.cache_dir) cache = std::make_shared<ResponseCache>(*c.cache_dir);
    completer_ = std::make_unique<Completer>(*backend_, cache, c.concurrency);
    SummarizerConfig sc;
    sc.model_id = c.model_id;
    sc.concurrency = c.concurrency;
    summarizer_ = std::make_unique<Summarizer>(engine_, *completer_, sc);
  }

  const Summarizer& summarizer() const { return *summarizer_; }
  const Completer& completer() const { return *completer_; }

 private:
  TemplateLibrary library_;
  PromptEngine engine_;
  std::unique_ptr<Backend> backend_;
  std::unique_ptr<Completer> completer_;
  std::unique_ptr<Summarizer> summarizer_;
};

void add_run_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--scope", o.scope, "Prompt scope: vanilla, api or malware")->capture_default_str();
  cmd->add_option("--backend", o.backend, "Completion backend: http or mock")->capture_default_str();
  cmd->add_option("--endpoint", o.endpoint, "Chat-completions URL (env ANALYZER_ENDPOINT)");
  cmd->add_option("--model", o.model, "Model id (env ANALYZER_MODEL)");
  cmd->add_option("--cache-dir", o.cache_dir, "Response cache directory");
  cmd->add_flag("--no-cache", o.no_cache, "Do not read or write the response cache");
  cmd->add_option("--templates", o.templates, "Template asset directory (env DEXLENS_TEMPLATES)");
  cmd->add_option("--concurrency", o.concurrency, "Concurrent classes, samples and requests")->capture_default_str();
  cmd->add_option("--budget-function", o.budgets.function, "FUNCTION prompt budget in estimated tokens")
      ->capture_default_str();
  cmd->add_option("--budget-class", o.budgets.class_, "CLASS prompt budget in estimated tokens")->capture_default_str();
  cmd->add_option("--budget-package", o.budgets.package, "PACKAGE prompt budget in estimated tokens")
      ->capture_default_str();
}

int verdict_exit(Label l) {
  switch (l) {
    case Label::Benign: return kExitBenign;
    case Label::Malware: return kExitMalware;
    case Label::Unknown: break;
  }
  return kExitUnknown;
}

std::string join_tags(const std::set<std::string>& tags) {
  std::string s;
  for (const auto& t : tags) s += (s.empty() ? "" : ", ") + t;
  return s;
}

int cmd_analyze(const std::string& apk, const RunOptions& o, std::ostream& out, std::ostream& err,
                const EnvLookup& env) {
  RunConfig cfg = resolve(o, env);
  Pipeline pipeline(cfg);
  LoadedSample sample = load_sample(apk);
  for (const auto& w : sample.warnings) err << "warning: " << w << "\n";
  AnalysisReport report = pipeline.summarizer().summarize_apk(sample.id, sample.packages, cfg.scope);
  for (const auto& w : report.warnings) err << "warning: " << w << "\n";
  std::string doc = report_to_json(report);
  if (o.out.empty()) {
    out << doc;
  } else {
    write_file(o.out, doc);
    out << "verdict " << label_name(report.verdict.label);
    if (!report.verdict.tags.empty()) out << " (" << join_tags(report.verdict.tags) << ")";
    out << "\n";
    out << report.packages.size() << " packages, " << report.stats.prompts << " prompts ("
        << pipeline.completer().stats().cache_hits << " cached)\n";
    out << "report written to " << o.out << "\n";
  }
  return verdict_exit(report.verdict.label);
}

int cmd_trace(const std::string& report_path, const std::string& tag, std::ostream& out, std::ostream& err) {
  AnalysisReport report = report_from_json(read_file(report_path));
  try {
    out << render_chains(trace(report, tag));
  } catch (const Error& e) {
    if (e.code() != Errc::TagNotFound) throw;
    err << "dexlens: " << e.what() << "\n";
    return kExitNotFound;
  }
  return 0;
}

int cmd_eval(const std::string& manifest_path, const RunOptions& o, std::ostream& out, std::ostream& err,
             const EnvLookup& env) {
  RunConfig cfg = resolve(o, env);
  CorpusManifest manifest = load_manifest(manifest_path);
  Pipeline pipeline(cfg);
  EvalReport report = run_corpus(manifest, cfg.scope, pipeline.summarizer(), cfg.concurrency);
  std::size_t failures = 0;
  for (const auto& s : report.per_sample) {
    if (s.error.empty()) continue;
    ++failures;
    err << "sample " << s.path << " failed: " << s.error << "\n";
  }
  if (failures) err << failures << " of " << report.corpus_size << " samples failed and count as UNKNOWN\n";
  out << format_confusion_table(report);
  if (!o.out.empty()) {
    write_file(o.out, eval_to_json(report));
    out << "evaluation written to " << o.out << "\n";
  }
  return 0;
}

void print_class(const ClassUnit& c, std::ostream& out) {
  out << c.declaration << "\n";
  for (const auto& s : c.skeleton) out << "  " << s << "\n";
  for (const auto& f : c.functions) out << "\n" << f.rendered_text << "\n";
  out << "\n";
}

int cmd_render(const std::string& apk, const std::string& class_filter, std::ostream& out, std::ostream& err) {
  LoadedSample sample = load_sample(apk);
  for (const auto& w : sample.warnings) err << "warning: " << w << "\n";
  bool found = false;
  for (const auto& p : sample.packages) {
    for (const auto& c : p.classes) {
      if (!class_filter.empty() && c.original_name != class_filter && c.descriptor != class_filter) continue;
      found = true;
      print_class(c, out);
    }
  }
  if (!class_filter.empty() && !found) {
    err << "dexlens: " << Error(Errc::ClassNotFound, "no class named " + class_filter).what() << "\n";
    return kExitNotFound;
  }
  return 0;
}

}  // namespace

std::optional<std::string> process_env(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (!v) return std::nullopt;
  return std::string(v);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const EnvLookup& env) {
  CLI::App app{"Static APK analysis through hierarchical bytecode summaries", "dexlens"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(DEXLENS_VERSION));

  RunOptions analyze_opts, eval_opts;
  std::string apk, report_path, tag, manifest, class_filter, render_apk;

  auto* analyze = app.add_subcommand("analyze", "Summarize one APK and write its report");
  analyze->add_option("apk", apk, "APK file")->required();
  analyze->add_option("--out", analyze_opts.out, "Report path (default: standard output)");
  add_run_options(analyze, analyze_opts);

  auto* trace_cmd = app.add_subcommand("trace", "Backtrack a tag from a report to the bytecode");
  trace_cmd->add_option("report", report_path, "Report JSON")->required();
  trace_cmd->add_option("tag", tag, "Tag, e.g. Rooting")->required();

  auto* eval = app.add_subcommand("eval", "Evaluate a labeled corpus");
  eval->add_option("manifest", manifest, "CSV manifest with a path,label header")->required();
  eval->add_option("--out", eval_opts.out, "Evaluation JSON path");
  add_run_options(eval, eval_opts);

  auto* render = app.add_subcommand("render", "Print disassembled classes without any backend");
  render->add_option("apk", render_apk, "APK file")->required();
  render->add_option("--class", class_filter, "Dotted class name or descriptor");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitFatal;
  }

  try {
    if (*analyze) return cmd_analyze(apk, analyze_opts, out, err, env);
    if (*trace_cmd) return cmd_trace(report_path, tag, out, err);
    if (*eval) return cmd_eval(manifest, eval_opts, out, err, env);
    if (*render) return cmd_render(render_apk, class_filter, out, err);
  } catch (const std::exception& e) {
    err << "dexlens: " << e.what() << "\n";
    return kExitFatal;
  }
  return kExitFatal;
}

}  // namespace dexlens::cli
