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

#include "dexlens/evaluator.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>

#include "dexlens/hash.hpp"
#include "dexlens/parallel.hpp"
#include "dexlens/pipeline.hpp"
#include "dexlens/trace.hpp"

namespace dexlens {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string ratio(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}

}  // namespace

std::filesystem::path CorpusManifest::resolve(const ManifestEntry& e) const {
  std::filesystem::path p(e.path);
  return p.is_absolute() ? p : base_dir / p;
}

CorpusManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir) {
  CorpusManifest m;
  m.base_dir = base_dir;
  m.version = sha256_hex(text).substr(0, 16);
  std::set<std::string> seen;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool header = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (!header) {
      if (line != "path,label") fail(Errc::ManifestParse, "line 1: expected header \"path,label\"");
      header = true;
      continue;
    }
    if (line.empty()) continue;
    std::size_t comma = line.rfind(',');
    if (comma == std::string::npos) {
      fail(Errc::ManifestParse, "line " + std::to_string(line_no) + ": expected \"path,label\"");
    }
    ManifestEntry e;
    e.path = trim(std::string_view(line).substr(0, comma));
    auto label = parse_label(trim(std::string_view(line).substr(comma + 1)));
    if (e.path.empty()) fail(Errc::ManifestParse, "line " + std::to_string(line_no) + ": empty path");
    if (!label || *label == Label::Unknown) {
      fail(Errc::ManifestParse, "line " + std::to_string(line_no) + ": label must be BENIGN or MALWARE");
    }
    e.label = *label;
    if (!seen.insert(e.path).second) {
      fail(Errc::ManifestParse, "line " + std::to_string(line_no) + ": duplicate path " + e.path);
    }
    m.entries.push_back(std::move(e));
  }
  if (!header) fail(Errc::ManifestParse, "empty manifest: missing header \"path,label\"");
  return m;
}

CorpusManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoFailure, "cannot read manifest " + path.string());
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_manifest(text, path.parent_path());
}

ConfusionCounts confusion(const std::vector<Label>& truths, const std::vector<Label>& predictions) {
  if (truths.size() != predictions.size()) {
    fail(Errc::LengthMismatch, std::to_string(truths.size()) + " truths vs " + std::to_string(predictions.size()) +
                                   " predictions");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    Label t = truths[i], p = predictions[i];
    if (t == Label::Unknown) fail(Errc::PreconditionViolated, "ground truth must be BENIGN or MALWARE");
    if (p == Label::Unknown) {
      ++c.unknowns;
    } else if (t == Label::Benign) {
      ++(p == Label::Benign ? c.tp : c.fp);
    } else {
      ++(p == Label::Malware ? c.tn : c.fn);
    }
  }
  return c;
}

double round3(double x) { return std::round(x * 1000.0) / 1000.0; }

Metrics metrics(const ConfusionCounts& counts, std::size_t corpus_size) {
  if (corpus_size == 0) fail(Errc::PreconditionViolated, "corpus size must be positive");
  Metrics m;
  m.accuracy = round3(static_cast<double>(counts.tp + counts.tn) / static_cast<double>(corpus_size));
  if (counts.tp + counts.fp == 0) {
    m.warnings.push_back("precision undefined (no BENIGN predictions), reported as 0");
  } else {
    m.precision = round3(static_cast<double>(counts.tp) / static_cast<double>(counts.tp + counts.fp));
  }
  if (counts.tp + counts.fn == 0) {
    m.warnings.push_back("recall undefined (TP+FN = 0), reported as 0");
  } else {
    m.recall = round3(static_cast<double>(counts.tp) / static_cast<double>(counts.tp + counts.fn));
  }
  return m;
}

EvalReport run_corpus(const CorpusManifest& manifest, Scope scope, const Summarizer& summarizer,
                      std::size_t concurrency, const ReportObserver& observer) {
  if (manifest.entries.empty()) fail(Errc::EmptyCorpus, "manifest lists no samples");
  EvalReport out;
  out.scope = scope;
  out.manifest_version = manifest.version;
  out.per_sample.resize(manifest.entries.size());

  parallel_for(manifest.entries.size(), concurrency, [&](std::size_t i) {
    const ManifestEntry& e = manifest.entries[i];
    SampleResult& r = out.per_sample[i];
    r.path = e.path;
    r.truth = e.label;
    try {
      LoadedSample s = load_sample(manifest.resolve(e), e.label);
      r.sample = s.id;
      AnalysisReport report = summarizer.summarize_apk(s.id, s.packages, scope);
      r.prediction = classify(report);
      if (observer) observer(r, report);
    } catch (const std::exception& ex) {
      r.prediction = Label::Unknown;
      r.error = ex.what();
    }
  });

  std::vector<Label> truths, predictions;
  for (const auto& r : out.per_sample) {
    truths.push_back(r.truth);
    predictions.push_back(r.prediction);
    if (!r.error.empty()) out.warnings.push_back(r.path + ": " + r.error);
  }
  out.counts = confusion(truths, predictions);
  out.corpus_size = out.per_sample.size();
  Metrics m = metrics(out.counts, out.corpus_size);
  out.accuracy = m.accuracy;
  out.precision = m.precision;
  out.recall = m.recall;
  out.warnings.insert(out.warnings.end(), m.warnings.begin(), m.warnings.end());
  return out;
}

std::string format_confusion_table(const EvalReport& r) {
  char buf[256];
  std::string out = "scope " + std::string(scope_name(r.scope)) + ", " + std::to_string(r.corpus_size) + " samples\n";
  std::snprintf(buf, sizeof buf, "%-18s %12s %12s %9s\n", "", "pred BENIGN", "pred MALWARE", "UNKNOWN");
  out += buf;
  std::size_t benign_unknown = 0, malware_unknown = 0;
  for (const auto& s : r.per_sample) {
    if (s.prediction != Label::Unknown) continue;
    ++(s.truth == Label::Benign ? benign_unknown : malware_unknown);
  }
  std::snprintf(buf, sizeof buf, "%-18s %12s %12s %9zu\n", "actual BENIGN", ("TP " + std::to_string(r.counts.tp)).c_str(),
                ("FP " + std::to_string(r.counts.fp)).c_str(), benign_unknown);
  out += buf;
  std::snprintf(buf, sizeof buf, "%-18s %12s %12s %9zu\n", "actual MALWARE", ("FN " + std::to_string(r.counts.fn)).c_str(),
                ("TN " + std::to_string(r.counts.tn)).c_str(), malware_unknown);
  out += buf;
  out += "accuracy " + ratio(r.accuracy) + "  precision " + ratio(r.precision) + "  recall " + ratio(r.recall) + "\n";
  return out;
}

}  // namespace dexlens
