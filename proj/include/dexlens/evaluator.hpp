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

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "dexlens/apk.hpp"
#include "dexlens/label.hpp"
#include "dexlens/node.hpp"
#include "dexlens/summarizer.hpp"

namespace dexlens {

struct ManifestEntry {
  std::string path;  // as written in the manifest
  Label label = Label::Unknown;

  bool operator==(const ManifestEntry&) const = default;
};

/// "path,label" CSV with a required header. Relative paths resolve against base_dir.
struct CorpusManifest {
  std::vector<ManifestEntry> entries;
  std::string version;  // first 16 hex chars of the manifest's SHA-256
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const ManifestEntry& e) const;
};

/// Throws ManifestParse.
CorpusManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir = {});
CorpusManifest load_manifest(const std::filesystem::path& path);

/// BENIGN is the positive class. FN counts malware predicted benign and FP benign predicted
/// malware, following the labels of the published tables.
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fn = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t unknowns = 0;

  std::size_t total() const { return tp + fn + fp + tn + unknowns; }
  bool operator==(const ConfusionCounts&) const = default;
};

/// Throws LengthMismatch; truths must be BENIGN or MALWARE.
ConfusionCounts confusion(const std::vector<Label>& truths, const std::vector<Label>& predictions);

/// Ratios rounded to 3 decimals.
struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  Warnings warnings;
};

/// accuracy = (TP+TN)/corpus_size; precision = TP/(TP+FP); recall = TP/(TP+FN). Zero denominators yield 0 with a warning.
Metrics metrics(const ConfusionCounts& counts, std::size_t corpus_size);

double round3(double x);

struct SampleResult {
  std::string path;
  SampleId sample;
  Label truth = Label::Unknown;
  Label prediction = Label::Unknown;
  std::string error;  // empty on success

  bool operator==(const SampleResult&) const = default;
};

struct EvalReport {
  Scope scope = Scope::Vanilla;
  std::string manifest_version;
  ConfusionCounts counts;
  std::size_t corpus_size = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  std::vector<SampleResult> per_sample;  // manifest order
  Warnings warnings;

  bool operator==(const EvalReport&) const = default;
};

/// Called once per successfully analyzed sample, possibly from several threads.
using ReportObserver = std::function<void(const SampleResult&, const AnalysisReport&)>;

/// Analyzes every sample; per-sample failures become UNKNOWN predictions. Throws EmptyCorpus.
EvalReport run_corpus(const CorpusManifest& manifest, Scope scope, const Summarizer& summarizer,
                      std::size_t concurrency, const ReportObserver& observer = {});

/// Confusion matrix with rows = actual, columns = predicted, plus the three ratios.
std::string format_confusion_table(const EvalReport& report);

}  // namespace dexlens
