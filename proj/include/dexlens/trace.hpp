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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dexlens/disasm.hpp"
#include "dexlens/node.hpp"
#include "dexlens/summarizer.hpp"

namespace dexlens {

struct EvidenceLink {
  Tier tier = Tier::Package;
  std::string node_id;
  std::string subject_name;
  std::optional<std::string> alias;
  std::string matched_tag;  // the traced tag or a linked activity
  std::string excerpt;      // sentence containing a surface form of matched_tag

  bool operator==(const EvidenceLink&) const = default;
};

struct EvidenceTerminal {
  SourceRef source_ref;
  std::string signature;
  std::vector<std::string> lines;  // rendered instruction lines matching the tag keywords

  bool operator==(const EvidenceTerminal&) const = default;
};

struct EvidenceChain {
  std::string tag;
  std::vector<EvidenceLink> links;  // strictly descending tiers
  std::optional<EvidenceTerminal> terminal;
  /// Deepest link is a CLASS whose functions carry none of the tags.
  bool class_level_only = false;

  bool operator==(const EvidenceChain&) const = default;
};

/// Backtracks `tag` from package summaries to the bytecode. Throws TagNotFound.
std::vector<EvidenceChain> trace(const AnalysisReport& report, std::string_view tag);

/// The APK label recomputed from package nodes.
Label classify(const AnalysisReport& report);

/// Human-readable form: one indented line per link, then the terminal lines.
std::string render_chains(const std::vector<EvidenceChain>& chains);

}  // namespace dexlens
