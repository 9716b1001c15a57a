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

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dexlens/error.hpp"
#include "dexlens/label.hpp"

namespace dexlens {

namespace tags {
inline constexpr std::string_view kRooting = "Rooting";
inline constexpr std::string_view kPrivilegeEscalation = "Privilege Escalation and Control";
inline constexpr std::string_view kStealth = "Stealth and Resource Exploitation";
inline constexpr std::string_view kDynamicCode = "Dynamic Code Execution";
inline constexpr std::string_view kObfuscatedCode = "Obfuscated Code";
inline constexpr std::string_view kSystemModification = "Modification of Critical System Components";
inline constexpr std::string_view kCodeExecutionManipulation = "Code Execution Manipulation";
inline constexpr std::string_view kRootAccess = "Root Access";
inline constexpr std::string_view kDataExfiltration = "Data Exfiltration";
}  // namespace tags

/// Canonical tag -> accepted surface forms (matched case-insensitively, whitespace-normalized).
class CanonicalTagTable {
 public:
  static const CanonicalTagTable& instance();

  const std::map<std::string, std::set<std::string>>& entries() const { return entries_; }
  std::vector<std::string> canonical_tags() const;
  bool is_canonical(std::string_view tag) const { return entries_.count(std::string(tag)) != 0; }

  std::optional<std::string> canonicalize(std::string_view phrase) const;

  /// Activities linked to a tag across tiers (excluding the tag itself).
  const std::set<std::string>& related(std::string_view tag) const;
  /// Substrings that identify instruction lines evidencing the tag.
  const std::vector<std::string>& keywords(std::string_view tag) const;

 private:
  CanonicalTagTable();

  std::map<std::string, std::set<std::string>> entries_;
  std::map<std::string, std::string> by_surface_;
  std::map<std::string, std::set<std::string>> related_;
  std::map<std::string, std::vector<std::string>> keywords_;
};

struct Verdict {
  Label label = Label::Unknown;
  /// Canonical tags plus noncanonical ones kept verbatim. Sentinels are not tags.
  std::set<std::string> tags;
  Warnings warnings;

  bool operator==(const Verdict& o) const { return label == o.label && tags == o.tags; }
};

/// Extracts parenthesized tags and the (MALWARE)/(BENIGN) sentinel. MALWARE wins if both appear.
Verdict parse_tags(std::string_view text);

/// "(MALWARE); (Rooting); (Dynamic Code Execution)". UNKNOWN emits no sentinel.
std::string serialize(const Verdict& verdict);

/// Lower-cased, whitespace-collapsed form used for surface matching.
std::string normalize_phrase(std::string_view phrase);

/// Splits text into sentences on ". ", "! ", "? " and newlines.
std::vector<std::string> split_sentences(std::string_view text);

/// First sentence containing any surface form of one of `tags`, or empty.
std::string excerpt_for(std::string_view text, const std::set<std::string>& tags);

}  // namespace dexlens
