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

#include "dexlens/trace.hpp"

#include <map>
#include <set>

#include "dexlens/verdict.hpp"

namespace dexlens {

namespace {

class Tracer {
 public:
  Tracer(const AnalysisReport& report, std::string tag) : report_(report), tag_(std::move(tag)) {
    const auto& table = CanonicalTagTable::instance();
    accepted_.insert(tag_);
    if (table.is_canonical(tag_)) {
      const auto& rel = table.related(tag_);
      accepted_.insert(rel.begin(), rel.end());
    }
    for (const auto& n : report_.nodes) by_id_[n.id] = &n;
  }

  std::vector<EvidenceChain> run() {
    for (const auto* p : report_.tier_nodes(Tier::Package)) {
      if (p->tags.count(tag_)) visit(*p, {});
    }
    // Nodes carrying the tag under a parent that does not: chains start at their own tier.
    for (Tier tier : {Tier::Class, Tier::Function}) {
      for (const auto* n : report_.tier_nodes(tier)) {
        if (n->tags.count(tag_) && !visited_.count(n->id)) visit(*n, {});
      }
    }
    return std::move(chains_);
  }

 private:
  std::optional<std::string> matched(const SummaryNode& n) const {
    if (n.tags.count(tag_)) return tag_;
    for (const auto& t : accepted_) {
      if (n.tags.count(t)) return t;
    }
    return std::nullopt;
  }

  EvidenceLink link(const SummaryNode& n, const std::string& tag) const {
    EvidenceLink l;
    l.tier = n.tier;
    l.node_id = n.id;
    l.subject_name = n.subject_name;
    l.alias = n.alias;
    l.matched_tag = tag;
    l.excerpt = excerpt_for(n.text, {tag});
    if (l.excerpt.empty()) l.excerpt = "(" + tag + ")";
    return l;
  }

  EvidenceTerminal terminal(const SummaryNode& n) const {
    const auto& table = CanonicalTagTable::instance();
    std::vector<std::string> keys;
    for (const auto& t : accepted_) {
      if (!n.tags.count(t) && t != tag_) continue;
      if (!table.is_canonical(t)) continue;
      const auto& k = table.keywords(t);
      keys.insert(keys.end(), k.begin(), k.end());
    }
    EvidenceTerminal term;
    if (n.source_ref) term.source_ref = *n.source_ref;
    term.signature = n.subject_name;
    std::size_t pos = 0;
    bool header = true;
    while (pos < n.code.size()) {
      std::size_t end = n.code.find('\n', pos);
      if (end == std::string::npos) end = n.code.size();
      std::string_view line(n.code.data() + pos, end - pos);
      pos = end + 1;
      if (header) {
        header = false;
        continue;
      }
      for (const auto& k : keys) {
        if (line.find(k) != std::string_view::npos) {
          std::size_t b = line.find_first_not_of(' ');
          term.lines.emplace_back(line.substr(b == std::string_view::npos ? 0 : b));
          break;
        }
      }
    }
    return term;
  }

  void visit(const SummaryNode& n, std::vector<EvidenceLink> prefix) {
    auto tag = matched(n);
    if (!tag) return;
    visited_.insert(n.id);
    prefix.push_back(link(n, *tag));
    if (n.tier == Tier::Function) {
      EvidenceChain c{tag_, std::move(prefix), terminal(n), false};
      chains_.push_back(std::move(c));
      return;
    }
    bool descended = false;
    for (const auto& child_id : n.children) {
      auto it = by_id_.find(child_id);
      if (it == by_id_.end() || !matched(*it->second)) continue;
      descended = true;
      visit(*it->second, prefix);
    }
    if (!descended) {
      EvidenceChain c{tag_, std::move(prefix), std::nullopt, n.tier == Tier::Class};
      chains_.push_back(std::move(c));
    }
  }

  const AnalysisReport& report_;
  std::string tag_;
  std::set<std::string> accepted_;
  std::map<std::string, const SummaryNode*> by_id_;
  std::set<std::string> visited_;
  std::vector<EvidenceChain> chains_;
};

}  // namespace

std::vector<EvidenceChain> trace(const AnalysisReport& report, std::string_view tag) {
  std::string canonical = CanonicalTagTable::instance().canonicalize(tag).value_or(std::string(tag));
  auto chains = Tracer(report, canonical).run();
  if (chains.empty()) fail(Errc::TagNotFound, "tag '" + canonical + "' appears nowhere in the report");
  return chains;
}

Label classify(const AnalysisReport& report) {
  std::vector<Label> labels;
  for (const auto* p : report.tier_nodes(Tier::Package)) labels.push_back(p->label);
  return aggregate_labels(labels);
}

std::string render_chains(const std::vector<EvidenceChain>& chains) {
  std::string out;
  for (std::size_t i = 0; i < chains.size(); ++i) {
    const auto& c = chains[i];
    out += "chain " + std::to_string(i + 1) + ": (" + c.tag + ")\n";
    std::string indent = "  ";
    for (const auto& l : c.links) {
      out += indent + std::string(tier_name(l.tier)) + " " + l.subject_name;
      if (l.alias) out += " [alias " + *l.alias + "]";
      if (l.matched_tag != c.tag) out += " via (" + l.matched_tag + ")";
      out += "\n" + indent + "  \"" + escape_non_ascii(l.excerpt) + "\"\n";
      indent += "  ";
    }
    if (c.terminal) {
      const auto& t = *c.terminal;
      out += indent + "bytecode: dex " + std::to_string(t.source_ref.dex_ordinal) + ", class_def " +
             std::to_string(t.source_ref.class_def_index) + ", method_idx " + std::to_string(t.source_ref.method_idx) +
             "\n";
      for (const auto& line : t.lines) out += indent + "  " + line + "\n";
    } else if (c.class_level_only) {
      out += indent + "class-level only: no function summary carries the tag\n";
    }
  }
  return out;
}

}  // namespace dexlens
