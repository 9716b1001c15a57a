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

#include "dexlens/report_io.hpp"

#include <fstream>
#include <iterator>
#include <map>
#include <set>

#include <unistd.h>

#include "json.hpp"

namespace dexlens {

namespace {

using nlohmann::json;

std::string dump(const json& doc) {
  return doc.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

[[noreturn]] void mismatch(const std::string& what) { fail(Errc::SchemaMismatch, what); }

json node_to_json(const SummaryNode& n) {
  json j;
  j["id"] = n.id;
  j["tier"] = tier_name(n.tier);
  j["subject_name"] = n.subject_name;
  if (n.alias) j["alias"] = *n.alias;
  j["text"] = n.text;
  j["tags"] = n.tags;
  j["label"] = label_name(n.label);
  j["children"] = n.children;
  if (n.source_ref) {
    j["source_ref"] = {{"dex_ordinal", n.source_ref->dex_ordinal},
                       {"class_def_index", n.source_ref->class_def_index},
                       {"method_idx", n.source_ref->method_idx}};
  }
  if (!n.code.empty()) j["code"] = n.code;
  j["prompt_key"] = n.prompt_key;
  j["failed"] = n.failed;
  return j;
}

Label label_field(const json& j, const char* key) {
  auto l = parse_label(j.at(key).get<std::string>());
  if (!l) mismatch(std::string("bad label in '") + key + "'");
  return *l;
}

SummaryNode node_from_json(const json& j) {
  SummaryNode n;
  n.id = j.at("id").get<std::string>();
  auto tier = parse_tier(j.at("tier").get<std::string>());
  if (!tier) mismatch("node " + n.id + ": bad tier");
  n.tier = *tier;
  n.subject_name = j.at("subject_name").get<std::string>();
  if (j.contains("alias")) n.alias = j.at("alias").get<std::string>();
  n.text = j.at("text").get<std::string>();
  n.tags = j.at("tags").get<std::set<std::string>>();
  n.label = label_field(j, "label");
  n.children = j.at("children").get<std::vector<std::string>>();
  if (j.contains("source_ref")) {
    const json& s = j.at("source_ref");
    n.source_ref = SourceRef{s.at("dex_ordinal").get<std::size_t>(), s.at("class_def_index").get<std::size_t>(),
                             s.at("method_idx").get<std::uint32_t>()};
  }
  if (j.contains("code")) n.code = j.at("code").get<std::string>();
  n.prompt_key = j.at("prompt_key").get<std::string>();
  n.failed = j.at("failed").get<bool>();
  return n;
}

void check_graph(const AnalysisReport& r) {
  std::map<std::string, const SummaryNode*> by_id;
  for (const auto& n : r.nodes) {
    if (!by_id.emplace(n.id, &n).second) mismatch("duplicate node id " + n.id);
  }
  for (const auto& n : r.nodes) {
    for (const auto& c : n.children) {
      auto it = by_id.find(c);
      if (it == by_id.end()) mismatch("node " + n.id + " references missing child " + c);
      if (static_cast<int>(it->second->tier) + 1 != static_cast<int>(n.tier)) {
        mismatch("node " + n.id + " has child " + c + " of the wrong tier");
      }
    }
    if (n.tier == Tier::Function && !n.source_ref) mismatch("FUNCTION node " + n.id + " lacks source_ref");
  }
  for (const auto& p : r.packages) {
    auto it = by_id.find(p);
    if (it == by_id.end() || it->second->tier != Tier::Package) mismatch("missing PACKAGE node " + p);
  }
}

}  // namespace

std::string report_to_json(const AnalysisReport& r) {
  json doc;
  doc["schema_version"] = kReportSchema;
  doc["sample"] = {{"digest", r.sample.digest}};
  doc["config"] = {{"scope", scope_name(r.scope)}, {"model_id", r.model_id}, {"template_version", r.template_version}};
  doc["packages"] = r.packages;
  json nodes = json::array();
  for (const auto& n : r.nodes) nodes.push_back(node_to_json(n));
  doc["nodes"] = std::move(nodes);
  doc["verdict"] = {{"label", label_name(r.verdict.label)}, {"tags", r.verdict.tags}};
  doc["incomplete"] = r.incomplete;
  doc["warnings"] = r.warnings;
  json by_tier;
  for (Tier t : {Tier::Function, Tier::Class, Tier::Package}) {
    by_tier[std::string(tier_name(t))] = r.stats.prompts_by_tier[static_cast<std::size_t>(t)];
  }
  doc["stats"] = {{"prompts", r.stats.prompts}, {"estimated_tokens", r.stats.estimated_tokens},
                  {"prompts_by_tier", by_tier}};
  return dump(doc);
}

AnalysisReport report_from_json(std::string_view text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) mismatch("report is not a JSON object");
  if (!doc.contains("schema_version")) mismatch("schema_version missing");
  if (!doc["schema_version"].is_string() || doc["schema_version"].get<std::string>() != kReportSchema) {
    mismatch("unsupported schema_version " + doc["schema_version"].dump() + ", expected " + std::string(kReportSchema));
  }
  AnalysisReport r;
  try {
    r.sample.digest = doc.at("sample").at("digest").get<std::string>();
    const json& cfg = doc.at("config");
    auto scope = parse_scope(cfg.at("scope").get<std::string>());
    if (!scope) mismatch("bad scope");
    r.scope = *scope;
    r.model_id = cfg.at("model_id").get<std::string>();
    r.template_version = cfg.at("template_version").get<std::string>();
    r.packages = doc.at("packages").get<std::vector<std::string>>();
    for (const auto& j : doc.at("nodes")) r.nodes.push_back(node_from_json(j));
    r.verdict.label = label_field(doc.at("verdict"), "label");
    r.verdict.tags = doc.at("verdict").at("tags").get<std::set<std::string>>();
    r.incomplete = doc.at("incomplete").get<bool>();
    r.warnings = doc.at("warnings").get<std::vector<std::string>>();
    const json& s = doc.at("stats");
    r.stats.prompts = s.at("prompts").get<std::size_t>();
    r.stats.estimated_tokens = s.at("estimated_tokens").get<std::size_t>();
    for (Tier t : {Tier::Function, Tier::Class, Tier::Package}) {
      r.stats.prompts_by_tier[static_cast<std::size_t>(t)] =
          s.at("prompts_by_tier").at(std::string(tier_name(t))).get<std::size_t>();
    }
  } catch (const json::exception& e) {
    mismatch(std::string("malformed report: ") + e.what());
  }
  check_graph(r);
  return r;
}

std::string eval_to_json(const EvalReport& r) {
  json doc;
  doc["schema_version"] = kEvalSchema;
  doc["scope"] = scope_name(r.scope);
  doc["manifest_version"] = r.manifest_version;
  doc["corpus_size"] = r.corpus_size;
  doc["counts"] = {{"tp", r.counts.tp}, {"fn", r.counts.fn}, {"fp", r.counts.fp}, {"tn", r.counts.tn},
                   {"unknowns", r.counts.unknowns}};
  doc["accuracy"] = r.accuracy;
  doc["precision"] = r.precision;
  doc["recall"] = r.recall;
  json samples = json::array();
  for (const auto& s : r.per_sample) {
    json j = {{"path", s.path}, {"digest", s.sample.digest}, {"truth", label_name(s.truth)},
              {"prediction", label_name(s.prediction)}};
    if (!s.error.empty()) j["error"] = s.error;
    samples.push_back(std::move(j));
  }
  doc["per_sample"] = std::move(samples);
  doc["warnings"] = r.warnings;
  return dump(doc);
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::IoFailure, "cannot write " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) fail(Errc::IoFailure, "cannot write " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(Errc::IoFailure, "cannot write " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoFailure, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace dexlens
