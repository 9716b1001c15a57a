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

#include <filesystem>
#include <string>
#include <string_view>

#include "dexlens/evaluator.hpp"
#include "dexlens/summarizer.hpp"

namespace dexlens {

inline constexpr std::string_view kReportSchema = "dexlens.report/1";
inline constexpr std::string_view kEvalSchema = "dexlens.eval/1";

/// Report document: config echo, flat node list keyed by id, verdict, warnings, stats.
/// The cached-response count and the ground-truth hint are not written.
std::string report_to_json(const AnalysisReport& report);

/// Throws SchemaMismatch on a wrong schema_version, malformed fields, or a broken node graph.
AnalysisReport report_from_json(std::string_view text);

std::string eval_to_json(const EvalReport& report);

/// Atomic write (temporary file + rename). Throws IoFailure.
void write_file(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace dexlens
