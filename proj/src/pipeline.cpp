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

#include "dexlens/pipeline.hpp"

namespace dexlens {

LoadedSample load_sample(const std::filesystem::path& apk_path, std::optional<Label> label_hint) {
  ApkArchive archive = open_apk(apk_path);
  LoadedSample out;
  out.id = redacted_identity(archive, label_hint);
  for (std::size_t i = 0; i < archive.dex_entries.size(); ++i) {
    std::vector<std::uint8_t> bytes = extract_dex(archive, i);
    DexFile dex = parse_dex(bytes);
    for (const auto& w : dex.warnings) out.warnings.push_back(archive.dex_entries[i] + ": " + w);
    out.dex_files.push_back(std::move(dex));
  }
  out.packages = build_units(out.dex_files, &out.warnings);
  return out;
}

}  // namespace dexlens
