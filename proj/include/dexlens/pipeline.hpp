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
#include <optional>
#include <vector>

#include "dexlens/apk.hpp"
#include "dexlens/dex.hpp"
#include "dexlens/disasm.hpp"
#include "dexlens/label.hpp"

namespace dexlens {

/// Everything extracted from one APK before any prompt is built.
struct LoadedSample {
  SampleId id;
  std::vector<DexFile> dex_files;  // in dex_entries order
  std::vector<PackageUnit> packages;
  Warnings warnings;
};

LoadedSample load_sample(const std::filesystem::path& apk_path, std::optional<Label> label_hint = std::nullopt);

}  // namespace dexlens
