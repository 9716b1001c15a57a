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
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dexlens/error.hpp"
#include "dexlens/label.hpp"

namespace dexlens {

struct ZipEntry {
  std::string name;
  std::uint64_t size = 0;             // declared uncompressed size
  std::uint64_t compressed_size = 0;
  std::uint16_t method = 0;           // 0 = stored, 8 = deflate
  std::uint32_t crc32 = 0;
  std::uint64_t local_header_offset = 0;
};

/// An opened APK. Immutable after open_apk(); safe to share across threads.
struct ApkArchive {
  std::string source_path;
  std::vector<ZipEntry> entries;
  /// classes.dex first, then classesN.dex by ascending N.
  std::vector<std::string> dex_entries;
  /// SHA-256 of the raw file, 64 lowercase hex characters.
  std::string digest;

  std::shared_ptr<const std::vector<std::uint8_t>> bytes;
};

/// Content-addressed sample identity. Carries no path or entry-name material.
struct SampleId {
  std::string digest;
  /// Ground truth, consumed only by the evaluator.
  std::optional<Label> label_hint;

  bool operator==(const SampleId&) const = default;
};

ApkArchive open_apk(const std::filesystem::path& path);

/// Same as open_apk() over an in-memory image; source_path is recorded verbatim.
ApkArchive open_apk_bytes(std::vector<std::uint8_t> bytes, std::string source_path = {});

/// Decompressed bytes of dex_entries[index].
std::vector<std::uint8_t> extract_dex(const ApkArchive& archive, std::size_t index);

SampleId redacted_identity(const ApkArchive& archive, std::optional<Label> label_hint = std::nullopt);

/// Ordinal of a classes*.dex entry name (1 for classes.dex), or nullopt.
std::optional<unsigned> dex_entry_ordinal(const std::string& name);

}  // namespace dexlens
