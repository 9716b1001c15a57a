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

#include "dexlens/apk.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>

#include "dexlens/hash.hpp"

namespace dexlens {

namespace {

constexpr std::uint32_t kEocdSignature = 0x06054b50;
constexpr std::uint32_t kCentralSignature = 0x02014b50;
constexpr std::uint32_t kLocalSignature = 0x04034b50;
constexpr std::size_t kEocdSize = 22;
constexpr std::size_t kCentralHeaderSize = 46;
constexpr std::size_t kLocalHeaderSize = 30;
// Refuse to inflate anything claiming more than this.
constexpr std::uint64_t kMaxEntrySize = 1ull << 30;

std::uint16_t le16(const std::vector<std::uint8_t>& b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t le32(const std::vector<std::uint8_t>& b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::size_t find_eocd(const std::vector<std::uint8_t>& b) {
  if (b.size() < kEocdSize) fail(Errc::NotAZip, "file too small for a ZIP container");
  // The comment field is at most 64 KiB, so the record sits in the file tail.
  std::size_t lowest = b.size() > kEocdSize + 0xFFFF ? b.size() - kEocdSize - 0xFFFF : 0;
  for (std::size_t at = b.size() - kEocdSize + 1; at-- > lowest;) {
    if (le32(b, at) == kEocdSignature) return at;
  }
  fail(Errc::NotAZip, "end of central directory record not found");
}

std::vector<ZipEntry> read_central_directory(const std::vector<std::uint8_t>& b) {
  if (b.size() < 4 || le32(b, 0) != kLocalSignature) {
    // Empty archives start directly with the EOCD record.
    if (b.size() < 4 || le32(b, 0) != kEocdSignature) fail(Errc::NotAZip, "bad container magic");
  }
  std::size_t eocd = find_eocd(b);
  std::uint16_t count = le16(b, eocd + 10);
  std::uint32_t cd_size = le32(b, eocd + 12);
  std::uint32_t cd_offset = le32(b, eocd + 16);
  if (static_cast<std::uint64_t>(cd_offset) + cd_size > eocd) {
    fail(Errc::NotAZip, "central directory lies outside the file");
  }
  std::vector<ZipEntry> entries;
  entries.reserve(count);
  std::size_t at = cd_offset;
  for (std::uint16_t i = 0; i < count; ++i) {
    if (at + kCentralHeaderSize > eocd || le32(b, at) != kCentralSignature) {
      fail(Errc::NotAZip, "truncated central directory");
    }
    ZipEntry e;
    e.method = le16(b, at + 10);
    e.crc32 = le32(b, at + 16);
    e.compressed_size = le32(b, at + 20);
    e.size = le32(b, at + 24);
    std::uint16_t name_len = le16(b, at + 28);
    std::uint16_t extra_len = le16(b, at + 30);
    std::uint16_t comment_len = le16(b, at + 32);
    e.local_header_offset = le32(b, at + 42);
    std::size_t name_at = at + kCentralHeaderSize;
    if (name_at + name_len + extra_len + comment_len > eocd) fail(Errc::NotAZip, "truncated central directory");
    e.name.assign(reinterpret_cast<const char*>(b.data() + name_at), name_len);
    entries.push_back(std::move(e));
    at = name_at + name_len + extra_len + comment_len;
  }
  return entries;
}

}  // namespace

std::optional<Label> parse_label(std::string_view text) {
  std::string upper;
  for (char c : text) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (upper == "BENIGN") return Label::Benign;
  if (upper == "MALWARE") return Label::Malware;
  if (upper == "UNKNOWN") return Label::Unknown;
  return std::nullopt;
}

std::optional<unsigned> dex_entry_ordinal(const std::string& name) {
  constexpr std::string_view kPrefix = "classes";
  constexpr std::string_view kSuffix = ".dex";
  if (name.size() < kPrefix.size() + kSuffix.size() || !name.starts_with(kPrefix) || !name.ends_with(kSuffix)) {
    return std::nullopt;
  }
  std::string_view digits(name.data() + kPrefix.size(), name.size() - kPrefix.size() - kSuffix.size());
  if (digits.empty()) return 1u;
  if (digits.size() > 6 || digits.front() == '0') return std::nullopt;
  unsigned n = 0;
  for (char c : digits) {
    if (c < '0' || c > '9') return std::nullopt;
    n = n * 10 + static_cast<unsigned>(c - '0');
  }
  // "classes1.dex" is not part of the multidex naming scheme.
  if (n < 2) return std::nullopt;
  return n;
}

ApkArchive open_apk_bytes(std::vector<std::uint8_t> bytes, std::string source_path) {
  ApkArchive archive;
  archive.source_path = std::move(source_path);
  archive.entries = read_central_directory(bytes);

  std::vector<std::pair<unsigned, std::string>> dex;
  for (const auto& e : archive.entries) {
    if (auto n = dex_entry_ordinal(e.name)) dex.emplace_back(*n, e.name);
  }
  if (dex.empty()) fail(Errc::NoDexFound, "archive has no classes*.dex entry");
  std::sort(dex.begin(), dex.end());
  for (auto& [n, name] : dex) archive.dex_entries.push_back(std::move(name));

  archive.digest = sha256_hex(bytes);
  archive.bytes = std::make_shared<const std::vector<std::uint8_t>>(std::move(bytes));
  return archive;
}

ApkArchive open_apk(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoFailure, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(Errc::IoFailure, "read error on " + path.string());
  return open_apk_bytes(std::move(bytes), path.string());
}

std::vector<std::uint8_t> extract_dex(const ApkArchive& archive, std::size_t index) {
  if (index >= archive.dex_entries.size()) {
    fail(Errc::IndexOutOfRange, "dex index " + std::to_string(index) + " of " +
                                    std::to_string(archive.dex_entries.size()));
  }
  const std::string& name = archive.dex_entries[index];
  auto it = std::find_if(archive.entries.begin(), archive.entries.end(),
                         [&](const ZipEntry& e) { return e.name == name; });
  const ZipEntry& e = *it;
  const auto& b = *archive.bytes;

  if (e.size > kMaxEntrySize) fail(Errc::CorruptEntry, name + ": declared size too large");
  std::uint64_t lh = e.local_header_offset;
  if (lh + kLocalHeaderSize > b.size() || le32(b, lh) != kLocalSignature) {
    fail(Errc::CorruptEntry, name + ": bad local header");
  }
  std::uint64_t data_at = lh + kLocalHeaderSize + le16(b, lh + 26) + le16(b, lh + 28);
  if (data_at + e.compressed_size > b.size()) fail(Errc::CorruptEntry, name + ": data past end of file");
  const std::uint8_t* src = b.data() + data_at;

  std::vector<std::uint8_t> out;
  if (e.method == 0) {
    if (e.compressed_size != e.size) fail(Errc::CorruptEntry, name + ": stored size mismatch");
    out.assign(src, src + e.size);
  } else if (e.method == 8) {
    out.resize(static_cast<std::size_t>(e.size));
    z_stream zs{};
    if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) fail(Errc::CorruptEntry, name + ": inflate init failed");
    zs.next_in = const_cast<Bytef*>(src);
    zs.avail_in = static_cast<uInt>(e.compressed_size);
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    int rc = inflate(&zs, Z_FINISH);
    std::uint64_t produced = zs.total_out;
    // Probe for output beyond the declared size.
    unsigned char extra = 0;
    if (rc == Z_BUF_ERROR && zs.avail_out == 0) {
      zs.next_out = &extra;
      zs.avail_out = 1;
      rc = inflate(&zs, Z_FINISH);
      produced = zs.total_out;
    }
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || produced != e.size) {
      fail(Errc::CorruptEntry, name + ": decompressed length disagrees with declared size " + std::to_string(e.size));
    }
  } else {
    fail(Errc::CorruptEntry, name + ": unsupported compression method " + std::to_string(e.method));
  }
  if (crc32(0L, out.data(), static_cast<uInt>(out.size())) != e.crc32) {
    fail(Errc::CorruptEntry, name + ": CRC mismatch");
  }
  return out;
}

SampleId redacted_identity(const ApkArchive& archive, std::optional<Label> label_hint) {
  return SampleId{archive.digest, label_hint};
}

}  // namespace dexlens
