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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dexlens/error.hpp"

namespace dexlens {

namespace access {
constexpr std::uint32_t kPublic = 0x1;
constexpr std::uint32_t kPrivate = 0x2;
constexpr std::uint32_t kProtected = 0x4;
constexpr std::uint32_t kStatic = 0x8;
constexpr std::uint32_t kFinal = 0x10;
constexpr std::uint32_t kSynchronized = 0x20;
constexpr std::uint32_t kBridge = 0x40;  // methods; "volatile" on fields
constexpr std::uint32_t kVarargs = 0x80;  // methods; "transient" on fields
constexpr std::uint32_t kNative = 0x100;
constexpr std::uint32_t kInterface = 0x200;
constexpr std::uint32_t kAbstract = 0x400;
constexpr std::uint32_t kStrict = 0x800;
constexpr std::uint32_t kSynthetic = 0x1000;
constexpr std::uint32_t kAnnotation = 0x2000;
constexpr std::uint32_t kEnum = 0x4000;
constexpr std::uint32_t kConstructor = 0x10000;
constexpr std::uint32_t kDeclaredSynchronized = 0x20000;
}  // namespace access

struct Uleb128 {
  std::uint64_t value = 0;
  std::size_t next_offset = 0;
};

/// Decodes one unsigned LEB128 value (at most 5 bytes).
/// Throws Truncated if the buffer ends mid-value, Overlong past 5 bytes.
Uleb128 decode_uleb128(std::span<const std::uint8_t> buffer, std::size_t offset);

struct ProtoId {
  std::uint32_t shorty_idx = 0;
  std::uint32_t return_type_idx = 0;
  std::vector<std::uint32_t> parameters;  // type indices
};

struct FieldId {
  std::uint32_t class_idx = 0;
  std::uint32_t type_idx = 0;
  std::uint32_t name_idx = 0;
};

struct MethodId {
  std::uint32_t class_idx = 0;
  std::uint32_t proto_idx = 0;
  std::uint32_t name_idx = 0;
};

struct CodeItem {
  std::uint16_t registers_size = 0;
  std::uint16_t ins_size = 0;
  std::uint16_t outs_size = 0;
  std::uint16_t tries_size = 0;
  std::vector<std::uint16_t> insns;

  std::size_t insns_count() const { return insns.size(); }
};

struct EncodedField {
  std::uint32_t field_idx = 0;
  std::uint32_t access_flags = 0;
  bool is_static = false;
};

struct EncodedMethod {
  std::uint32_t method_idx = 0;
  std::uint32_t access_flags = 0;
  bool direct = false;
  std::optional<CodeItem> code;
};

struct ClassDef {
  std::uint32_t type_idx = 0;
  std::optional<std::uint32_t> superclass_idx;
  std::uint32_t access_flags = 0;
  std::vector<std::uint32_t> interfaces;
  std::vector<EncodedField> fields;
  /// Direct methods followed by virtual methods, each group in method_idx order.
  std::vector<EncodedMethod> methods;
};

/// Immutable in-memory model of one DEX file.
struct DexFile {
  std::string version;  // e.g. "035"
  std::vector<std::string> strings;  // UTF-8, invalid MUTF-8 replaced by U+FFFD
  std::vector<std::uint32_t> type_ids;  // string indices
  std::vector<ProtoId> protos;
  std::vector<FieldId> fields;
  std::vector<MethodId> methods;
  std::vector<ClassDef> class_defs;
  bool header_checksum_ok = false;
  Warnings warnings;
};

/// Parses a DEX image. Never reads outside `buffer`.
/// Throws BadMagic, Truncated or MalformedOffset; a checksum mismatch is only a warning.
DexFile parse_dex(std::span<const std::uint8_t> buffer);

struct MethodRef {
  std::string class_descriptor;  // "Lcom/foo/Bar;"
  std::string name;
  std::string proto;  // "(Landroid/content/Context;)V"
  /// "com.foo.Bar.initRoot(Landroid/content/Context;)V"
  std::string rendering() const;
};

struct FieldRef {
  std::string class_descriptor;
  std::string name;
  std::string type_descriptor;
  /// "com.foo.Bar.name:Ljava/lang/String;"
  std::string rendering() const;
};

const std::string& resolve_string(const DexFile& dex, std::size_t string_idx);
const std::string& resolve_type(const DexFile& dex, std::size_t type_idx);
std::string resolve_proto(const DexFile& dex, std::size_t proto_idx);
MethodRef resolve_method(const DexFile& dex, std::size_t method_idx);
FieldRef resolve_field(const DexFile& dex, std::size_t field_idx);

/// "Ldalvik/system/DexClassLoader;" -> "dalvik.system.DexClassLoader", "[I" -> "int[]".
std::string descriptor_to_dotted(std::string_view descriptor);

/// Decodes modified UTF-8 into UTF-8. Invalid units become U+FFFD and set `replaced`.
std::string decode_mutf8(std::span<const std::uint8_t> bytes, bool& replaced);

}  // namespace dexlens
