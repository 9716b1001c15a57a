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
#include <string>
#include <string_view>
#include <vector>

#include "dexlens/dex.hpp"

namespace dexlens {

enum class InsnFormat {
  k10x, k12x, k11n, k11x, k10t, k20t, k22x, k21t, k21s, k21h, k21c, k23x, k22b, k22t, k22s, k22c,
  k30t, k32x, k31i, k31t, k31c, k35c, k3rc, k45cc, k4rcc, k51l,
  kUnused,
};

enum class IndexKind { None, String, Type, Field, Method, Proto, CallSite, MethodHandle };

struct OpcodeInfo {
  std::string_view mnemonic;  // empty for unused opcodes
  InsnFormat format = InsnFormat::kUnused;
  IndexKind index = IndexKind::None;
};

const OpcodeInfo& opcode_info(std::uint8_t opcode);

/// Width in code units for a format; payloads are sized separately.
std::size_t format_width(InsnFormat format);

struct Operand {
  enum class Kind { Register, RegisterList, RegisterRange, Literal, StringRef, TypeRef, MethodRef, FieldRef,
                    ProtoRef, CallSiteRef, MethodHandleRef, BranchTarget };
  Kind kind = Kind::Register;
  std::int64_t value = 0;  // register, literal, pool index or absolute target address
  std::string text;        // symbolic rendering
};

struct Instruction {
  std::uint32_t address = 0;  // code-unit offset within the method
  std::uint8_t opcode = 0;
  std::string mnemonic;
  std::vector<Operand> operands;
  std::size_t width = 1;  // code units, payload pseudo-instructions included
  std::vector<std::uint16_t> raw;  // populated for unknown opcodes only
};

/// Decodes the whole instruction stream. Unused opcodes become "unknown-0xNN" (width 1).
/// If the buffer ends mid-instruction decoding stops, a warning is appended and the
/// instructions decoded so far are returned.
std::vector<Instruction> decode_instructions(const CodeItem& code, const DexFile& dex, Warnings* warnings = nullptr);

/// "0004: invoke-virtual {v0, v1}, dalvik.system.DexClassLoader.loadClass(...)..."
std::string render_instruction(const Instruction& insn);

/// Replaces every non-ASCII or control character with a \uXXXX escape (UTF-16 units).
std::string escape_non_ascii(std::string_view utf8);

/// Quoted Java-style string literal, 7-bit clean.
std::string quote_string(std::string_view utf8);

std::string method_access_string(std::uint32_t flags);
std::string field_access_string(std::uint32_t flags);
std::string class_access_string(std::uint32_t flags);

struct SourceRef {
  std::size_t dex_ordinal = 0;     // index into the archive's dex list
  std::size_t class_def_index = 0;
  std::uint32_t method_idx = 0;

  bool operator==(const SourceRef&) const = default;
};

struct FunctionUnit {
  std::string qualified_name;  // "cn.utils.RTUtils.b"
  std::string signature;       // "b(Landroid/content/Context;Ljava/lang/String;Ljava/lang/String;)V"
  std::string rendered_text;
  SourceRef source_ref;
  std::size_t instruction_count = 0;
  Warnings warnings;
};

struct ClassUnit {
  std::string original_name;  // dotted
  std::string descriptor;
  std::string declaration;    // ".class public ... extends ..."
  /// Field declarations plus abstract/native method declarations.
  std::vector<std::string> skeleton;
  std::vector<FunctionUnit> functions;
};

struct PackageUnit {
  std::string package_name;  // dotted, "(default)" for the unnamed package
  std::vector<ClassUnit> classes;
};

inline constexpr std::string_view kDefaultPackage = "(default)";

/// "Lcom/foo/Bar;" -> "com.foo"; "LMain;" -> "(default)".
std::string package_of(std::string_view descriptor);

FunctionUnit render_function(const ClassDef& cls, const EncodedMethod& method, const DexFile& dex,
                             std::size_t dex_ordinal = 0, std::size_t class_def_index = 0);

/// Merges classes from every DEX (first definition wins) and groups them by package.
std::vector<PackageUnit> build_units(const std::vector<DexFile>& dex_files, Warnings* warnings = nullptr);

std::size_t count_functions(const std::vector<PackageUnit>& packages);

}  // namespace dexlens
