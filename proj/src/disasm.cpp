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

#include "dexlens/disasm.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>

namespace dexlens {

namespace {

using F = InsnFormat;
using K = IndexKind;

std::array<OpcodeInfo, 256> make_table() {
  std::array<OpcodeInfo, 256> t{};
  auto set = [&](int op, std::string_view name, F fmt, K kind = K::None) { t[op] = OpcodeInfo{name, fmt, kind}; };

  set(0x00, "nop", F::k10x);
  set(0x01, "move", F::k12x);
  set(0x02, "move/from16", F::k22x);
  set(0x03, "move/16", F::k32x);
  set(0x04, "move-wide", F::k12x);
  set(0x05, "move-wide/from16", F::k22x);
  set(0x06, "move-wide/16", F::k32x);
  set(0x07, "move-object", F::k12x);
  set(0x08, "move-object/from16", F::k22x);
  set(0x09, "move-object/16", F::k32x);
  set(0x0a, "move-result", F::k11x);
  set(0x0b, "move-result-wide", F::k11x);
  set(0x0c, "move-result-object", F::k11x);
  set(0x0d, "move-exception", F::k11x);
  set(0x0e, "return-void", F::k10x);
  set(0x0f, "return", F::k11x);
  set(0x10, "return-wide", F::k11x);
  set(0x11, "return-object", F::k11x);
  set(0x12, "const/4", F::k11n);
  set(0x13, "const/16", F::k21s);
  set(0x14, "const", F::k31i);
  set(0x15, "const/high16", F::k21h);
  set(0x16, "const-wide/16", F::k21s);
  set(0x17, "const-wide/32", F::k31i);
  set(0x18, "const-wide", F::k51l);
  set(0x19, "const-wide/high16", F::k21h);
  set(0x1a, "const-string", F::k21c, K::String);
  set(0x1b, "const-string/jumbo", F::k31c, K::String);
  set(0x1c, "const-class", F::k21c, K::Type);
  set(0x1d, "monitor-enter", F::k11x);
  set(0x1e, "monitor-exit", F::k11x);
  set(0x1f, "check-cast", F::k21c, K::Type);
  set(0x20, "instance-of", F::k22c, K::Type);
  set(0x21, "array-length", F::k12x);
  set(0x22, "new-instance", F::k21c, K::Type);
  set(0x23, "new-array", F::k22c, K::Type);
  set(0x24, "filled-new-array", F::k35c, K::Type);
  set(0x25, "filled-new-array/range", F::k3rc, K::Type);
  set(0x26, "fill-array-data", F::k31t);
  set(0x27, "throw", F::k11x);
  set(0x28, "goto", F::k10t);
  set(0x29, "goto/16", F::k20t);
  set(0x2a, "goto/32", F::k30t);
  set(0x2b, "packed-switch", F::k31t);
  set(0x2c, "sparse-switch", F::k31t);

  constexpr std::string_view cmp[] = {"cmpl-float", "cmpg-float", "cmpl-double", "cmpg-double", "cmp-long"};
  for (int i = 0; i < 5; ++i) set(0x2d + i, cmp[i], F::k23x);
  constexpr std::string_view if2[] = {"if-eq", "if-ne", "if-lt", "if-ge", "if-gt", "if-le"};
  for (int i = 0; i < 6; ++i) set(0x32 + i, if2[i], F::k22t);
  constexpr std::string_view ifz[] = {"if-eqz", "if-nez", "if-ltz", "if-gez", "if-gtz", "if-lez"};
  for (int i = 0; i < 6; ++i) set(0x38 + i, ifz[i], F::k21t);

  constexpr std::string_view arr[] = {"aget", "aget-wide", "aget-object", "aget-boolean", "aget-byte",
                                      "aget-char", "aget-short", "aput", "aput-wide", "aput-object",
                                      "aput-boolean", "aput-byte", "aput-char", "aput-short"};
  for (int i = 0; i < 14; ++i) set(0x44 + i, arr[i], F::k23x);
  constexpr std::string_view inst[] = {"iget", "iget-wide", "iget-object", "iget-boolean", "iget-byte",
                                       "iget-char", "iget-short", "iput", "iput-wide", "iput-object",
                                       "iput-boolean", "iput-byte", "iput-char", "iput-short"};
  for (int i = 0; i < 14; ++i) set(0x52 + i, inst[i], F::k22c, K::Field);
  constexpr std::string_view stat[] = {"sget", "sget-wide", "sget-object", "sget-boolean", "sget-byte",
                                       "sget-char", "sget-short", "sput", "sput-wide", "sput-object",
                                       "sput-boolean", "sput-byte", "sput-char", "sput-short"};
  for (int i = 0; i < 14; ++i) set(0x60 + i, stat[i], F::k21c, K::Field);

  constexpr std::string_view inv[] = {"invoke-virtual", "invoke-super", "invoke-direct", "invoke-static",
                                      "invoke-interface"};
  constexpr std::string_view inv_range[] = {"invoke-virtual/range", "invoke-super/range", "invoke-direct/range",
                                            "invoke-static/range", "invoke-interface/range"};
  for (int i = 0; i < 5; ++i) {
    set(0x6e + i, inv[i], F::k35c, K::Method);
    set(0x74 + i, inv_range[i], F::k3rc, K::Method);
  }

  constexpr std::string_view unop[] = {
      "neg-int",      "not-int",       "neg-long",      "not-long",     "neg-float",     "neg-double",
      "int-to-long",  "int-to-float",  "int-to-double", "long-to-int",  "long-to-float", "long-to-double",
      "float-to-int", "float-to-long", "float-to-double", "double-to-int", "double-to-long", "double-to-float",
      "int-to-byte",  "int-to-char",   "int-to-short"};
  for (int i = 0; i < 21; ++i) set(0x7b + i, unop[i], F::k12x);

  constexpr std::string_view binop[] = {
      "add-int",    "sub-int",    "mul-int",    "div-int",    "rem-int",    "and-int",    "or-int",
      "xor-int",    "shl-int",    "shr-int",    "ushr-int",   "add-long",   "sub-long",   "mul-long",
      "div-long",   "rem-long",   "and-long",   "or-long",    "xor-long",   "shl-long",   "shr-long",
      "ushr-long",  "add-float",  "sub-float",  "mul-float",  "div-float",  "rem-float",  "add-double",
      "sub-double", "mul-double", "div-double", "rem-double"};
  constexpr std::string_view binop2[] = {
      "add-int/2addr",    "sub-int/2addr",    "mul-int/2addr",    "div-int/2addr",    "rem-int/2addr",
      "and-int/2addr",    "or-int/2addr",     "xor-int/2addr",    "shl-int/2addr",    "shr-int/2addr",
      "ushr-int/2addr",   "add-long/2addr",   "sub-long/2addr",   "mul-long/2addr",   "div-long/2addr",
      "rem-long/2addr",   "and-long/2addr",   "or-long/2addr",    "xor-long/2addr",   "shl-long/2addr",
      "shr-long/2addr",   "ushr-long/2addr",  "add-float/2addr",  "sub-float/2addr",  "mul-float/2addr",
      "div-float/2addr",  "rem-float/2addr",  "add-double/2addr", "sub-double/2addr", "mul-double/2addr",
      "div-double/2addr", "rem-double/2addr"};
  for (int i = 0; i < 32; ++i) {
    set(0x90 + i, binop[i], F::k23x);
    set(0xb0 + i, binop2[i], F::k12x);
  }

  constexpr std::string_view lit16[] = {"add-int/lit16", "rsub-int",       "mul-int/lit16", "div-int/lit16",
                                        "rem-int/lit16", "and-int/lit16", "or-int/lit16",  "xor-int/lit16"};
  for (int i = 0; i < 8; ++i) set(0xd0 + i, lit16[i], F::k22s);
  constexpr std::string_view lit8[] = {"add-int/lit8", "rsub-int/lit8", "mul-int/lit8", "div-int/lit8",
                                       "rem-int/lit8", "and-int/lit8",  "or-int/lit8",  "xor-int/lit8",
                                       "shl-int/lit8", "shr-int/lit8",  "ushr-int/lit8"};
  for (int i = 0; i < 11; ++i) set(0xd8 + i, lit8[i], F::k22b);

  set(0xfa, "invoke-polymorphic", F::k45cc, K::Method);
  set(0xfb, "invoke-polymorphic/range", F::k4rcc, K::Method);
  set(0xfc, "invoke-custom", F::k35c, K::CallSite);
  set(0xfd, "invoke-custom/range", F::k3rc, K::CallSite);
  set(0xfe, "const-method-handle", F::k21c, K::MethodHandle);
  set(0xff, "const-method-type", F::k21c, K::Proto);
  return t;
}

const std::array<OpcodeInfo, 256>& table() {
  static const std::array<OpcodeInfo, 256> t = make_table();
  return t;
}

constexpr std::uint16_t kPackedSwitchPayload = 0x0100;
constexpr std::uint16_t kSparseSwitchPayload = 0x0200;
constexpr std::uint16_t kFillArrayPayload = 0x0300;

std::string hex4(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04x", v);
  return buf;
}

std::string reg(std::uint32_t r) { return "v" + std::to_string(r); }

class Decoder {
 public:
  Decoder(const CodeItem& code, const DexFile& dex, Warnings* warnings)
      : insns_(code.insns), dex_(dex), warnings_(warnings) {}

  std::vector<Instruction> run() {
    std::vector<Instruction> out;
    std::size_t pc = 0;
    while (pc < insns_.size()) {
      Instruction insn;
      insn.address = static_cast<std::uint32_t>(pc);
      if (!decode_one(pc, insn)) {
        warn("truncated method: instruction at " + hex4(static_cast<std::uint32_t>(pc)) +
             " runs past the end of the code buffer");
        break;
      }
      pc += insn.width;
      out.push_back(std::move(insn));
    }
    return out;
  }

 private:
  std::uint16_t u(std::size_t at) const { return insns_[at]; }
  std::uint32_t u32(std::size_t at) const { return u(at) | (static_cast<std::uint32_t>(u(at + 1)) << 16); }

  void warn(std::string msg) {
    if (warnings_) warnings_->push_back(std::move(msg));
  }

  Operand reg_op(std::uint32_t r) { return Operand{Operand::Kind::Register, r, reg(r)}; }

  Operand literal(std::int64_t v) { return Operand{Operand::Kind::Literal, v, "#" + std::to_string(v)}; }

  Operand branch(std::size_t pc, std::int64_t delta) {
    std::int64_t target = static_cast<std::int64_t>(pc) + delta;
    return Operand{Operand::Kind::BranchTarget, target, target >= 0 ? hex4(static_cast<std::uint32_t>(target))
                                                                    : "-" + hex4(static_cast<std::uint32_t>(-target))};
  }

  Operand index_op(IndexKind kind, std::uint32_t idx) {
    auto bad = [&](const char* what) {
      warn(std::string("dangling ") + what + " index " + std::to_string(idx));
      return std::string(what) + "@" + std::to_string(idx);
    };
    switch (kind) {
      case K::String:
        return {Operand::Kind::StringRef, idx,
                idx < dex_.strings.size() ? quote_string(dex_.strings[idx]) : bad("string")};
      case K::Type:
        return {Operand::Kind::TypeRef, idx,
                idx < dex_.type_ids.size() ? descriptor_to_dotted(resolve_type(dex_, idx)) : bad("type")};
      case K::Field:
        return {Operand::Kind::FieldRef, idx,
                idx < dex_.fields.size() ? resolve_field(dex_, idx).rendering() : bad("field")};
      case K::Method:
        return {Operand::Kind::MethodRef, idx,
                idx < dex_.methods.size() ? resolve_method(dex_, idx).rendering() : bad("method")};
      case K::Proto:
        return {Operand::Kind::ProtoRef, idx, idx < dex_.protos.size() ? resolve_proto(dex_, idx) : bad("proto")};
      case K::CallSite:
        return {Operand::Kind::CallSiteRef, idx, "call_site@" + std::to_string(idx)};
      case K::MethodHandle:
        return {Operand::Kind::MethodHandleRef, idx, "method_handle@" + std::to_string(idx)};
      case K::None:
        break;
    }
    return literal(idx);
  }

  bool decode_payload(std::size_t pc, std::uint16_t ident, Instruction& insn) {
    std::size_t avail = insns_.size() - pc;
    if (avail < 2) return false;
    std::uint32_t n = u(pc + 1);
    std::uint64_t width = 0;
    if (ident == kPackedSwitchPayload) {
      width = 4 + 2ull * n;
      insn.mnemonic = "packed-switch-payload";
    } else if (ident == kSparseSwitchPayload) {
      width = 2 + 4ull * n;
      insn.mnemonic = "sparse-switch-payload";
    } else {
      if (avail < 4) return false;
      std::uint16_t elem = u(pc + 1);
      n = u32(pc + 2);
      width = 4 + (static_cast<std::uint64_t>(n) * elem + 1) / 2;
      insn.mnemonic = "fill-array-data-payload";
      insn.operands.push_back(Operand{Operand::Kind::Literal, elem, "element-width=" + std::to_string(elem)});
    }
    if (width > avail) return false;
    insn.operands.push_back(Operand{Operand::Kind::Literal, n, "entries=" + std::to_string(n)});
    if (ident == kPackedSwitchPayload && n > 0) {
      std::int32_t first = static_cast<std::int32_t>(u32(pc + 2));
      insn.operands.insert(insn.operands.begin(),
                           Operand{Operand::Kind::Literal, first, "first-key=" + std::to_string(first)});
    }
    insn.width = static_cast<std::size_t>(width);
    return true;
  }

  bool decode_one(std::size_t pc, Instruction& insn) {
    std::uint16_t unit = u(pc);
    std::uint8_t op = unit & 0xFF;
    std::uint32_t aa = unit >> 8;
    std::uint32_t a = (unit >> 8) & 0xF;
    std::uint32_t b = unit >> 12;
    insn.opcode = op;
    if (op == 0x00 && (unit == kPackedSwitchPayload || unit == kSparseSwitchPayload || unit == kFillArrayPayload)) {
      return decode_payload(pc, unit, insn);
    }
    const OpcodeInfo& info = opcode_info(op);
    if (info.format == F::kUnused) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "unknown-0x%02x", op);
      insn.mnemonic = buf;
      insn.width = 1;
      insn.raw.push_back(unit);
      return true;
    }
    insn.mnemonic = std::string(info.mnemonic);
    insn.width = format_width(info.format);
    if (insn.width > insns_.size() - pc) return false;
    auto& ops = insn.operands;
    switch (info.format) {
      case F::k10x:
        break;
      case F::k12x:
        ops = {reg_op(a), reg_op(b)};
        break;
      case F::k11n:
        ops = {reg_op(a), literal(static_cast<std::int8_t>(b << 4) >> 4)};
        break;
      case F::k11x:
        ops = {reg_op(aa)};
        break;
      case F::k10t:
        ops = {branch(pc, static_cast<std::int8_t>(aa))};
        break;
      case F::k20t:
        ops = {branch(pc, static_cast<std::int16_t>(u(pc + 1)))};
        break;
      case F::k22x:
        ops = {reg_op(aa), reg_op(u(pc + 1))};
        break;
      case F::k21t:
        ops = {reg_op(aa), branch(pc, static_cast<std::int16_t>(u(pc + 1)))};
        break;
      case F::k21s:
        ops = {reg_op(aa), literal(static_cast<std::int16_t>(u(pc + 1)))};
        break;
      case F::k21h: {
        std::int64_t v = static_cast<std::int16_t>(u(pc + 1));
        v = op == 0x19 ? static_cast<std::int64_t>(static_cast<std::uint64_t>(v) << 48) : v * 65536;
        ops = {reg_op(aa), literal(v)};
        break;
      }
      case F::k21c:
        ops = {reg_op(aa), index_op(info.index, u(pc + 1))};
        break;
      case F::k23x:
        ops = {reg_op(aa), reg_op(u(pc + 1) & 0xFF), reg_op(u(pc + 1) >> 8)};
        break;
      case F::k22b:
        ops = {reg_op(aa), reg_op(u(pc + 1) & 0xFF), literal(static_cast<std::int8_t>(u(pc + 1) >> 8))};
        break;
      case F::k22t:
        ops = {reg_op(a), reg_op(b), branch(pc, static_cast<std::int16_t>(u(pc + 1)))};
        break;
      case F::k22s:
        ops = {reg_op(a), reg_op(b), literal(static_cast<std::int16_t>(u(pc + 1)))};
        break;
      case F::k22c:
        ops = {reg_op(a), reg_op(b), index_op(info.index, u(pc + 1))};
        break;
      case F::k30t:
        ops = {branch(pc, static_cast<std::int32_t>(u32(pc + 1)))};
        break;
      case F::k32x:
        ops = {reg_op(u(pc + 1)), reg_op(u(pc + 2))};
        break;
      case F::k31i:
        ops = {reg_op(aa), literal(static_cast<std::int32_t>(u32(pc + 1)))};
        break;
      case F::k31t:
        ops = {reg_op(aa), branch(pc, static_cast<std::int32_t>(u32(pc + 1)))};
        break;
      case F::k31c:
        ops = {reg_op(aa), index_op(info.index, u32(pc + 1))};
        break;
      case F::k35c:
      case F::k45cc: {
        std::uint32_t count = b;
        std::uint16_t regs = u(pc + 2);
        std::uint32_t list[5] = {regs & 0xFu, (regs >> 4) & 0xFu, (regs >> 8) & 0xFu, (regs >> 12) & 0xFu, a};
        Operand l{Operand::Kind::RegisterList, count, "{"};
        for (std::uint32_t i = 0; i < std::min(count, 5u); ++i) {
          if (i) l.text += ", ";
          l.text += reg(list[i]);
        }
        l.text += "}";
        ops = {std::move(l), index_op(info.index, u(pc + 1))};
        if (info.format == F::k45cc) ops.push_back(index_op(K::Proto, u(pc + 3)));
        break;
      }
      case F::k3rc:
      case F::k4rcc: {
        std::uint32_t first = u(pc + 2);
        Operand l{Operand::Kind::RegisterRange, aa, "{}"};
        if (aa == 1) l.text = "{" + reg(first) + "}";
        if (aa > 1) l.text = "{" + reg(first) + " .. " + reg(first + aa - 1) + "}";
        ops = {std::move(l), index_op(info.index, u(pc + 1))};
        if (info.format == F::k4rcc) ops.push_back(index_op(K::Proto, u(pc + 3)));
        break;
      }
      case F::k51l: {
        std::uint64_t v = u32(pc + 1) | (static_cast<std::uint64_t>(u32(pc + 3)) << 32);
        ops = {reg_op(aa), literal(static_cast<std::int64_t>(v))};
        break;
      }
      case F::kUnused:
        break;
    }
    return true;
  }

  const std::vector<std::uint16_t>& insns_;
  const DexFile& dex_;
  Warnings* warnings_;
};

void append_escape(std::string& out, std::uint32_t unit) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "\\u%04x", unit);
  out += buf;
}

// Decodes one UTF-8 code point; returns bytes consumed (1 on invalid input, cp = U+FFFD).
std::size_t next_code_point(std::string_view s, std::size_t i, std::uint32_t& cp) {
  auto c = static_cast<unsigned char>(s[i]);
  std::size_t n = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
  if (n == 0 || i + n > s.size()) {
    cp = 0xFFFD;
    return 1;
  }
  cp = n == 1 ? c : n == 2 ? (c & 0x1F) : n == 3 ? (c & 0x0F) : (c & 0x07);
  for (std::size_t k = 1; k < n; ++k) {
    auto cc = static_cast<unsigned char>(s[i + k]);
    if ((cc & 0xC0) != 0x80) {
      cp = 0xFFFD;
      return 1;
    }
    cp = (cp << 6) | (cc & 0x3F);
  }
  return n;
}

void append_code_point_escaped(std::string& out, std::uint32_t cp) {
  if (cp >= 0x10000) {
    cp -= 0x10000;
    append_escape(out, 0xD800 + (cp >> 10));
    append_escape(out, 0xDC00 + (cp & 0x3FF));
  } else {
    append_escape(out, cp);
  }
}

std::string join_flags(std::uint32_t flags, std::initializer_list<std::pair<std::uint32_t, const char*>> names) {
  std::string out;
  for (const auto& [bit, name] : names) {
    if (flags & bit) {
      if (!out.empty()) out += ' ';
      out += name;
    }
  }
  return out;
}

}  // namespace

const OpcodeInfo& opcode_info(std::uint8_t opcode) { return table()[opcode]; }

std::size_t format_width(InsnFormat format) {
  switch (format) {
    case F::k10x: case F::k12x: case F::k11n: case F::k11x: case F::k10t: case F::kUnused:
      return 1;
    case F::k20t: case F::k22x: case F::k21t: case F::k21s: case F::k21h: case F::k21c: case F::k23x:
    case F::k22b: case F::k22t: case F::k22s: case F::k22c:
      return 2;
    case F::k30t: case F::k32x: case F::k31i: case F::k31t: case F::k31c: case F::k35c: case F::k3rc:
      return 3;
    case F::k45cc: case F::k4rcc:
      return 4;
    case F::k51l:
      return 5;
  }
  return 1;
}

std::vector<Instruction> decode_instructions(const CodeItem& code, const DexFile& dex, Warnings* warnings) {
  return Decoder(code, dex, warnings).run();
}

std::string render_instruction(const Instruction& insn) {
  std::string line = hex4(insn.address) + ": " + insn.mnemonic;
  if (!insn.raw.empty()) {
    for (auto unit : insn.raw) line += " " + hex4(unit);
    return line;
  }
  for (std::size_t i = 0; i < insn.operands.size(); ++i) {
    line += i ? ", " : " ";
    line += insn.operands[i].text;
  }
  return line;
}

std::string escape_non_ascii(std::string_view utf8) {
  std::string out;
  out.reserve(utf8.size());
  for (std::size_t i = 0; i < utf8.size();) {
    std::uint32_t cp = 0;
    i += next_code_point(utf8, i, cp);
    if (cp >= 0x20 && cp < 0x7F) {
      out.push_back(static_cast<char>(cp));
    } else {
      append_code_point_escaped(out, cp);
    }
  }
  return out;
}

std::string quote_string(std::string_view utf8) {
  std::string out = "\"";
  for (std::size_t i = 0; i < utf8.size();) {
    std::uint32_t cp = 0;
    i += next_code_point(utf8, i, cp);
    switch (cp) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (cp >= 0x20 && cp < 0x7F) {
          out.push_back(static_cast<char>(cp));
        } else {
          append_code_point_escaped(out, cp);
        }
    }
  }
  out += '"';
  return out;
}

std::string method_access_string(std::uint32_t flags) {
  using namespace access;
  return join_flags(flags, {{kPublic, "public"}, {kPrivate, "private"}, {kProtected, "protected"},
                            {kStatic, "static"}, {kFinal, "final"}, {kSynchronized, "synchronized"},
                            {kBridge, "bridge"}, {kVarargs, "varargs"}, {kNative, "native"},
                            {kAbstract, "abstract"}, {kStrict, "strictfp"}, {kSynthetic, "synthetic"},
                            {kConstructor, "constructor"}, {kDeclaredSynchronized, "declared-synchronized"}});
}

std::string field_access_string(std::uint32_t flags) {
  using namespace access;
  return join_flags(flags, {{kPublic, "public"}, {kPrivate, "private"}, {kProtected, "protected"},
                            {kStatic, "static"}, {kFinal, "final"}, {kBridge, "volatile"},
                            {kVarargs, "transient"}, {kSynthetic, "synthetic"}, {kEnum, "enum"}});
}

std::string class_access_string(std::uint32_t flags) {
  using namespace access;
  return join_flags(flags, {{kPublic, "public"}, {kPrivate, "private"}, {kProtected, "protected"},
                            {kStatic, "static"}, {kFinal, "final"}, {kInterface, "interface"},
                            {kAbstract, "abstract"}, {kSynthetic, "synthetic"}, {kAnnotation, "annotation"},
                            {kEnum, "enum"}});
}

std::string package_of(std::string_view descriptor) {
  std::string dotted = descriptor_to_dotted(descriptor);
  auto dot = dotted.rfind('.');
  if (dot == std::string::npos || dot == 0) return std::string(kDefaultPackage);
  return dotted.substr(0, dot);
}

namespace {

std::string method_declaration(const EncodedMethod& m, const DexFile& dex) {
  MethodRef ref = resolve_method(dex, m.method_idx);
  std::string flags = method_access_string(m.access_flags);
  return ".method " + (flags.empty() ? std::string() : flags + " ") + ref.rendering();
}

}  // namespace

FunctionUnit render_function(const ClassDef& cls, const EncodedMethod& method, const DexFile& dex,
                             std::size_t dex_ordinal, std::size_t class_def_index) {
  (void)cls;
  MethodRef ref = resolve_method(dex, method.method_idx);
  FunctionUnit unit;
  unit.qualified_name = escape_non_ascii(descriptor_to_dotted(ref.class_descriptor) + "." + ref.name);
  unit.signature = escape_non_ascii(ref.name + ref.proto);
  unit.source_ref = SourceRef{dex_ordinal, class_def_index, method.method_idx};

  std::string text = escape_non_ascii(method_declaration(method, dex));
  if (method.code) {
    text += "  registers=" + std::to_string(method.code->registers_size);
    auto insns = decode_instructions(*method.code, dex, &unit.warnings);
    unit.instruction_count = insns.size();
    for (const auto& insn : insns) {
      text += "\n  ";
      text += escape_non_ascii(render_instruction(insn));
    }
  }
  unit.rendered_text = std::move(text);
  return unit;
}

std::vector<PackageUnit> build_units(const std::vector<DexFile>& dex_files, Warnings* warnings) {
  struct Located {
    std::size_t dex;
    std::size_t class_def;
  };
  std::map<std::string, Located> by_descriptor;
  for (std::size_t d = 0; d < dex_files.size(); ++d) {
    const DexFile& dex = dex_files[d];
    for (std::size_t c = 0; c < dex.class_defs.size(); ++c) {
      const std::string& desc = resolve_type(dex, dex.class_defs[c].type_idx);
      auto [it, inserted] = by_descriptor.emplace(desc, Located{d, c});
      if (!inserted && warnings) {
        warnings->push_back("duplicate class " + escape_non_ascii(desc) + " in dex " + std::to_string(d) +
                            ", keeping the definition from dex " + std::to_string(it->second.dex));
      }
    }
  }

  std::map<std::string, std::map<std::string, ClassUnit>> packages;
  for (const auto& [desc, loc] : by_descriptor) {
    const DexFile& dex = dex_files[loc.dex];
    const ClassDef& cls = dex.class_defs[loc.class_def];
    ClassUnit unit;
    unit.descriptor = escape_non_ascii(desc);
    unit.original_name = escape_non_ascii(descriptor_to_dotted(desc));

    std::string decl = ".class";
    std::string flags = class_access_string(cls.access_flags);
    if (!flags.empty()) decl += " " + flags;
    decl += " " + descriptor_to_dotted(desc);
    if (cls.superclass_idx) decl += " extends " + descriptor_to_dotted(resolve_type(dex, *cls.superclass_idx));
    for (std::size_t i = 0; i < cls.interfaces.size(); ++i) {
      decl += i ? ", " : " implements ";
      decl += descriptor_to_dotted(resolve_type(dex, cls.interfaces[i]));
    }
    unit.declaration = escape_non_ascii(decl);

    for (const auto& f : cls.fields) {
      FieldRef ref = resolve_field(dex, f.field_idx);
      std::string fflags = field_access_string(f.access_flags);
      unit.skeleton.push_back(
          escape_non_ascii(".field " + (fflags.empty() ? std::string() : fflags + " ") + ref.name + ":" +
                           descriptor_to_dotted(ref.type_descriptor)));
    }

    std::vector<const EncodedMethod*> methods;
    for (const auto& m : cls.methods) methods.push_back(&m);
    std::stable_sort(methods.begin(), methods.end(),
                     [](const EncodedMethod* x, const EncodedMethod* y) { return x->method_idx < y->method_idx; });
    for (const EncodedMethod* m : methods) {
      if (m->code) {
        unit.functions.push_back(render_function(cls, *m, dex, loc.dex, loc.class_def));
      } else {
        unit.skeleton.push_back(escape_non_ascii(method_declaration(*m, dex)));
      }
    }
    std::string dotted = unit.original_name;
    packages[package_of(desc)].emplace(dotted, std::move(unit));
  }

  std::vector<PackageUnit> out;
  out.reserve(packages.size());
  for (auto& [name, classes] : packages) {
    PackageUnit pkg;
    pkg.package_name = escape_non_ascii(name);
    for (auto& [cname, cls] : classes) pkg.classes.push_back(std::move(cls));
    out.push_back(std::move(pkg));
  }
  return out;
}

std::size_t count_functions(const std::vector<PackageUnit>& packages) {
  std::size_t n = 0;
  for (const auto& p : packages) {
    for (const auto& c : p.classes) n += c.functions.size();
  }
  return n;
}

}  // namespace dexlens
