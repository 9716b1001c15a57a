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

#include "dexlens/dex.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <limits>

namespace dexlens {

namespace {

constexpr std::size_t kHeaderSize = 0x70;
constexpr std::uint32_t kNoIndex = 0xFFFFFFFF;
constexpr std::uint32_t kEndianConstant = 0x12345678;

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}

  std::size_t size() const { return b_.size(); }
  std::span<const std::uint8_t> bytes() const { return b_; }

  void require(std::uint64_t at, std::uint64_t len, Errc code, const char* what) const {
    if (at > b_.size() || len > b_.size() - at) {
      fail(code, std::string(what) + " at 0x" + hex(at) + " (+" + std::to_string(len) + ") outside buffer of " +
                     std::to_string(b_.size()) + " bytes");
    }
  }

  std::uint16_t u16(std::size_t at) const {
    require(at, 2, Errc::Truncated, "u16");
    return static_cast<std::uint16_t>(b_[at] | (b_[at + 1] << 8));
  }

  std::uint32_t u32(std::size_t at) const {
    require(at, 4, Errc::Truncated, "u32");
    return static_cast<std::uint32_t>(b_[at]) | (static_cast<std::uint32_t>(b_[at + 1]) << 8) |
           (static_cast<std::uint32_t>(b_[at + 2]) << 16) | (static_cast<std::uint32_t>(b_[at + 3]) << 24);
  }

  std::uint32_t uleb(std::size_t& at) const {
    Uleb128 r = decode_uleb128(b_, at);
    at = r.next_offset;
    return static_cast<std::uint32_t>(r.value);
  }

  static std::string hex(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    do {
      s.insert(s.begin(), digits[v & 0xF]);
      v >>= 4;
    } while (v);
    return s;
  }

 private:
  std::span<const std::uint8_t> b_;
};

void check_index(std::uint64_t idx, std::size_t table_size, const char* what) {
  if (idx >= table_size) {
    fail(Errc::MalformedOffset, std::string("dangling ") + what + " index " + std::to_string(idx) + " (table size " +
                                    std::to_string(table_size) + ")");
  }
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

struct Table {
  std::uint32_t size = 0;
  std::uint32_t off = 0;
};

Table table(const Reader& r, std::size_t at, std::size_t stride, const char* what) {
  Table t{r.u32(at), r.u32(at + 4)};
  if (t.size == 0) return t;
  r.require(t.off, static_cast<std::uint64_t>(t.size) * stride, Errc::MalformedOffset, what);
  return t;
}

std::vector<std::uint32_t> read_type_list(const Reader& r, std::uint32_t off, std::size_t type_count) {
  std::vector<std::uint32_t> out;
  if (off == 0) return out;
  r.require(off, 4, Errc::MalformedOffset, "type_list");
  std::uint32_t n = r.u32(off);
  r.require(off + 4ull, static_cast<std::uint64_t>(n) * 2, Errc::MalformedOffset, "type_list");
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    std::uint16_t idx = r.u16(off + 4 + 2 * i);
    check_index(idx, type_count, "type_list type");
    out.push_back(idx);
  }
  return out;
}

CodeItem read_code_item(const Reader& r, std::uint32_t off) {
  r.require(off, 16, Errc::MalformedOffset, "code_item");
  CodeItem c;
  c.registers_size = r.u16(off);
  c.ins_size = r.u16(off + 2);
  c.outs_size = r.u16(off + 4);
  c.tries_size = r.u16(off + 6);
  std::uint32_t insns_size = r.u32(off + 12);
  r.require(off + 16ull, static_cast<std::uint64_t>(insns_size) * 2, Errc::MalformedOffset, "code_item insns");
  c.insns.resize(insns_size);
  auto bytes = r.bytes();
  for (std::uint32_t i = 0; i < insns_size; ++i) {
    std::size_t at = off + 16 + 2 * static_cast<std::size_t>(i);
    c.insns[i] = static_cast<std::uint16_t>(bytes[at] | (bytes[at + 1] << 8));
  }
  // Try items and handlers follow; they are not modeled.
  return c;
}

void read_class_data(const Reader& r, std::uint32_t off, const DexFile& dex, ClassDef& cls, Warnings& warnings) {
  if (off == 0) return;
  r.require(off, 1, Errc::MalformedOffset, "class_data");
  std::size_t at = off;
  std::uint32_t static_fields = r.uleb(at);
  std::uint32_t instance_fields = r.uleb(at);
  std::uint32_t direct_methods = r.uleb(at);
  std::uint32_t virtual_methods = r.uleb(at);

  auto read_fields = [&](std::uint32_t n, bool is_static) {
    std::uint64_t idx = 0;
    for (std::uint32_t i = 0; i < n; ++i) {
      idx += r.uleb(at);
      std::uint32_t flags = r.uleb(at);
      check_index(idx, dex.fields.size(), "class_data field");
      cls.fields.push_back(EncodedField{static_cast<std::uint32_t>(idx), flags, is_static});
    }
  };
  auto read_methods = [&](std::uint32_t n, bool direct) {
    std::uint64_t idx = 0;
    for (std::uint32_t i = 0; i < n; ++i) {
      idx += r.uleb(at);
      std::uint32_t flags = r.uleb(at);
      std::uint32_t code_off = r.uleb(at);
      check_index(idx, dex.methods.size(), "class_data method");
      EncodedMethod m{static_cast<std::uint32_t>(idx), flags, direct, std::nullopt};
      if (code_off != 0) {
        m.code = read_code_item(r, code_off);
      } else if (!(flags & (access::kAbstract | access::kNative))) {
        warnings.push_back("method " + std::to_string(idx) + " has no code but is neither abstract nor native");
      }
      cls.methods.push_back(std::move(m));
    }
  };
  read_fields(static_fields, true);
  read_fields(instance_fields, false);
  read_methods(direct_methods, true);
  read_methods(virtual_methods, false);
}

bool known_version(std::span<const std::uint8_t> b, std::string& version) {
  static constexpr std::array<std::uint8_t, 4> kPrefix = {'d', 'e', 'x', '\n'};
  for (std::size_t i = 0; i < kPrefix.size(); ++i) {
    if (b[i] != kPrefix[i]) return false;
  }
  if (b[7] != 0) return false;
  for (std::size_t i = 4; i < 7; ++i) {
    if (b[i] < '0' || b[i] > '9') return false;
  }
  version.assign(reinterpret_cast<const char*>(b.data() + 4), 3);
  int v = std::stoi(version);
  return v >= 35 && v <= 41;
}

const std::string kPrimitiveNames[][2] = {
    {"V", "void"}, {"Z", "boolean"}, {"B", "byte"}, {"S", "short"}, {"C", "char"},
    {"I", "int"},  {"J", "long"},    {"F", "float"}, {"D", "double"},
};

}  // namespace

Uleb128 decode_uleb128(std::span<const std::uint8_t> buffer, std::size_t offset) {
  std::uint64_t value = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    if (offset + i >= buffer.size()) fail(Errc::Truncated, "buffer ends inside a ULEB128 value");
    std::uint8_t byte = buffer[offset + i];
    value |= static_cast<std::uint64_t>(byte & 0x7F) << (7 * i);
    if (!(byte & 0x80)) return Uleb128{value, offset + i + 1};
  }
  fail(Errc::Overlong, "ULEB128 value does not terminate within 5 bytes");
}

std::string decode_mutf8(std::span<const std::uint8_t> bytes, bool& replaced) {
  constexpr std::uint32_t kReplacement = 0xFFFD;
  std::string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  auto cont = [&](std::size_t at) { return at < bytes.size() && (bytes[at] & 0xC0) == 0x80; };
  auto read_unit = [&](std::size_t at, std::uint32_t& unit) -> std::size_t {
    std::uint8_t b0 = bytes[at];
    if (b0 < 0x80 && b0 != 0) {
      unit = b0;
      return 1;
    }
    if ((b0 & 0xE0) == 0xC0 && cont(at + 1)) {
      unit = ((b0 & 0x1Fu) << 6) | (bytes[at + 1] & 0x3Fu);
      return 2;
    }
    if ((b0 & 0xF0) == 0xE0 && cont(at + 1) && cont(at + 2)) {
      unit = ((b0 & 0x0Fu) << 12) | ((bytes[at + 1] & 0x3Fu) << 6) | (bytes[at + 2] & 0x3Fu);
      return 3;
    }
    return 0;
  };
  while (i < bytes.size()) {
    std::uint32_t unit = 0;
    std::size_t n = read_unit(i, unit);
    if (n == 0) {
      append_utf8(out, kReplacement);
      replaced = true;
      ++i;
      continue;
    }
    i += n;
    if (unit >= 0xD800 && unit <= 0xDBFF) {
      std::uint32_t low = 0;
      std::size_t m = i < bytes.size() ? read_unit(i, low) : 0;
      if (m != 0 && low >= 0xDC00 && low <= 0xDFFF) {
        append_utf8(out, 0x10000 + ((unit - 0xD800) << 10) + (low - 0xDC00));
        i += m;
      } else {
        append_utf8(out, kReplacement);
        replaced = true;
      }
    } else if (unit >= 0xDC00 && unit <= 0xDFFF) {
      append_utf8(out, kReplacement);
      replaced = true;
    } else {
      append_utf8(out, unit);
    }
  }
  return out;
}

DexFile parse_dex(std::span<const std::uint8_t> buffer) {
  if (buffer.size() < 8) fail(Errc::BadMagic, "buffer shorter than the DEX magic");
  DexFile dex;
  if (!known_version(buffer, dex.version)) fail(Errc::BadMagic, "not a supported DEX magic/version");
  if (buffer.size() < kHeaderSize) fail(Errc::Truncated, "buffer shorter than the DEX header");

  Reader r(buffer);
  std::uint32_t file_size = r.u32(32);
  if (file_size > buffer.size()) {
    fail(Errc::Truncated, "header file_size " + std::to_string(file_size) + " exceeds buffer of " +
                              std::to_string(buffer.size()) + " bytes");
  }
  if (file_size < buffer.size()) dex.warnings.push_back("trailing bytes after declared file_size");
  if (r.u32(40) != kEndianConstant) fail(Errc::BadMagic, "unsupported endian tag");

  std::size_t checked = std::max<std::size_t>(file_size, 12);
  uLong adler = adler32(0L, Z_NULL, 0);
  adler = adler32_z(adler, buffer.data() + 12, checked - 12);
  dex.header_checksum_ok = static_cast<std::uint32_t>(adler) == r.u32(8);
  if (!dex.header_checksum_ok) dex.warnings.push_back("header checksum mismatch");

  std::uint32_t map_off = r.u32(52);
  if (map_off != 0) {
    r.require(map_off, 4, Errc::MalformedOffset, "map_list");
    std::uint32_t n = r.u32(map_off);
    r.require(map_off + 4ull, static_cast<std::uint64_t>(n) * 12, Errc::MalformedOffset, "map_list");
    for (std::uint32_t i = 0; i < n; ++i) {
      std::uint32_t off = r.u32(map_off + 4 + 12 * i + 8);
      r.require(off, 0, Errc::MalformedOffset, "map item");
    }
  }

  Table strings = table(r, 56, 4, "string_ids");
  Table types = table(r, 64, 4, "type_ids");
  Table protos = table(r, 72, 12, "proto_ids");
  Table fields = table(r, 80, 8, "field_ids");
  Table methods = table(r, 88, 8, "method_ids");
  Table classes = table(r, 96, 32, "class_defs");

  dex.strings.reserve(strings.size);
  for (std::uint32_t i = 0; i < strings.size; ++i) {
    std::uint32_t data_off = r.u32(strings.off + 4 * i);
    r.require(data_off, 1, Errc::MalformedOffset, "string_data");
    std::size_t at = data_off;
    r.uleb(at);  // utf16 length, not needed
    std::size_t end = at;
    while (end < buffer.size() && buffer[end] != 0) ++end;
    if (end >= buffer.size()) fail(Errc::Truncated, "unterminated string_data " + std::to_string(i));
    bool replaced = false;
    dex.strings.push_back(decode_mutf8(buffer.subspan(at, end - at), replaced));
    if (replaced) dex.warnings.push_back("string " + std::to_string(i) + ": invalid MUTF-8 replaced by U+FFFD");
  }

  dex.type_ids.reserve(types.size);
  for (std::uint32_t i = 0; i < types.size; ++i) {
    std::uint32_t idx = r.u32(types.off + 4 * i);
    check_index(idx, dex.strings.size(), "type descriptor string");
    dex.type_ids.push_back(idx);
  }

  dex.protos.reserve(protos.size);
  for (std::uint32_t i = 0; i < protos.size; ++i) {
    std::size_t at = protos.off + 12 * static_cast<std::size_t>(i);
    ProtoId p;
    p.shorty_idx = r.u32(at);
    p.return_type_idx = r.u32(at + 4);
    check_index(p.shorty_idx, dex.strings.size(), "proto shorty");
    check_index(p.return_type_idx, dex.type_ids.size(), "proto return type");
    p.parameters = read_type_list(r, r.u32(at + 8), dex.type_ids.size());
    dex.protos.push_back(std::move(p));
  }

  dex.fields.reserve(fields.size);
  for (std::uint32_t i = 0; i < fields.size; ++i) {
    std::size_t at = fields.off + 8 * static_cast<std::size_t>(i);
    FieldId f{r.u16(at), r.u16(at + 2), r.u32(at + 4)};
    check_index(f.class_idx, dex.type_ids.size(), "field class");
    check_index(f.type_idx, dex.type_ids.size(), "field type");
    check_index(f.name_idx, dex.strings.size(), "field name");
    dex.fields.push_back(f);
  }

  dex.methods.reserve(methods.size);
  for (std::uint32_t i = 0; i < methods.size; ++i) {
    std::size_t at = methods.off + 8 * static_cast<std::size_t>(i);
    MethodId m{r.u16(at), r.u16(at + 2), r.u32(at + 4)};
    check_index(m.class_idx, dex.type_ids.size(), "method class");
    check_index(m.proto_idx, dex.protos.size(), "method proto");
    check_index(m.name_idx, dex.strings.size(), "method name");
    dex.methods.push_back(m);
  }

  dex.class_defs.reserve(classes.size);
  for (std::uint32_t i = 0; i < classes.size; ++i) {
    std::size_t at = classes.off + 32 * static_cast<std::size_t>(i);
    ClassDef c;
    c.type_idx = r.u32(at);
    check_index(c.type_idx, dex.type_ids.size(), "class_def type");
    c.access_flags = r.u32(at + 4);
    std::uint32_t super = r.u32(at + 8);
    if (super != kNoIndex) {
      check_index(super, dex.type_ids.size(), "superclass");
      c.superclass_idx = super;
    }
    c.interfaces = read_type_list(r, r.u32(at + 12), dex.type_ids.size());
    read_class_data(r, r.u32(at + 24), dex, c, dex.warnings);
    dex.class_defs.push_back(std::move(c));
  }
  return dex;
}

const std::string& resolve_string(const DexFile& dex, std::size_t string_idx) {
  if (string_idx >= dex.strings.size()) {
    fail(Errc::IndexOutOfRange, "string index " + std::to_string(string_idx));
  }
  return dex.strings[string_idx];
}

const std::string& resolve_type(const DexFile& dex, std::size_t type_idx) {
  if (type_idx >= dex.type_ids.size()) fail(Errc::IndexOutOfRange, "type index " + std::to_string(type_idx));
  return dex.strings[dex.type_ids[type_idx]];
}

std::string resolve_proto(const DexFile& dex, std::size_t proto_idx) {
  if (proto_idx >= dex.protos.size()) fail(Errc::IndexOutOfRange, "proto index " + std::to_string(proto_idx));
  const ProtoId& p = dex.protos[proto_idx];
  std::string out = "(";
  for (auto t : p.parameters) out += resolve_type(dex, t);
  out += ")";
  out += resolve_type(dex, p.return_type_idx);
  return out;
}

MethodRef resolve_method(const DexFile& dex, std::size_t method_idx) {
  if (method_idx >= dex.methods.size()) fail(Errc::IndexOutOfRange, "method index " + std::to_string(method_idx));
  const MethodId& m = dex.methods[method_idx];
  return MethodRef{resolve_type(dex, m.class_idx), resolve_string(dex, m.name_idx), resolve_proto(dex, m.proto_idx)};
}

FieldRef resolve_field(const DexFile& dex, std::size_t field_idx) {
  if (field_idx >= dex.fields.size()) fail(Errc::IndexOutOfRange, "field index " + std::to_string(field_idx));
  const FieldId& f = dex.fields[field_idx];
  return FieldRef{resolve_type(dex, f.class_idx), resolve_string(dex, f.name_idx), resolve_type(dex, f.type_idx)};
}

std::string MethodRef::rendering() const { return descriptor_to_dotted(class_descriptor) + "." + name + proto; }

std::string FieldRef::rendering() const {
  return descriptor_to_dotted(class_descriptor) + "." + name + ":" + type_descriptor;
}

std::string descriptor_to_dotted(std::string_view descriptor) {
  std::size_t dims = 0;
  while (dims < descriptor.size() && descriptor[dims] == '[') ++dims;
  std::string_view base = descriptor.substr(dims);
  std::string out;
  if (base.size() >= 2 && base.front() == 'L' && base.back() == ';') {
    out.assign(base.substr(1, base.size() - 2));
    for (char& c : out) {
      if (c == '/') c = '.';
    }
  } else {
    out.assign(base);
    for (const auto& [code, name] : kPrimitiveNames) {
      if (base == code) {
        out = name;
        break;
      }
    }
  }
  for (std::size_t i = 0; i < dims; ++i) out += "[]";
  return out;
}

}  // namespace dexlens
