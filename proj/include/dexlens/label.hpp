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

#include <optional>
#include <string_view>

namespace dexlens {

enum class Label { Benign, Malware, Unknown };

constexpr std::string_view label_name(Label label) {
  switch (label) {
    case Label::Benign: return "BENIGN";
    case Label::Malware: return "MALWARE";
    case Label::Unknown: break;
  }
  return "UNKNOWN";
}

/// Accepts BENIGN / MALWARE / UNKNOWN in any letter case.
std::optional<Label> parse_label(std::string_view text);

}  // namespace dexlens
