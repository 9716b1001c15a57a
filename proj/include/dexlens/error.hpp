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

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dexlens {

/// Typed failure categories. Every error surfaced by the library maps to one.
enum class Errc {
  // apk_container
  NotAZip,
  NoDexFound,
  IoFailure,
  IndexOutOfRange,
  CorruptEntry,
  // dex_parser
  Truncated,
  Overlong,
  BadMagic,
  MalformedOffset,
  // disassembler
  ClassNotFound,
  // prompt_engine
  BudgetExceeded,
  PreconditionViolated,
  TemplateError,
  // llm_backend
  BackendUnavailable,
  AuthFailure,
  ResponseMalformed,
  Transient,
  CacheIoFailure,
  // verdict_trace
  TagNotFound,
  // evaluator
  EmptyCorpus,
  LengthMismatch,
  ManifestParse,
  // cli_report
  SchemaMismatch,
  ConfigError,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

using Warnings = std::vector<std::string>;

}  // namespace dexlens
