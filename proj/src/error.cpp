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

#include "dexlens/error.hpp"

namespace dexlens {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::NotAZip: return "NotAZip";
    case Errc::NoDexFound: return "NoDexFound";
    case Errc::IoFailure: return "IoFailure";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::CorruptEntry: return "CorruptEntry";
    case Errc::Truncated: return "Truncated";
    case Errc::Overlong: return "Overlong";
    case Errc::BadMagic: return "BadMagic";
    case Errc::MalformedOffset: return "MalformedOffset";
    case Errc::ClassNotFound: return "ClassNotFound";
    case Errc::BudgetExceeded: return "BudgetExceeded";
    case Errc::PreconditionViolated: return "PreconditionViolated";
    case Errc::TemplateError: return "TemplateError";
    case Errc::BackendUnavailable: return "BackendUnavailable";
    case Errc::AuthFailure: return "AuthFailure";
    case Errc::ResponseMalformed: return "ResponseMalformed";
    case Errc::Transient: return "Transient";
    case Errc::CacheIoFailure: return "CacheIoFailure";
    case Errc::TagNotFound: return "TagNotFound";
    case Errc::EmptyCorpus: return "EmptyCorpus";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::ManifestParse: return "ManifestParse";
    case Errc::SchemaMismatch: return "SchemaMismatch";
    case Errc::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace dexlens
