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

#include "httplib.h"

#include "dexlens/llm.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iterator>
#include <sstream>
#include <thread>

#include "dexlens/hash.hpp"
#include "dexlens/log.hpp"
#include "json.hpp"

namespace dexlens {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::string_view kDefaultPath = "/v1/chat/completions";
constexpr std::string_view kCacheMagic = "dexlens-cache 1";

bool retryable_status(int status) { return status == 429 || (status >= 500 && status <= 599); }

std::string format_temperature(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", t);
  return buf;
}

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string_view finish_reason_name(FinishReason r) {
  switch (r) {
    case FinishReason::Stop: return "STOP";
    case FinishReason::Length: return "LENGTH";
    case FinishReason::Error: return "ERROR";
  }
  return "ERROR";
}

std::chrono::milliseconds RetryPolicy::delay(int retry) const {
  auto d = base;
  for (int i = 0; i < retry && d < cap; ++i) d *= 2;
  return std::min(d, cap);
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  if (config_.endpoint_url.empty()) fail(Errc::ConfigError, "HTTP backend needs an endpoint URL");
  if (config_.api_key.empty()) fail(Errc::ConfigError, "HTTP backend needs a credential");
  const std::string& url = config_.endpoint_url;
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) fail(Errc::ConfigError, "endpoint URL needs a scheme: " + url);
  std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") fail(Errc::ConfigError, "unsupported endpoint scheme: " + scheme);
  auto path_at = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_at);
  path_ = path_at == std::string::npos ? std::string(kDefaultPath) : url.substr(path_at);
  if (!config_.sleep) config_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::string HttpBackend::request_body(const ChatRequest& request) {
  nlohmann::json body = {
      {"model", request.model_id},
      {"messages",
       nlohmann::json::array({{{"role", "system"}, {"content", request.system_text}},
                              {{"role", "user"}, {"content", request.user_text}}})},
      {"temperature", request.temperature},
      {"max_tokens", request.max_output_tokens},
  };
  return body.dump();
}

ModelResponse HttpBackend::parse_response(std::string_view body) {
  nlohmann::json doc = nlohmann::json::parse(body, nullptr, false);
  if (doc.is_discarded()) fail(Errc::ResponseMalformed, "response is not JSON");
  if (!doc.is_object() || !doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
    fail(Errc::ResponseMalformed, "response has no choices array");
  }
  const auto& choice = doc["choices"][0];
  if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object() ||
      !choice["message"].contains("content") || !choice["message"]["content"].is_string()) {
    fail(Errc::ResponseMalformed, "choices[0].message.content missing");
  }
  ModelResponse r;
  r.text = choice["message"]["content"].get<std::string>();
  std::string reason = choice.contains("finish_reason") && choice["finish_reason"].is_string()
                           ? choice["finish_reason"].get<std::string>()
                           : "stop";
  r.finish_reason = reason == "stop" ? FinishReason::Stop : reason == "length" ? FinishReason::Length
                                                                               : FinishReason::Error;
  return r;
}

ModelResponse HttpBackend::complete(const ChatRequest& request) {
  if (request.user_text.empty()) fail(Errc::PreconditionViolated, "empty user text");
  httplib::Client client(scheme_host_port_);
  auto secs = static_cast<time_t>(config_.timeout.count());
  client.set_connection_timeout(secs, 0);
  client.set_read_timeout(secs, 0);
  client.set_write_timeout(secs, 0);
  httplib::Headers headers = {{"Authorization", "Bearer " + config_.api_key}};
  std::string body = request_body(request);

  std::string last_error;
  for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
    ++attempts_;
    auto start = Clock::now();
    auto res = client.Post(path_, headers, body, "application/json");
    double latency = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    if (res) {
      int status = res->status;
      if (status == 200) {
        ModelResponse r = parse_response(res->body);
        r.latency_ms = latency;
        return r;
      }
      if (status == 401 || status == 403) fail(Errc::AuthFailure, "endpoint rejected the credential (HTTP " +
                                                                       std::to_string(status) + ")");
      if (!retryable_status(status)) {
        fail(Errc::ResponseMalformed, "unexpected HTTP status " + std::to_string(status));
      }
      last_error = "HTTP " + std::to_string(status);
    } else {
      last_error = httplib::to_string(res.error());
    }
    if (attempt < config_.retry.max_attempts) {
      auto d = config_.retry.delay(attempt - 1);
      log::info("backend attempt " + std::to_string(attempt) + " failed (" + last_error + "), retrying in " +
                std::to_string(d.count()) + " ms");
      config_.sleep(d);
    }
  }
  fail(Errc::BackendUnavailable, "giving up after " + std::to_string(config_.retry.max_attempts) +
                                     " attempts: " + last_error);
}

std::string cache_key(const ChatRequest& request, std::string_view template_version, Scope scope) {
  Sha256 h;
  h.update_field("dexlens.cache/1");
  h.update_field(request.model_id);
  h.update_field(scope_name(scope));
  h.update_field(template_version);
  h.update_field(request.system_text);
  h.update_field(request.user_text);
  h.update_field(format_temperature(request.temperature));
  return h.hex_digest();
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) log::warning("cannot create cache directory " + dir_.string() + ": " + ec.message());
}

std::filesystem::path ResponseCache::path_for(const std::string& key) const { return dir_ / (key + ".txt"); }

namespace {

struct CacheEntry {
  std::string key;
  std::string system;
  std::string user;
  std::string response;
};

// Layout: magic line, "name: value" header lines, blank line, then the three bodies,
// each preceded by a "=== <name> <bytes>" line and followed by a newline.
std::optional<CacheEntry> parse_entry(const std::string& data) {
  std::istringstream in(data);
  std::string line;
  if (!std::getline(in, line) || line != kCacheMagic) return std::nullopt;
  CacheEntry e;
  std::string digest;
  while (std::getline(in, line) && !line.empty()) {
    auto colon = line.find(": ");
    if (colon == std::string::npos) return std::nullopt;
    std::string name = line.substr(0, colon), value = line.substr(colon + 2);
    if (name == "key") e.key = value;
    if (name == "response-sha256") digest = value;
  }
  std::size_t at = static_cast<std::size_t>(in.tellg());
  if (in.fail()) return std::nullopt;
  auto body = [&](const char* name, std::string& out) {
    std::string head = std::string("=== ") + name + " ";
    if (data.compare(at, head.size(), head) != 0) return false;
    std::size_t nl = data.find('\n', at);
    if (nl == std::string::npos) return false;
    std::size_t len = 0;
    try {
      len = std::stoul(data.substr(at + head.size(), nl - at - head.size()));
    } catch (const std::exception&) {
      return false;
    }
    if (nl + 1 + len + 1 > data.size() || data[nl + 1 + len] != '\n') return false;
    out = data.substr(nl + 1, len);
    at = nl + 1 + len + 1;
    return true;
  };
  if (!body("system", e.system) || !body("user", e.user) || !body("response", e.response)) return std::nullopt;
  if (at != data.size() || sha256_hex(e.response) != digest) return std::nullopt;
  return e;
}

std::optional<CacheEntry> read_entry(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_entry(data);
}

}  // namespace

std::optional<std::string> ResponseCache::get(const std::string& key) const {
  auto path = path_for(key);
  if (!std::filesystem::exists(path)) return std::nullopt;
  auto entry = read_entry(path);
  if (!entry || entry->key != key) {
    log::warning("cache entry " + key + " is corrupt; treating as a miss");
    return std::nullopt;
  }
  return entry->response;
}

bool ResponseCache::put(const std::string& key, const ChatRequest& request, std::string_view template_version,
                        Scope scope, std::string_view response) const {
  std::ostringstream out;
  out << kCacheMagic << "\n"
      << "key: " << key << "\n"
      << "created: " << utc_timestamp() << "\n"
      << "model: " << request.model_id << "\n"
      << "scope: " << scope_name(scope) << "\n"
      << "template-version: " << template_version << "\n"
      << "temperature: " << format_temperature(request.temperature) << "\n"
      << "response-sha256: " << sha256_hex(response) << "\n"
      << "\n"
      << "=== system " << request.system_text.size() << "\n" << request.system_text << "\n"
      << "=== user " << request.user_text.size() << "\n" << request.user_text << "\n"
      << "=== response " << response.size() << "\n" << response << "\n";
  std::string data = out.str();

  static std::atomic<unsigned> counter{0};
  auto final_path = path_for(key);
  auto tmp = dir_ / (key + ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++));
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    f.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!f) {
      log::warning("CacheIoFailure: cannot write " + tmp.string());
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      return false;
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, final_path, ec);
  if (ec) {
    log::warning("CacheIoFailure: cannot publish " + final_path.string() + ": " + ec.message());
    std::filesystem::remove(tmp, ec);
    return false;
  }
  return true;
}

std::vector<std::string> ResponseCache::stored_prompts() const {
  std::vector<std::string> out;
  std::error_code ec;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir_, ec)) {
    if (e.path().extension() == ".txt") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    if (auto entry = read_entry(f)) out.push_back(entry->system + "\n" + entry->user);
  }
  return out;
}

Completer::Completer(Backend& backend, std::shared_ptr<ResponseCache> cache, std::size_t max_in_flight)
    : backend_(backend),
      cache_(std::move(cache)),
      slots_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(max_in_flight, 1, 1024))) {}

ModelResponse Completer::complete(const ChatRequest& request, std::string_view template_version, Scope scope,
                                  std::string* key_out) {
  ++requests_;
  std::string key = cache_key(request, template_version, scope);
  if (key_out) *key_out = key;
  if (cache_) {
    if (auto hit = cache_->get(key)) {
      ++hits_;
      ModelResponse r;
      r.text = std::move(*hit);
      r.from_cache = true;
      return r;
    }
  }

  slots_.acquire();
  std::size_t now = ++in_flight_;
  std::size_t seen = max_in_flight_.load();
  while (now > seen && !max_in_flight_.compare_exchange_weak(seen, now)) {
  }
  ModelResponse r;
  try {
    ++calls_;
    auto start = Clock::now();
    r = backend_.complete(request);
    if (r.latency_ms == 0.0) r.latency_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  } catch (...) {
    --in_flight_;
    slots_.release();
    throw;
  }
  --in_flight_;
  slots_.release();

  if (cache_ && r.finish_reason == FinishReason::Stop) cache_->put(key, request, template_version, scope, r.text);
  return r;
}

CompletionStats Completer::stats() const {
  return CompletionStats{requests_.load(), hits_.load(), calls_.load(), max_in_flight_.load()};
}

}  // namespace dexlens
