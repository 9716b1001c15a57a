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

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "dexlens/node.hpp"

namespace dexlens {

enum class FinishReason { Stop, Length, Error };

std::string_view finish_reason_name(FinishReason r);

struct ChatRequest {
  std::string model_id;
  std::string system_text;
  std::string user_text;
  double temperature = 0.0;
  std::size_t max_output_tokens = 1024;
};

struct ModelResponse {
  std::string text;
  FinishReason finish_reason = FinishReason::Stop;
  bool from_cache = false;
  double latency_ms = 0.0;
};

class Backend {
 public:
  virtual ~Backend() = default;
  /// Must be safe to call from several threads at once.
  virtual ModelResponse complete(const ChatRequest& request) = 0;
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base{1000};
  std::chrono::milliseconds cap{30000};

  /// Delay before retry number `retry` (0-based): base * 2^retry, capped.
  std::chrono::milliseconds delay(int retry) const;
};

using SleepFn = std::function<void(std::chrono::milliseconds)>;

struct HttpBackendConfig {
  std::string endpoint_url;  // e.g. https://api.example.com/v1/chat/completions
  std::string api_key;
  std::chrono::seconds timeout{120};
  RetryPolicy retry;
  SleepFn sleep;  // defaults to std::this_thread::sleep_for
};

/// Chat-completions client over HTTP(S).
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config);

  ModelResponse complete(const ChatRequest& request) override;

  std::size_t attempts() const { return attempts_.load(); }

  /// JSON request body for `request`.
  static std::string request_body(const ChatRequest& request);
  /// Extracts choices[0].message.content; throws ResponseMalformed.
  static ModelResponse parse_response(std::string_view body);

 private:
  HttpBackendConfig config_;
  std::string scheme_host_port_;
  std::string path_;
  std::atomic<std::size_t> attempts_{0};
};

/// Keyword-rule stand-in for a model. Deterministic, offline.
class MockBackend : public Backend {
 public:
  ModelResponse complete(const ChatRequest& request) override;

  std::size_t invocations() const { return invocations_.load(); }

  /// Tags fired by the keyword rules, in emission order.
  static std::vector<std::string> rule_tags(std::string_view text);

 private:
  std::atomic<std::size_t> invocations_{0};
};

/// Content-addressed key over (model, scope, template version, system, user, temperature).
std::string cache_key(const ChatRequest& request, std::string_view template_version, Scope scope);

/// Directory of response files named by cache key.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  /// Missing, unreadable or corrupt entries are misses.
  std::optional<std::string> get(const std::string& key) const;
  /// Atomic write; failures are logged and swallowed.
  bool put(const std::string& key, const ChatRequest& request, std::string_view template_version, Scope scope,
           std::string_view response) const;

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path path_for(const std::string& key) const;

  /// Prompt text (system + user) of every readable entry.
  std::vector<std::string> stored_prompts() const;

 private:
  std::filesystem::path dir_;
};

struct CompletionStats {
  std::size_t requests = 0;
  std::size_t cache_hits = 0;
  std::size_t backend_calls = 0;
  std::size_t max_in_flight = 0;
};

/// Cache-first completion with a bound on concurrent backend calls.
class Completer {
 public:
  Completer(Backend& backend, std::shared_ptr<ResponseCache> cache, std::size_t max_in_flight = 4);

  ModelResponse complete(const ChatRequest& request, std::string_view template_version, Scope scope,
                         std::string* key_out = nullptr);

  CompletionStats stats() const;

 private:
  Backend& backend_;
  std::shared_ptr<ResponseCache> cache_;
  std::counting_semaphore<1024> slots_;
  std::atomic<std::size_t> requests_{0};
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> calls_{0};
  std::atomic<std::size_t> in_flight_{0};
  std::atomic<std::size_t> max_in_flight_{0};
};

}  // namespace dexlens
