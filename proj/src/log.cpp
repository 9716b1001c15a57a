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

#include "dexlens/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace dexlens::log {

namespace {

std::atomic<Level> g_level{Level::Warning};
std::mutex g_mutex;

const char* prefix(Level level) {
  switch (level) {
    case Level::Debug: return "debug";
    case Level::Info: return "info";
    case Level::Warning: return "warning";
    case Level::Error: return "error";
    case Level::Off: break;
  }
  return "";
}

}  // namespace

void set_level(Level level) { g_level = level; }

Level level() { return g_level; }

void write(Level level, std::string_view message) {
  if (level < g_level.load() || level == Level::Off) return;
  std::lock_guard lock(g_mutex);
  std::cerr << "dexlens: " << prefix(level) << ": " << message << '\n';
}

}  // namespace dexlens::log
