// Copyright 2026 The etsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "etsim/log.hpp"

#include <iostream>
#include <mutex>
#include <set>
#include <string>
#include <utility>

namespace etsim {
namespace {

std::mutex g_log_mutex;

std::set<std::string, std::less<>>& seen() {
  static std::set<std::string, std::less<>> messages;
  return messages;
}

LogSink& sink_slot() {
  static LogSink sink;
  return sink;
}

void emit(LogLevel level, std::string_view message) {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  if (auto& sink = sink_slot()) {
    sink(level, message);
    return;
  }
  std::clog << (level == LogLevel::kWarning ? "etsim warning: " : "etsim: ")
            << message << '\n';
}

}  // namespace

void set_log_sink(LogSink sink) {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  sink_slot() = std::move(sink);
  seen().clear();
}

void log_info(std::string_view message) { emit(LogLevel::kInfo, message); }

void log_warning(std::string_view message) {
  emit(LogLevel::kWarning, message);
}

void log_warning_once(std::string_view message) {
  {
    std::lock_guard<std::mutex> lock(g_log_mutex);
    if (!seen().emplace(message).second) return;
  }
  emit(LogLevel::kWarning, message);
}

}  // namespace etsim
