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

#ifndef ETSIM_LOG_HPP_
#define ETSIM_LOG_HPP_

#include <functional>
#include <string>
#include <string_view>

namespace etsim {

enum class LogLevel { kInfo, kWarning };

using LogSink = std::function<void(LogLevel, std::string_view)>;

// Replaces the process-wide sink (default: std::clog) and forgets which
// one-time warnings were already shown. Pass nullptr to restore the default.
// Not meant to be swapped while workers are running.
void set_log_sink(LogSink sink);

void log_info(std::string_view message);
void log_warning(std::string_view message);

// Emits a given message at most once per sink.
void log_warning_once(std::string_view message);

}  // namespace etsim

#endif  // ETSIM_LOG_HPP_
