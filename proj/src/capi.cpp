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


#include "etsim/etsim.h"

#include <exception>
#include <new>
#include <string>
#include <vector>

#include "etsim/commands.hpp"
#include "etsim/config.hpp"
#include "etsim/errors.hpp"

struct etsim_config {
  etsim::config::Config value;
};

namespace {

thread_local std::string g_last_error;

etsim_status fail(etsim_status s, const char* message) {
  g_last_error = message;
  return s;
}

template <typename F>
etsim_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return ETSIM_OK;
  } catch (const etsim::ConfigError& e) {
    return fail(ETSIM_ERROR_CONFIG, e.what());
  } catch (const etsim::PhysicsError& e) {
    return fail(ETSIM_ERROR_PHYSICS, e.what());
  } catch (const etsim::ConvergenceError& e) {
    return fail(ETSIM_ERROR_CONVERGENCE, e.what());
  } catch (const etsim::IoError& e) {
    return fail(ETSIM_ERROR_IO, e.what());
  } catch (const etsim::InvalidArgument& e) {
    return fail(ETSIM_ERROR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(ETSIM_ERROR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(ETSIM_ERROR_INTERNAL, e.what());
  } catch (...) {
    return fail(ETSIM_ERROR_INTERNAL, "unknown error");
  }
}

etsim_status null_argument(const char* name) {
  g_last_error = std::string(name) + " must not be NULL";
  return ETSIM_ERROR_INVALID_ARGUMENT;
}

// Stable C strings for the command names.
const std::vector<std::string>& names() {
  static const std::vector<std::string> n = [] {
    std::vector<std::string> out;
    for (auto s : etsim::commands::command_names()) out.emplace_back(s);
    return out;
  }();
  return n;
}

}  // namespace

extern "C" {

const char* etsim_version(void) { return etsim::commands::version(); }

const char* etsim_last_error(void) { return g_last_error.c_str(); }

etsim_status etsim_config_load(const char* path, etsim_config** out) {
  if (path == nullptr) return null_argument("path");
  if (out == nullptr) return null_argument("out");
  *out = nullptr;
  return guarded([&] { *out = new etsim_config{etsim::config::load_config(path)}; });
}

etsim_status etsim_config_parse(const char* json_text, etsim_config** out) {
  if (json_text == nullptr) return null_argument("json_text");
  if (out == nullptr) return null_argument("out");
  *out = nullptr;
  return guarded([&] { *out = new etsim_config{etsim::config::parse_config(json_text)}; });
}

void etsim_config_free(etsim_config* config) { delete config; }

etsim_status etsim_config_hash(const etsim_config* config, uint64_t* out) {
  if (config == nullptr) return null_argument("config");
  if (out == nullptr) return null_argument("out");
  *out = config->value.hash;
  g_last_error.clear();
  return ETSIM_OK;
}

size_t etsim_command_count(void) { return names().size(); }

const char* etsim_command_name(size_t index) {
  return index < names().size() ? names()[index].c_str() : nullptr;
}

etsim_status etsim_run(const etsim_config* config, const char* command,
                       const etsim_run_options* options, double* wall_time_s) {
  if (config == nullptr) return null_argument("config");
  if (command == nullptr) return null_argument("command");
  if (options == nullptr) return null_argument("options");
  if (options->out_dir == nullptr) return null_argument("options->out_dir");
  return guarded([&] {
    etsim::commands::RunOptions o{options->out_dir, options->seed, options->threads};
    const auto m = etsim::commands::run_command(config->value, command, o);
    if (wall_time_s != nullptr) *wall_time_s = m.wall_time;
  });
}

}  // extern "C"
