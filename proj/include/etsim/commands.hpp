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


// Scenario runners. Each writes its tables into an output directory together
// with manifest.json.

#ifndef ETSIM_COMMANDS_HPP_
#define ETSIM_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "etsim/config.hpp"

namespace etsim::commands {

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::uint64_t seed = 1;
  int threads = 1;
};

struct OutputFile {
  std::string file;
  std::vector<std::string> columns;  // empty for JSON files
};

struct RunManifest {
  std::string command;
  std::string version;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  int threads = 1;
  double wall_time = 0.0;  // s
  std::vector<OutputFile> outputs;
};

// pass-sweep, et-verify, wigner-evolution, gate-fidelity, repetitive,
// excitation-sweep, aqec-pulse.
std::span<const std::string_view> command_names();

// Throws InvalidArgument for an unknown command and IoError when the output
// directory cannot be written. Tables never contain wall-clock data, so
// reruns with the same seed are byte-identical.
RunManifest run_command(const config::Config& cfg, std::string_view command,
                        const RunOptions& options);

const char* version();

}  // namespace etsim::commands

#endif  // ETSIM_COMMANDS_HPP_
