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


// Command-line front end over the C API.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "etsim/etsim.h"

namespace {

struct Options {
  std::string config;
  std::string out;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: ETSIM_THREADS or 1
};

int default_threads() {
  const char* env = std::getenv("ETSIM_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1 || v > 1024) {
    std::cerr << "etsim: ignoring invalid ETSIM_THREADS='" << env << "'\n";
    return 1;
  }
  return static_cast<int>(v);
}

int run(const std::string& command, const Options& o) {
  etsim_config* cfg = nullptr;
  etsim_status s = etsim_config_load(o.config.c_str(), &cfg);
  if (s != ETSIM_OK) {
    std::cerr << "etsim: " << etsim_last_error() << '\n';
    return static_cast<int>(s);
  }
  const std::string out = o.out.empty() ? "out/" + command : o.out;
  const etsim_run_options ro{out.c_str(), o.seed, o.threads > 0 ? o.threads : default_threads()};
  double wall = 0.0;
  s = etsim_run(cfg, command.c_str(), &ro, &wall);
  etsim_config_free(cfg);
  if (s != ETSIM_OK) {
    std::cerr << "etsim " << command << ": " << etsim_last_error() << '\n';
    return static_cast<int>(s);
  }
  std::cout << command << ": wrote " << out << " in " << wall << " s\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Error-transparent bosonic gate simulator"};
  app.set_version_flag("--version", std::string(etsim_version()));
  app.require_subcommand(1);

  Options opts;
  std::vector<std::pair<std::string, CLI::App*>> subs;
  for (std::size_t i = 0; i < etsim_command_count(); ++i) {
    const std::string name = etsim_command_name(i);
    CLI::App* sub = app.add_subcommand(name, "Run the " + name + " scenario");
    sub->add_option("-c,--config", opts.config, "JSON configuration file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("-o,--out", opts.out, "Output directory (default out/<command>)");
    sub->add_option("-s,--seed", opts.seed, "Root seed for stochastic parts")
        ->capture_default_str();
    sub->add_option("-j,--threads", opts.threads,
                    "Worker threads (default ETSIM_THREADS or 1)")
        ->check(CLI::Range(1, 1024));
    subs.emplace_back(name, sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return ETSIM_ERROR_CONFIG;
  }

  for (const auto& [name, sub] : subs) {
    if (sub->parsed()) return run(name, opts);
  }
  return ETSIM_ERROR_INTERNAL;
}
