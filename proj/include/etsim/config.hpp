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


// Run configuration: a JSON document with nested blocks and unit-suffixed
// keys. Every key is checked; unknown keys are reported with their full path.

#ifndef ETSIM_CONFIG_HPP_
#define ETSIM_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "etsim/experiments.hpp"
#include "etsim/gates.hpp"
#include "etsim/model.hpp"
#include "etsim/tomography.hpp"

namespace etsim::config {

using gates::GateKind;

struct PassSweepConfig {
  double delta_d = 0.0;       // rad/s
  std::vector<double> rabi;   // rad/s
  int n_trc = model::kDefaultTruncation;
};

struct EtVerifyConfig {
  std::vector<GateKind> gates;
  std::vector<double> jump_times;  // s
  double track_duration = 90e-6;
  double ramsey_duration = 100e-6;
};

struct WignerConfig {
  std::vector<GateKind> gates;
  std::vector<double> times;
  tomography::WignerGrid grid;
};

struct GateFidelityConfig {
  std::vector<GateKind> gates;
  std::vector<double> t_gates;
  experiments::AqecMode mode = experiments::AqecMode::kIdeal;
  double aqec_duration = 1.5e-6;
  std::optional<std::filesystem::path> pulse_csv;
};

struct RepetitiveRun {
  GateKind gate = GateKind::kKerr;
  double interval = 0.0;
  int cycles = 0;
};

struct RepetitiveConfig {
  std::vector<RepetitiveRun> runs;
  bool no_aqec = true;  // also run every gate without recovery
  experiments::AqecMode mode = experiments::AqecMode::kImperfect;
  double aqec_duration = 1.5e-6;
};

struct DephasingConfig {
  int trajectories = 0;  // 0 skips the check
  model::DriveSpec drive;
  std::vector<int> fock;
};

struct ExcitationConfig {
  double delta_d = 0.0;
  std::vector<double> rabi;
  std::vector<int> fock;
  double duration = 20e-6;
  int samples = 400;
  DephasingConfig dephasing;
};

struct AqecPulseConfig {
  int cavity_dim = 8;  // defaults to device.cavity_dim
  double duration = 1.5e-6;
  int segments = 75;
  double amplitude_bound = kTwoPi * 3e6;
  int max_iter = 2000;
  double target_infidelity = 1e-4;
  double elapsed = 0.0;  // no-jump time the recovery compensates
};

struct Config {
  model::DeviceParams device;
  int cavity_dim = 8;
  experiments::NoiseModel noise;
  std::map<GateKind, std::vector<model::DriveSpec>> drives;  // nominal couplings
  bool calibrate = true;
  gates::Switching switching = gates::Switching::kAdiabatic;
  double dt = 5e-10;

  PassSweepConfig pass_sweep;
  EtVerifyConfig et_verify;
  WignerConfig wigner;
  GateFidelityConfig gate_fidelity;
  RepetitiveConfig repetitive;
  ExcitationConfig excitation;
  AqecPulseConfig aqec_pulse;

  std::string canonical;  // normalized JSON text of the input
  std::uint64_t hash = 0;   // FNV-1a of `canonical`

  qcore::HilbertSpace space() const { return {cavity_dim}; }
  gates::GateModel gate(GateKind kind) const;
};

// Throws ConfigError for malformed, missing or unknown keys and PhysicsError
// for inconsistent physics (non-positive rates, resonant drives).
Config parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});

// Relative paths inside the file resolve against its directory. Throws
// IoError when the file cannot be read.
Config load_config(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace etsim::config

#endif  // ETSIM_CONFIG_HPP_
