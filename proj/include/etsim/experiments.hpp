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


// Scenario drivers. Each function runs one numerical experiment and returns
// plain result rows; file formats live in the command-line layer.

#ifndef ETSIM_EXPERIMENTS_HPP_
#define ETSIM_EXPERIMENTS_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "etsim/code.hpp"
#include "etsim/dynamics.hpp"
#include "etsim/gates.hpp"
#include "etsim/model.hpp"
#include "etsim/tomography.hpp"

namespace etsim::experiments {

using gates::GateKind;
using gates::GateModel;

// Noise rates plus the set of channels that are switched on.
struct NoiseModel {
  model::NoiseParams params;
  dynamics::NoiseChannels channels;
};

// Runs body(0) .. body(n - 1) on up to `threads` workers. Indices are handed
// out in order; the first exception is rethrown after all workers stop.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

// ---- PASS frequency sweep ----

struct PassSweepRow {
  double rabi = 0.0;  // rad/s
  int n = 0;
  double f_exact = 0.0;         // rad/s, frame offset 0
  double f_perturbative = 0.0;  // rad/s
};

std::vector<PassSweepRow> pass_sweep(const model::DeviceParams& device, double delta_d,
                                     std::span<const double> rabi,
                                     int n_trc = model::kDefaultTruncation);

// ---- ET verification ----

struct RamseyPair {
  double code_frequency = 0.0;   // E4 - E2, rad/s
  double error_frequency = 0.0;  // E3 - E1, rad/s
};

// Fits the precession of (|2> + |4>)/sqrt(2) and (|1> + |3>)/sqrt(2) under
// the gate Hamiltonian at `samples` points over [0, duration].
RamseyPair ramsey_pair(const GateModel& gate, double duration, int samples = 41);

struct EtReport {
  GateKind gate = GateKind::kKerr;
  std::vector<model::DriveSpec> drives;
  std::vector<double> scales;
  double frame_offset = 0.0;
  std::vector<double> fock_frequencies;  // n = 0..4, gate frame
  double et_mismatch = 0.0;
  double idle_mismatch = 0.0;
  code::LogicalBlocks blocks;
  code::EtCheckResult et;
  double jump_overlap_deviation = 0.0;  // max |1 - overlap| over states and times
  double jump_phase_slope = 0.0;        // rad/s
  RamseyPair ramsey;
};

EtReport et_verify(const GateModel& gate, const code::CodeSpace& code,
                   std::span<const double> jump_times, double track_duration,
                   double ramsey_duration = 100e-6);

// ---- Wigner snapshots ----

struct WignerFrame {
  GateKind gate = GateKind::kKerr;
  double time = 0.0;
  std::string branch;  // "even" or "odd"
  double probability = 0.0;
  double purity = 0.0;         // of the normalized branch state
  double logical_phase = 0.0;  // azimuth of the decoded branch state
  tomography::WignerMap map;
};

// Starts from (|0_L> - i |1_L>)/sqrt(2) with the ancilla in |g>. Odd branches
// are decoded on the single-loss images of the code words. Rows follow the
// order gate, time, branch.
std::vector<WignerFrame> wigner_evolution(std::span<const GateModel> gates,
                                          const code::CodeSpace& code,
                                          const NoiseModel& noise,
                                          std::span<const double> times,
                                          const tomography::WignerGrid& grid, double dt,
                                          int threads = 1);

// ---- Gate fidelity with one AQEC cycle ----

enum class AqecMode { kIdeal, kImperfect };

const char* to_string(AqecMode m);
AqecMode parse_aqec_mode(std::string_view name);

struct AqecOptions {
  AqecMode mode = AqecMode::kIdeal;
  double duration = 1.5e-6;       // imperfect mode only
  std::optional<Matrix> unitary;  // defaults to the ideal recovery
};

struct GateFidelityRow {
  double t_gate = 0.0;
  double f_total = 0.0;
  double f_code = 0.0;   // NaN when the branch never occurs
  double f_error = 0.0;  // NaN when the branch never occurs
  double p_no_error = 0.0;
  double phase = 0.0;  // rad
};

// Ideal mode: instantaneous ideal recovery, vacuum bath (n_th = 0), perfect
// readout and reset. Imperfect mode adds the thermal ancilla, readout and
// reset errors and undriven noise for the pulse duration, split around the
// recovery unitary.
std::vector<GateFidelityRow> gate_fidelity(const GateModel& gate, const code::CodeSpace& code,
                                           const NoiseModel& noise,
                                           std::span<const double> t_gates,
                                           const AqecOptions& aqec, double dt, int threads = 1);

// Logical rotation generated by the gate's code-space block.
Eigen::Matrix2cd logical_rotation(const GateModel& gate, const code::CodeSpace& code,
                                  double t);

// ---- Repetitive gates and recovery ----

struct RepetitiveSeries {
  GateKind gate = GateKind::kKerr;
  bool aqec = true;
  double interval = 0.0;
  std::vector<double> times;
  std::vector<double> fidelity;
  tomography::ExponentialFit fit;
};

RepetitiveSeries repetitive(const GateModel& gate, const code::CodeSpace& code,
                            const NoiseModel& noise, double interval, int n_cycles,
                            bool with_aqec, const AqecOptions& aqec, double dt,
                            int threads = 1);

// ---- Drive-induced ancilla excitation ----

struct ExcitationRow {
  double rabi = 0.0;  // rad/s
  int n = 0;
  double p_excited = 0.0;  // time-averaged
  double p_drive = 0.0;    // p_excited minus the undriven value
};

// Full driven model with a single drive at delta_d, ancilla starting thermal.
std::vector<ExcitationRow> excitation_sweep(const model::DeviceParams& device,
                                            const NoiseModel& noise, double delta_d,
                                            std::span<const double> rabi,
                                            std::span<const int> fock, double duration,
                                            double dt, int samples, int threads = 1);

// ---- Drive-induced dephasing ----

struct DephasingCheck {
  int n = 0;
  double predicted = 0.0;  // omega^2 kappa_q / delta_n^2
  double simulated = 0.0;  // ancilla decay rate from |n, g~>
  int jumps = 0;
};

// Trajectories of the driven Hamiltonian with ancilla decay only, starting in
// the dressed ground state of Fock level n. The rate is the censored
// maximum-likelihood estimate from first-jump times. Without a duration the
// run lasts 0.5 / predicted, and the jump-time resolution is 1/5000 of it.
DephasingCheck dephasing_check(const model::DeviceParams& device,
                               const model::NoiseParams& noise, const model::DriveSpec& drive,
                               int n, int trajectories, std::uint64_t seed,
                               std::optional<double> duration = std::nullopt, int threads = 1);

}  // namespace etsim::experiments

#endif  // ETSIM_EXPERIMENTS_HPP_
