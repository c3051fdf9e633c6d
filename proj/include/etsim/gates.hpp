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

// Logical gates generated by the cavity Hamiltonian: the bare Kerr phase gate
// and the PASS-engineered phase and idle gates.
//
// A gate is modeled in the drive-dressed basis. Every Fock sector n carries a
// dressed pair (g~, e~) whose energies include the exact AC-Stark shift, and
// the noise operators are rotated into that basis. Drives are assumed to be
// switched adiabatically, so bare |n, g> enters the gate as |n, g~>.

#ifndef ETSIM_GATES_HPP_
#define ETSIM_GATES_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "etsim/dynamics.hpp"
#include "etsim/model.hpp"
#include "etsim/qcore.hpp"

namespace etsim::gates {

using qcore::HilbertSpace;
using qcore::Operator;

enum class GateKind { kKerr, kEtPhase, kEtIdle };

// "R_Kerr", "R_ET", "I_ET".
const char* to_string(GateKind kind);
GateKind parse_gate(std::string_view name);  // throws InvalidArgument

enum class Switching { kAdiabatic, kSudden };

const char* to_string(Switching s);
Switching parse_switching(std::string_view name);

struct GateModel {
  GateKind kind = GateKind::kKerr;
  HilbertSpace space;
  model::DeviceParams params;             // frame_offset chosen for the gate
  std::vector<model::DriveSpec> drives;   // after calibration
  std::optional<model::CalibrationResult> calibration;
  std::vector<double> shifts;             // ground-branch shift per Fock level
  std::vector<double> mixing;             // dressing angle per Fock level
  Switching switching = Switching::kAdiabatic;

  // Diagonal Hamiltonian in the dressed basis.
  Operator hamiltonian() const;

  // Bare-basis coordinates of the dressed states: column (n, q) is |n, q~>.
  Operator dressing() const;

  // The static driven Hamiltonian (first drive only) in the bare basis.
  Operator driven_hamiltonian() const;

  // Cavity block of the dressed ground manifold.
  Operator cavity_hamiltonian() const;

  // Noise operators expressed in the dressed basis.
  dynamics::CollapseSet collapses(const model::NoiseParams& noise,
                                  dynamics::NoiseChannels channels = {}) const;

  // Bare-basis channel for a gate of the given duration. Sudden switching
  // conjugates the dressed evolution with the dressing unitary.
  dynamics::Channel channel(const model::NoiseParams& noise, double duration,
                            double dt, dynamics::NoiseChannels channels = {}) const;

  dynamics::Channel unitary(double duration) const;
};

// Default drives of each gate: none for R_Kerr, the quoted phase and idle
// drives otherwise.
std::vector<model::DriveSpec> default_drives(GateKind kind);

// Calibrates the drives (when `calibrate`), picks the frame in which |0> and
// |4> stay in phase and assembles the dressed model. Throws PhysicsError for
// resonant drives.
GateModel make_gate(GateKind kind, const HilbertSpace& space,
                    const model::DeviceParams& device,
                    const std::vector<model::DriveSpec>& drives, bool calibrate = true,
                    Switching switching = Switching::kAdiabatic);

GateModel make_gate(GateKind kind, const HilbertSpace& space,
                    const model::DeviceParams& device);

}  // namespace etsim::gates

#endif  // ETSIM_GATES_HPP_
