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

// Autonomous error correction: the recovery unitary, the measure-and-reset
// cycle, GRAPE pulse optimization and the repeated gate/recovery schedule.

#ifndef ETSIM_RECOVERY_HPP_
#define ETSIM_RECOVERY_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "etsim/code.hpp"
#include "etsim/dynamics.hpp"
#include "etsim/model.hpp"
#include "etsim/qcore.hpp"

namespace etsim::recovery {

using dynamics::Channel;
using qcore::DensityMatrix;
using qcore::HilbertSpace;
using qcore::Operator;

// Isometry on the composite space given by matching columns.
struct AqecTarget {
  HilbertSpace space;
  Matrix domain;  // d x r, orthonormal columns
  Matrix image;   // d x r, orthonormal columns
};

// |psi_L~>|g> -> |psi_L>|g> and |psi_E>|g> -> |psi_L>|e>, where |psi_L~> is
// the code word after `elapsed` of no-jump evolution at rate kappa_a.
AqecTarget aqec_target(const code::CodeSpace& code, double kappa_a, double elapsed);

// Completes domain -> image to a unitary. The complements of both column
// sets are built by Gram-Schmidt over basis vectors in index order and
// paired in that order.
Matrix complete_unitary(const Matrix& domain, const Matrix& image);

Operator ideal_aqec_unitary(const code::CodeSpace& code, double kappa_a, double elapsed);

struct AqecSettings {
  Operator unitary;
  double readout_flip = 0.0;
  double reset_fail = 0.0;
  // Noise accumulated during the finite pulse, applied before and after the
  // unitary (half the duration each).
  std::optional<Channel> pulse_noise_half;
};

struct AqecOutcome {
  DensityMatrix state;          // unconditional, after reset
  double p_error_flag = 0.0;    // probability of reading |e>
  std::optional<DensityMatrix> code_branch;   // flag g, normalized
  std::optional<DensityMatrix> error_branch;  // flag e, normalized
};

AqecOutcome aqec_cycle(const DensityMatrix& rho, const AqecSettings& settings);

// Ideal unitary for `elapsed`, imperfections taken from `noise`.
AqecOutcome aqec_cycle(const DensityMatrix& rho, const code::CodeSpace& code,
                       const model::NoiseParams& noise, double elapsed);

struct CycleRecord {
  DensityMatrix state;
  double p_error_flag = 0.0;
};

// Alternates `gate` (the evolution between recoveries) with aqec_cycle; when
// `aqec` is empty only the gate is applied. Returns one record per cycle.
std::vector<CycleRecord> repetitive_schedule(const DensityMatrix& rho0, const Channel& gate,
                                             const std::optional<AqecSettings>& aqec,
                                             int n_cycles);

// ---- GRAPE ----

// Control Hamiltonian u* b + u b^dag with complex amplitude u (rad/s).
struct ControlChannel {
  std::string name;
  Matrix lowering;
};

struct GrapeProblem {
  HilbertSpace space;
  Matrix drift;
  std::vector<ControlChannel> controls;
  AqecTarget target;
  int segments = 75;
  double duration = 1.5e-6;
  double amplitude_bound = kTwoPi * 3e6;  // per quadrature, rad/s

  // Throws InvalidArgument for fewer than 20 segments or a bad bound.
  void validate() const;
  int parameter_count() const { return 2 * static_cast<int>(controls.size()) * segments; }
};

// Ancilla and cavity drives on the dispersive Hamiltonian (ancilla frame,
// zero cavity frame offset), targeting aqec_target(code, kappa_a, elapsed).
GrapeProblem aqec_grape_problem(const code::CodeSpace& code, const model::DeviceParams& params,
                                double duration, int segments, double amplitude_bound,
                                double kappa_a = 0.0, double elapsed = 0.0);

struct ControlPulse {
  double segment_duration = 0.0;
  std::vector<std::string> channels;
  std::vector<std::vector<Complex>> amplitudes;  // [segment][channel], rad/s

  double total_duration() const { return segment_duration * amplitudes.size(); }
  // Columns: segment_index,channel,real,imag,segment_duration_s (rad/s).
  void write_csv(std::ostream& os) const;
  static ControlPulse read_csv(std::istream& is);
};

// Parameters x are I/Q amplitudes in units of the bound, ordered
// [segment][channel][I, Q].
ControlPulse pulse_from_parameters(const GrapeProblem& p, const Eigen::VectorXd& x);
Eigen::VectorXd parameters_from_pulse(const GrapeProblem& p, const ControlPulse& pulse);

// Segment propagators applied in order.
Matrix pulse_unitary(const GrapeProblem& p, const ControlPulse& pulse);

// Phi = |Tr[image^dag U domain]|^2 / r^2 and its exact gradient in x.
double grape_fidelity(const GrapeProblem& p, const Eigen::VectorXd& x,
                      Eigen::VectorXd* gradient = nullptr);

struct GrapeOptions {
  int max_iter = 2000;
  std::uint64_t seed = 1;
  double initial_scale = 0.1;  // uniform in [-s, s] times the bound
  double target_infidelity = 1e-4;
  int memory = 10;
  std::optional<Eigen::VectorXd> initial;  // overrides the random start
};

struct GrapeResult {
  ControlPulse pulse;
  std::vector<double> fidelity_history;  // one entry per accepted iterate
  double fidelity = 0.0;
  int iterations = 0;
  bool converged = false;
};

GrapeResult grape_optimize(const GrapeProblem& p, const GrapeOptions& options);

}  // namespace etsim::recovery

#endif  // ETSIM_RECOVERY_HPP_
