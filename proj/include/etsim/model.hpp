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

// Device parameterization and the cavity/ancilla Hamiltonians: the static
// dispersive Hamiltonian, the driven (PASS) Hamiltonian, photon-number
// resolved AC-Stark shift tables and drive-induced decoherence estimates.
//
// All frequencies are angular (rad/s). Drive detunings follow one convention
// throughout: delta_d = omega_drive - omega_q, and the detuning seen by the
// n-photon ancilla transition is delta_d + n * chi. A drive placed between
// the n and n+1 transitions therefore has delta_n < 0 < delta_{n+1}.

#ifndef ETSIM_MODEL_HPP_
#define ETSIM_MODEL_HPP_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "etsim/qcore.hpp"

namespace etsim::model {

inline constexpr int kDefaultTruncation = 4;  // n_trc for the binomial code

struct DeviceParams {
  double chi = 0.0;            // dispersive shift, > 0
  double kerr = 0.0;           // cavity self-Kerr K, > 0
  double anharmonicity = 0.0;  // ancilla anharmonicity E_c, > 0 (0 = unknown)
  double frame_offset = 0.0;   // cavity rotating-frame detuning
  double omega_q = 0.0;        // ancilla frequency at n = 0 in the frame

  // Throws PhysicsError for non-positive chi or kerr. Warns (does not throw)
  // when kerr deviates from chi^2 / (4 E_c) by more than 20%.
  void validate() const;
};

struct NoiseParams {
  double cavity_t1 = 0.0;
  double cavity_tphi = 0.0;
  double qubit_t1 = 0.0;
  double qubit_tphi = 0.0;
  double n_th = 0.0;
  double readout_flip = 0.0;
  double reset_fail = 0.0;

  double kappa_a() const { return 1.0 / cavity_t1; }
  double kappa_q() const { return 1.0 / qubit_t1; }

  void validate() const;
};

struct DriveSpec {
  double omega = 0.0;    // coupling in H: omega (|e><g| + |g><e|)
  double delta_d = 0.0;  // omega_drive - omega_q

  friend bool operator==(const DriveSpec&, const DriveSpec&) = default;
};

// Measured device of the reference experiment, converted to rad/s.
DeviceParams reference_device();
NoiseParams reference_noise();

// A drive quoted by its Rabi frequency: coupling = rabi / 2.
DriveSpec from_rabi(double rabi, double delta_d);

// Nominal drives of the reference experiment, from the quoted Rabi
// frequencies.
std::vector<DriveSpec> reference_phase_drives();
std::vector<DriveSpec> reference_idle_drives();

// delta_d + n * chi.
double fock_detuning(const DeviceParams& params, const DriveSpec& drive, int n);

// H0 = dw a^dag a - chi a^dag a |e><e| - (K/2) a^dag^2 a^2 + omega_q |e><e|.
qcore::Operator build_h0(const qcore::HilbertSpace& space,
                         const DeviceParams& params);

// Driven Hamiltonian in the frame rotating with the first drive. The first
// drive is static there; further drives carry e^{-i (w_k - w_1) t} phases.
class DrivenHamiltonian {
 public:
  struct RotatingTerm {
    double omega;      // coupling
    double frequency;  // w_k - w_1
  };

  DrivenHamiltonian(qcore::Operator static_part,
                    std::vector<RotatingTerm> rotating);

  const qcore::Operator& static_part() const { return static_part_; }
  const std::vector<RotatingTerm>& rotating_terms() const { return rotating_; }
  bool is_static() const { return rotating_.empty(); }

  qcore::Operator at(double t) const;

  // Piecewise-constant samples over [t0, t0 + duration), each segment
  // evaluated at its midpoint.
  std::vector<std::pair<qcore::Operator, double>> segments(
      double t0, double duration, double segment_length) const;

 private:
  qcore::Operator static_part_;
  std::vector<RotatingTerm> rotating_;
};

// Throws PhysicsError if any |delta_d + n chi| < 3 omega for n <= n_trc,
// if more than two drives are given, or if omega >= 0.3 chi.
void check_drives(const DeviceParams& params, std::span<const DriveSpec> drives,
                  int n_trc = kDefaultTruncation);

DrivenHamiltonian build_driven_h(const qcore::HilbertSpace& space,
                                 const DeviceParams& params,
                                 std::span<const DriveSpec> drives,
                                 int n_trc = kDefaultTruncation);

// Exact ground-branch shift of a driven two-level system with coupling
// omega and detuning delta: (-delta + sign(delta) sqrt(delta^2 + 4 omega^2))/2.
// Throws PhysicsError for delta == 0.
double dressed_shift(double omega, double delta);

// Signed |e> amplitude of the dressed ground state, ~ omega / delta.
double dressed_excited_amplitude(double omega, double delta);

enum class ShiftMethod { kPerturbative, kExactDressed, kNumericOracle };

const char* to_string(ShiftMethod m);

struct PassShiftTable {
  std::vector<double> shifts;  // delta_n, n = 0..n_trc
  ShiftMethod method = ShiftMethod::kExactDressed;

  int n_trc() const { return static_cast<int>(shifts.size()) - 1; }
};

// Shifts are additive over drives. kNumericOracle diagonalizes the static
// single-drive Hamiltonian per drive and needs space.cavity_dim > n_trc + 1.
PassShiftTable pass_shift_table(const DeviceParams& params,
                                std::span<const DriveSpec> drives,
                                int n_trc = kDefaultTruncation,
                                ShiftMethod method = ShiftMethod::kExactDressed,
                                int cavity_dim = 8);

// Ancilla-|g> level energies relative to |0,g>:
// f_n = n dw - K n (n-1) / 2 + delta_n - delta_0.
std::vector<double> fock_frequencies(const DeviceParams& params,
                                     const PassShiftTable& table,
                                     double frame_offset);

// (f4 - f2) - (f3 - f1): zero when the error and code spaces rotate in step.
double et_mismatch(std::span<const double> f);

// f4 / 2 - f2: zero for an idle logical gate.
double idle_mismatch(std::span<const double> f);

// gamma_n = omega^2 kappa_q / delta_n^2.
double induced_dephasing(const NoiseParams& noise, double omega, double delta_n);
double induced_dephasing(const DeviceParams& params, const NoiseParams& noise,
                         const DriveSpec& drive, int n);

struct FeasibilityCondition {
  std::string description;
  double value = 0.0;
  double reference = 0.0;
  double margin = 0.0;  // value / reference
  bool satisfied = false;
};

struct FeasibilityReport {
  double chi_over_ec = 0.0;
  FeasibilityCondition condition1;  // omega = (chi/2) O(sqrt(chi / 2 E_c))
  FeasibilityCondition condition2;  // sqrt(chi / 2 E_c) / 2 << 1
  FeasibilityCondition condition3;  // chi / 2 E_c << kappa_a / kappa_q
  bool all_satisfied() const {
    return condition1.satisfied && condition2.satisfied && condition3.satisfied;
  }
};

// "<<" means a factor of 10; "O(x)" means within a factor of 10 of x. Without
// a drive amplitude, condition 1 uses the amplitude that compensates Kerr,
// 2 omega^2 / chi = K.
FeasibilityReport pass_feasibility(const DeviceParams& params,
                                   const NoiseParams& noise,
                                   std::optional<double> omega = std::nullopt);

struct CalibrationResult {
  std::vector<DriveSpec> drives;  // rescaled couplings
  std::vector<double> scales;     // calibrated / nominal amplitude
  double et_residual = 0.0;       // rad/s
  double idle_residual = 0.0;     // rad/s, two-drive calibration only
};

// Rescales drive amplitudes so the exact-dressed shift table satisfies the
// error-transparency relation (one drive) or that relation plus the idle
// relation (two drives). Detunings stay fixed. Throws ConvergenceError when
// no solution is found and PhysicsError for resonant results.
CalibrationResult calibrate_drives(const DeviceParams& params,
                                   std::span<const DriveSpec> nominal);

}  // namespace etsim::model

#endif  // ETSIM_MODEL_HPP_
