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

// Figures of merit: Wigner maps, parity post-selection, logical process
// tomography and lifetime fits.

#ifndef ETSIM_TOMOGRAPHY_HPP_
#define ETSIM_TOMOGRAPHY_HPP_

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "etsim/code.hpp"
#include "etsim/qcore.hpp"

namespace etsim::tomography {

using qcore::DensityMatrix;

struct WignerGrid {
  double x_min = -2.5, x_max = 2.5;
  double y_min = -2.5, y_max = 2.5;
  int nx = 41, ny = 41;

  void validate() const;
  double x(int i) const;
  double y(int j) const;
  double cell_area() const;
};

struct WignerMap {
  WignerGrid grid;
  RealMatrix values;  // values(j, i) at alpha = x(i) + i y(j)
  static constexpr const char* kConvention = "W(alpha) = (2/pi) Tr[D(alpha) P D(-alpha) rho]";
  // sum W dA; approaches Tr rho on a large enough grid.
  double integral() const;
};

// Cavity (or composite, traced over the ancilla) state. The state is
// zero-padded so displacements across the grid are not truncated; a warning
// is logged when the input itself populates its top Fock level.
WignerMap wigner(const DensityMatrix& rho, const WignerGrid& grid);

struct ParityBranches {
  double p_even = 0.0;
  double p_odd = 0.0;
  std::optional<DensityMatrix> even;  // absent for zero probability
  std::optional<DensityMatrix> odd;
};

ParityBranches parity_postselect(const DensityMatrix& rho);

// Code-space projection of a composite or cavity state as a 2x2 logical
// density matrix; the probability lost outside the code space is returned
// as the maximally mixed state.
Eigen::Matrix2cd decode_logical(const DensityMatrix& rho, const code::CodeSpace& code);

Eigen::Vector3d bloch_vector(const Eigen::Matrix2cd& rho);

struct PauliTransferMatrix {
  Eigen::Matrix4d r = Eigen::Matrix4d::Identity();  // basis I, X, Y, Z
};

// Linear inversion from outputs for the six fiducials (code::fiducials order).
PauliTransferMatrix ptm_from_outputs(std::span<const Eigen::Vector3d, 6> bloch);
PauliTransferMatrix unitary_ptm(const Eigen::Matrix2cd& u);
PauliTransferMatrix compose(const PauliTransferMatrix& second, const PauliTransferMatrix& first);

double process_fidelity(const PauliTransferMatrix& r, const PauliTransferMatrix& ideal);
double average_fidelity(double process_fidelity);
// Rotation angle about logical Z read from the X-Y block.
double logical_phase(const PauliTransferMatrix& r);

enum class RecoveryPolicy { kNone, kIdealDecode, kFlagSplit };
const char* to_string(RecoveryPolicy p);

struct ChannelOutput {
  DensityMatrix state;
  std::optional<DensityMatrix> code_branch;
  std::optional<DensityMatrix> error_branch;
  double p_error = 0.0;
};

using LogicalChannel = std::function<ChannelOutput(const DensityMatrix&)>;

struct PtmResult {
  PauliTransferMatrix total;
  std::optional<PauliTransferMatrix> code;   // flag-split only
  std::optional<PauliTransferMatrix> error;  // flag-split only
  double weight_code = 1.0;
  double weight_error = 0.0;
  std::array<double, 6> p_error{};  // per fiducial
};

// Prepares each fiducial in the code with the ancilla in `ancilla` (2x2),
// applies the channel and decodes. kIdealDecode runs one noiseless recovery
// before decoding. A flag-split branch that never occurs is left empty.
PtmResult logical_ptm(const LogicalChannel& channel, const code::CodeSpace& code,
                      RecoveryPolicy policy,
                      const Eigen::Matrix2cd& ancilla = Eigen::Vector2cd(1, 0).asDiagonal());

struct ExponentialFit {
  double lifetime = 0.0;  // s; infinity for a flat series
  double floor = 0.25;
  double amplitude = 0.0;
  double residual = 0.0;  // RMS
  bool degenerate = false;
};

// Least-squares F(t) = A exp(-t / tau) + F0, with F0 fixed unless `floor`
// is empty. Throws InvalidArgument for fewer than four samples.
ExponentialFit fit_exponential(std::span<const double> times, std::span<const double> values,
                               std::optional<double> floor = 0.25);

}  // namespace etsim::tomography

#endif  // ETSIM_TOMOGRAPHY_HPP_
