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

// The lowest-order binomial code, its single-photon-loss error space, and
// the algebra that decides whether a Hamiltonian acts identically on both.

#ifndef ETSIM_CODE_HPP_
#define ETSIM_CODE_HPP_

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "etsim/model.hpp"
#include "etsim/qcore.hpp"

namespace etsim::code {

using qcore::HilbertSpace;
using qcore::Operator;
using qcore::StateVector;

struct CodeSpace {
  HilbertSpace space;
  StateVector zero_l;  // (|0> + |4>) / sqrt(2)
  StateVector one_l;   // |2>
  StateVector zero_e;  // |3>, normalized a|0_L>
  StateVector one_e;   // |1>, normalized a|1_L>

  std::vector<Operator> errors;   // cavity operators, default {a}
  std::vector<double> alpha;      // <psi_L| E_j^dag E_j |psi_L>
  Operator p_code;                // |0_L><0_L| + |1_L><1_L|
  std::vector<Operator> p_error;  // E_j P_C / sqrt(alpha_j)

  // nc x 2 matrices with the words as columns.
  Matrix code_basis() const;
  Matrix error_basis() const;
  Operator p_error_space() const;  // |0_E><0_E| + |1_E><1_E|
};

// Throws InvalidArgument when cavity_dim < 6 or when an error annihilates
// the code space.
CodeSpace binomial_code(const HilbertSpace& space);
CodeSpace binomial_code(const HilbertSpace& space, std::vector<Operator> errors);

struct KlResult {
  std::vector<double> alpha;  // per error, mean of the diagonal block
  double violation = 0.0;     // worst max(|B00 - B11|, |B01|) over all pairs
};

// Knill-Laflamme test P_C E_i^dag E_j P_C = alpha_ij P_C over every pair in
// `errors`, evaluated against the code words of `code`.
KlResult kl_check(const CodeSpace& code, std::span<const Operator> errors);

// Same test for an arbitrary two-word code given as nc x 2 columns.
KlResult kl_check(const Matrix& words, std::span<const Operator> errors);

struct BlockDecomposition {
  Eigen::Matrix2cd block;  // rad/s
  double identity_coeff = 0.0;
  double z_coeff = 0.0;
  double off_diagonal = 0.0;
};

struct LogicalBlocks {
  BlockDecomposition code;
  BlockDecomposition error;
  double residual = 0.0;  // off-diagonal + leakage out of both subspaces

  // Writing code = e0 I + K'(I - Z) and error = code + c I.
  double k_prime() const { return -code.z_coeff; }
  double c() const { return error.identity_coeff - code.identity_coeff; }
};

// Reduces a composite Hamiltonian to the cavity operator seen in the
// ancilla ground manifold. When H does not couple different photon numbers
// each 2x2 block is diagonalized and the g-like (dressed) level kept;
// otherwise H is projected onto bare |g>.
Operator ground_manifold(const Operator& h);

// Composite operators are first reduced with ground_manifold.
LogicalBlocks logical_blocks(const Operator& h, const CodeSpace& code);

struct EtCheckResult {
  bool satisfied = false;         // worst_violation < tol
  std::vector<double> c_of_t;     // fitted c per segment (first error)
  double worst_violation = 0.0;   // rad/s, includes imaginary residue of c
  double imaginary_residue = 0.0;
  double commutator_violation = 0.0;  // max ||[E_j, H] |psi_L>|| / sqrt(alpha_j)
  bool commutator_satisfied = false;
};

inline constexpr double kDefaultEtTolerance = kTwoPi * 200.0;

EtCheckResult et_check(const Operator& h, const CodeSpace& code,
                       double tol = kDefaultEtTolerance);
EtCheckResult et_check(std::span<const std::pair<Operator, double>> segments,
                       const CodeSpace& code, double tol = kDefaultEtTolerance);

// Frame offset for which |0> and |4> stay in phase:
// 4 dw - 6 K + (delta_4 - delta_0) = 0.
double choose_frame_offset(const model::DeviceParams& params,
                           const model::PassShiftTable& table);

// Cardinal logical states in the order +Z, -Z, +X, -X, +Y, -Y.
struct Fiducial {
  std::string label;
  Eigen::Vector2cd logical;  // amplitudes on (|0_L>, |1_L>)
  Eigen::Vector3d bloch;
};

const std::array<Fiducial, 6>& fiducials();

StateVector encode(const CodeSpace& code, const Eigen::Vector2cd& logical);

}  // namespace etsim::code

#endif  // ETSIM_CODE_HPP_
