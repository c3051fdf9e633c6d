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

// Dense linear algebra over the composite cavity (x) ancilla Hilbert space.
//
// Composite basis index = n * 2 + q, where n is the Fock number and q = 0
// (ancilla |g>) or 1 (ancilla |e>). The cavity factor always comes first.

#ifndef ETSIM_QCORE_HPP_
#define ETSIM_QCORE_HPP_

#include <complex>
#include <numbers>

#include <Eigen/Dense>

namespace etsim {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr Complex kI{0.0, 1.0};

namespace qcore {

struct HilbertSpace {
  static constexpr int kAncillaDim = 2;
  static constexpr int kMinCavityDim = 6;

  int cavity_dim = 8;

  int ancilla_dim() const { return kAncillaDim; }
  int total_dim() const { return cavity_dim * kAncillaDim; }

  // Throws InvalidArgument when cavity_dim < kMinCavityDim.
  void validate() const;

  friend bool operator==(const HilbertSpace&, const HilbertSpace&) = default;
};

// Index of |n>|q> in the composite basis.
inline int composite_index(int n, int q) {
  return n * HilbertSpace::kAncillaDim + q;
}

enum class Subsystem { kCavity, kAncilla, kComposite };

const char* to_string(Subsystem s);

// Expected matrix dimension for an operator or state on `s`.
int subsystem_dim(const HilbertSpace& space, Subsystem s);

class Operator {
 public:
  Operator(HilbertSpace space, Subsystem subsystem, Matrix matrix);

  const HilbertSpace& space() const { return space_; }
  Subsystem subsystem() const { return subsystem_; }
  const Matrix& matrix() const { return matrix_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }

  bool is_hermitian(double tol = 1e-10) const;
  Operator adjoint() const;

  Operator& operator+=(const Operator& other);
  Operator& operator-=(const Operator& other);
  Operator& operator*=(Complex scale);

 private:
  HilbertSpace space_;
  Subsystem subsystem_;
  Matrix matrix_;
};

Operator operator+(Operator lhs, const Operator& rhs);
Operator operator-(Operator lhs, const Operator& rhs);
Operator operator*(const Operator& lhs, const Operator& rhs);
Operator operator*(Complex scale, Operator op);
Operator operator*(double scale, Operator op);

Operator commutator(const Operator& a, const Operator& b);

class StateVector {
 public:
  // Throws InvalidArgument unless the norm is 1 within 1e-10.
  StateVector(HilbertSpace space, Subsystem subsystem, Vector amplitudes);

  // Normalizes first; throws InvalidArgument for a zero vector.
  static StateVector normalized(HilbertSpace space, Subsystem subsystem,
                                Vector amplitudes);

  const HilbertSpace& space() const { return space_; }
  Subsystem subsystem() const { return subsystem_; }
  const Vector& amplitudes() const { return amplitudes_; }
  int dim() const { return static_cast<int>(amplitudes_.size()); }

 private:
  HilbertSpace space_;
  Subsystem subsystem_;
  Vector amplitudes_;
};

class DensityMatrix {
 public:
  // Validates trace (1e-9), Hermiticity and eigenvalues >= -1e-9.
  DensityMatrix(HilbertSpace space, Subsystem subsystem, Matrix rho);

  static DensityMatrix from_pure(const StateVector& psi);

  // Skips validation. For intermediate results whose validity the caller
  // asserts (integrator samples, unnormalized branches).
  static DensityMatrix unchecked(HilbertSpace space, Subsystem subsystem,
                                 Matrix rho);

  const HilbertSpace& space() const { return space_; }
  Subsystem subsystem() const { return subsystem_; }
  const Matrix& matrix() const { return rho_; }
  int dim() const { return static_cast<int>(rho_.rows()); }

  double trace() const { return rho_.trace().real(); }
  double purity() const;
  Complex expectation(const Operator& op) const;

 private:
  DensityMatrix(HilbertSpace space, Subsystem subsystem, Matrix rho, bool);

  HilbertSpace space_;
  Subsystem subsystem_;
  Matrix rho_;
};

// Raw truncated annihilation matrix: <n-1|a|n> = sqrt(n).
Matrix destroy_matrix(int dim);

// a on the cavity factor, identity on the ancilla.
Operator destroy(const HilbertSpace& space);
Operator destroy_cavity(const HilbertSpace& space);
Operator number_cavity(const HilbertSpace& space);
Operator identity(const HilbertSpace& space, Subsystem subsystem);

// Ancilla operators; g = index 0, e = index 1.
Operator sigma_minus(const HilbertSpace& space);  // |g><e|
Operator sigma_plus(const HilbertSpace& space);   // |e><g|
Operator projector_g(const HilbertSpace& space);
Operator projector_e(const HilbertSpace& space);

// Kronecker product in cavity (x) ancilla order. Throws InvalidArgument
// unless `cavity_op` is a cavity operator and `ancilla_op` an ancilla
// operator on the same space.
Operator tensor(const Operator& cavity_op, const Operator& ancilla_op);

// cavity_op (x) I_ancilla.
Operator embed_cavity(const Operator& cavity_op);

// Projects a composite operator onto an ancilla level: <q| H |q>.
Operator ancilla_block(const Operator& composite, int q);

StateVector fock(const HilbertSpace& space, int n);
StateVector product_state(const StateVector& cavity, int ancilla_level);

enum class ExpmMode {
  kUnitary,     // H must be Hermitian; uses an eigendecomposition
  kNonUnitary,  // general matrix; used for no-jump evolution
};

// e^{-i H t}.
Operator expm(const Operator& h, double t, ExpmMode mode = ExpmMode::kUnitary);

// e^{-i H t} for a Hermitian matrix.
Matrix expm_hermitian(const Matrix& h, double t);

// e^{M} for an arbitrary square matrix (scaling and squaring).
Matrix expm_general(const Matrix& m);

// max_ij |(U^dagger U - I)_ij|
double unitarity_error(const Matrix& u);

// D(alpha) = exp(alpha a^dagger - alpha^* a) on the cavity factor. Logs a
// warning when |alpha|^2 > cavity_dim / 4.
Operator displacement(const HilbertSpace& space, Complex alpha);

// Tr_ancilla(rho) -> cavity density matrix.
DensityMatrix partial_trace_ancilla(const DensityMatrix& rho);

// Tr_cavity(rho) -> ancilla density matrix.
DensityMatrix partial_trace_cavity(const DensityMatrix& rho);

double max_abs(const Matrix& m);

}  // namespace qcore
}  // namespace etsim

#endif  // ETSIM_QCORE_HPP_
