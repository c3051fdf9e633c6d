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

#include "etsim/qcore.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include <unsupported/Eigen/MatrixFunctions>

#include "etsim/errors.hpp"
#include "etsim/log.hpp"

namespace etsim::qcore {
namespace {

constexpr int kQ = HilbertSpace::kAncillaDim;

void require_same(const Operator& a, const Operator& b, const char* what) {
  if (!(a.space() == b.space()) || a.subsystem() != b.subsystem()) {
    std::ostringstream msg;
    msg << what << ": operands live on different spaces ("
        << to_string(a.subsystem()) << " dim " << a.dim() << " vs "
        << to_string(b.subsystem()) << " dim " << b.dim() << ")";
    throw InvalidArgument(msg.str());
  }
}

Matrix ancilla_matrix(int row, int col) {
  Matrix m = Matrix::Zero(kQ, kQ);
  m(row, col) = 1.0;
  return m;
}

}  // namespace

void HilbertSpace::validate() const {
  if (cavity_dim < kMinCavityDim) {
    throw InvalidArgument("cavity_dim must be >= " +
                          std::to_string(kMinCavityDim) + ", got " +
                          std::to_string(cavity_dim));
  }
}

const char* to_string(Subsystem s) {
  switch (s) {
    case Subsystem::kCavity:
      return "cavity";
    case Subsystem::kAncilla:
      return "ancilla";
    case Subsystem::kComposite:
      return "composite";
  }
  return "?";
}

int subsystem_dim(const HilbertSpace& space, Subsystem s) {
  switch (s) {
    case Subsystem::kCavity:
      return space.cavity_dim;
    case Subsystem::kAncilla:
      return kQ;
    case Subsystem::kComposite:
      return space.total_dim();
  }
  return 0;
}

Operator::Operator(HilbertSpace space, Subsystem subsystem, Matrix matrix)
    : space_(space), subsystem_(subsystem), matrix_(std::move(matrix)) {
  const int n = subsystem_dim(space_, subsystem_);
  if (matrix_.rows() != n || matrix_.cols() != n) {
    std::ostringstream msg;
    msg << "operator on " << to_string(subsystem_) << " must be " << n << "x"
        << n << ", got " << matrix_.rows() << "x" << matrix_.cols();
    throw InvalidArgument(msg.str());
  }
}

bool Operator::is_hermitian(double tol) const {
  return max_abs(matrix_ - matrix_.adjoint()) <= tol * std::max(1.0, max_abs(matrix_));
}

Operator Operator::adjoint() const {
  return Operator(space_, subsystem_, matrix_.adjoint());
}

Operator& Operator::operator+=(const Operator& other) {
  require_same(*this, other, "operator+");
  matrix_ += other.matrix_;
  return *this;
}

Operator& Operator::operator-=(const Operator& other) {
  require_same(*this, other, "operator-");
  matrix_ -= other.matrix_;
  return *this;
}

Operator& Operator::operator*=(Complex scale) {
  matrix_ *= scale;
  return *this;
}

Operator operator+(Operator lhs, const Operator& rhs) { return lhs += rhs; }
Operator operator-(Operator lhs, const Operator& rhs) { return lhs -= rhs; }

Operator operator*(const Operator& lhs, const Operator& rhs) {
  require_same(lhs, rhs, "operator*");
  return Operator(lhs.space(), lhs.subsystem(), lhs.matrix() * rhs.matrix());
}

Operator operator*(Complex scale, Operator op) { return op *= scale; }
Operator operator*(double scale, Operator op) { return op *= Complex(scale); }

Operator commutator(const Operator& a, const Operator& b) {
  return a * b - b * a;
}

StateVector::StateVector(HilbertSpace space, Subsystem subsystem,
                         Vector amplitudes)
    : space_(space), subsystem_(subsystem), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != subsystem_dim(space_, subsystem_)) {
    throw InvalidArgument("state vector has wrong dimension for " +
                          std::string(to_string(subsystem_)));
  }
  const double norm = amplitudes_.norm();
  if (std::abs(norm - 1.0) > 1e-10) {
    throw InvalidArgument("state vector norm " + std::to_string(norm) +
                          " differs from 1");
  }
}

StateVector StateVector::normalized(HilbertSpace space, Subsystem subsystem,
                                    Vector amplitudes) {
  const double norm = amplitudes.norm();
  if (norm == 0.0) throw InvalidArgument("cannot normalize a zero vector");
  return StateVector(space, subsystem, amplitudes / norm);
}

DensityMatrix::DensityMatrix(HilbertSpace space, Subsystem subsystem,
                             Matrix rho, bool)
    : space_(space), subsystem_(subsystem), rho_(std::move(rho)) {
  const int n = subsystem_dim(space_, subsystem_);
  if (rho_.rows() != n || rho_.cols() != n) {
    throw InvalidArgument("density matrix has wrong dimension for " +
                          std::string(to_string(subsystem_)));
  }
}

DensityMatrix::DensityMatrix(HilbertSpace space, Subsystem subsystem,
                             Matrix rho)
    : DensityMatrix(space, subsystem, std::move(rho), true) {
  const double tr_err = std::abs(rho_.trace() - Complex(1.0));
  if (tr_err > 1e-9) {
    throw InvalidArgument("density matrix trace differs from 1 by " +
                          std::to_string(tr_err));
  }
  if (max_abs(rho_ - rho_.adjoint()) > 1e-9) {
    throw InvalidArgument("density matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(rho_, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-9) {
    throw InvalidArgument("density matrix has a negative eigenvalue " +
                          std::to_string(eig.eigenvalues().minCoeff()));
  }
}

DensityMatrix DensityMatrix::from_pure(const StateVector& psi) {
  const Vector& v = psi.amplitudes();
  return DensityMatrix(psi.space(), psi.subsystem(), v * v.adjoint(), true);
}

DensityMatrix DensityMatrix::unchecked(HilbertSpace space, Subsystem subsystem,
                                       Matrix rho) {
  return DensityMatrix(space, subsystem, std::move(rho), true);
}

double DensityMatrix::purity() const {
  return (rho_ * rho_).trace().real();
}

Complex DensityMatrix::expectation(const Operator& op) const {
  if (op.dim() != dim()) {
    throw InvalidArgument("expectation: operator and state dimensions differ");
  }
  return (op.matrix() * rho_).trace();
}

Matrix destroy_matrix(int dim) {
  Matrix a = Matrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

Operator destroy_cavity(const HilbertSpace& space) {
  return Operator(space, Subsystem::kCavity, destroy_matrix(space.cavity_dim));
}

Operator destroy(const HilbertSpace& space) {
  return embed_cavity(destroy_cavity(space));
}

Operator number_cavity(const HilbertSpace& space) {
  Matrix n = Matrix::Zero(space.cavity_dim, space.cavity_dim);
  for (int k = 0; k < space.cavity_dim; ++k) n(k, k) = k;
  return Operator(space, Subsystem::kCavity, std::move(n));
}

Operator identity(const HilbertSpace& space, Subsystem subsystem) {
  const int n = subsystem_dim(space, subsystem);
  return Operator(space, subsystem, Matrix::Identity(n, n));
}

Operator sigma_minus(const HilbertSpace& space) {
  return Operator(space, Subsystem::kAncilla, ancilla_matrix(0, 1));
}

Operator sigma_plus(const HilbertSpace& space) {
  return Operator(space, Subsystem::kAncilla, ancilla_matrix(1, 0));
}

Operator projector_g(const HilbertSpace& space) {
  return Operator(space, Subsystem::kAncilla, ancilla_matrix(0, 0));
}

Operator projector_e(const HilbertSpace& space) {
  return Operator(space, Subsystem::kAncilla, ancilla_matrix(1, 1));
}

Operator tensor(const Operator& cavity_op, const Operator& ancilla_op) {
  if (cavity_op.subsystem() != Subsystem::kCavity ||
      ancilla_op.subsystem() != Subsystem::kAncilla) {
    throw InvalidArgument(
        "tensor expects (cavity, ancilla) operands in that order");
  }
  if (!(cavity_op.space() == ancilla_op.space())) {
    throw InvalidArgument("tensor: operands belong to different spaces");
  }
  const Matrix& a = cavity_op.matrix();
  const Matrix& b = ancilla_op.matrix();
  const int na = static_cast<int>(a.rows());
  Matrix out(na * kQ, na * kQ);
  for (int i = 0; i < na; ++i) {
    for (int j = 0; j < na; ++j) {
      out.block(i * kQ, j * kQ, kQ, kQ) = a(i, j) * b;
    }
  }
  return Operator(cavity_op.space(), Subsystem::kComposite, std::move(out));
}

Operator embed_cavity(const Operator& cavity_op) {
  return tensor(cavity_op, identity(cavity_op.space(), Subsystem::kAncilla));
}

Operator ancilla_block(const Operator& composite, int q) {
  if (composite.subsystem() != Subsystem::kComposite) {
    throw InvalidArgument("ancilla_block expects a composite operator");
  }
  const int nc = composite.space().cavity_dim;
  Matrix out(nc, nc);
  for (int i = 0; i < nc; ++i) {
    for (int j = 0; j < nc; ++j) {
      out(i, j) = composite.matrix()(composite_index(i, q), composite_index(j, q));
    }
  }
  return Operator(composite.space(), Subsystem::kCavity, std::move(out));
}

StateVector fock(const HilbertSpace& space, int n) {
  if (n < 0 || n >= space.cavity_dim) {
    throw InvalidArgument("Fock index " + std::to_string(n) +
                          " outside truncation");
  }
  Vector v = Vector::Zero(space.cavity_dim);
  v(n) = 1.0;
  return StateVector(space, Subsystem::kCavity, std::move(v));
}

StateVector product_state(const StateVector& cavity, int ancilla_level) {
  if (cavity.subsystem() != Subsystem::kCavity) {
    throw InvalidArgument("product_state expects a cavity state");
  }
  if (ancilla_level < 0 || ancilla_level >= kQ) {
    throw InvalidArgument("ancilla level must be 0 (g) or 1 (e)");
  }
  const int nc = cavity.dim();
  Vector v = Vector::Zero(nc * kQ);
  for (int n = 0; n < nc; ++n) v(composite_index(n, ancilla_level)) = cavity.amplitudes()(n);
  return StateVector(cavity.space(), Subsystem::kComposite, std::move(v));
}

Matrix expm_hermitian(const Matrix& h, double t) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
  const Eigen::VectorXd& w = eig.eigenvalues();
  const Matrix& v = eig.eigenvectors();
  Vector phases(w.size());
  for (Eigen::Index k = 0; k < w.size(); ++k) phases(k) = std::exp(-kI * (w(k) * t));
  return v * phases.asDiagonal() * v.adjoint();
}

Matrix expm_general(const Matrix& m) { return m.exp(); }

Operator expm(const Operator& h, double t, ExpmMode mode) {
  const Matrix& m = h.matrix();
  if (mode == ExpmMode::kNonUnitary) {
    return Operator(h.space(), h.subsystem(), expm_general(-kI * t * m));
  }
  if (!h.is_hermitian(1e-12)) {
    throw InvalidArgument(
        "expm: non-Hermitian generator requires ExpmMode::kNonUnitary");
  }
  // Diagonal input is exponentiated entrywise so the result is exact.
  if (max_abs(m - Matrix(m.diagonal().asDiagonal())) == 0.0) {
    Matrix u = Matrix::Zero(m.rows(), m.cols());
    for (Eigen::Index k = 0; k < m.rows(); ++k) u(k, k) = std::exp(-kI * (m(k, k).real() * t));
    return Operator(h.space(), h.subsystem(), std::move(u));
  }
  const Matrix herm = 0.5 * (m + m.adjoint());
  return Operator(h.space(), h.subsystem(), expm_hermitian(herm, t));
}

double unitarity_error(const Matrix& u) {
  return max_abs(u.adjoint() * u - Matrix::Identity(u.rows(), u.cols()));
}

Operator displacement(const HilbertSpace& space, Complex alpha) {
  if (std::norm(alpha) > space.cavity_dim / 4.0) {
    std::ostringstream msg;
    msg << "displacement |alpha|^2 = " << std::norm(alpha)
        << " is large for cavity_dim " << space.cavity_dim
        << "; truncation error may be significant";
    log_warning(msg.str());
  }
  const Matrix a = destroy_matrix(space.cavity_dim);
  // alpha a^dag - alpha^* a = -i H with H = i (alpha a^dag - alpha^* a).
  const Matrix h = kI * (alpha * a.adjoint() - std::conj(alpha) * a);
  return Operator(space, Subsystem::kCavity, expm_hermitian(h, 1.0));
}

DensityMatrix partial_trace_ancilla(const DensityMatrix& rho) {
  if (rho.subsystem() != Subsystem::kComposite) {
    throw InvalidArgument("partial_trace_ancilla expects a composite state");
  }
  const int nc = rho.space().cavity_dim;
  Matrix out = Matrix::Zero(nc, nc);
  for (int i = 0; i < nc; ++i) {
    for (int j = 0; j < nc; ++j) {
      for (int q = 0; q < kQ; ++q) out(i, j) += rho.matrix()(composite_index(i, q), composite_index(j, q));
    }
  }
  return DensityMatrix::unchecked(rho.space(), Subsystem::kCavity, std::move(out));
}

DensityMatrix partial_trace_cavity(const DensityMatrix& rho) {
  if (rho.subsystem() != Subsystem::kComposite) {
    throw InvalidArgument("partial_trace_cavity expects a composite state");
  }
  const int nc = rho.space().cavity_dim;
  Matrix out = Matrix::Zero(kQ, kQ);
  for (int p = 0; p < kQ; ++p) {
    for (int q = 0; q < kQ; ++q) {
      for (int n = 0; n < nc; ++n) out(p, q) += rho.matrix()(composite_index(n, p), composite_index(n, q));
    }
  }
  return DensityMatrix::unchecked(rho.space(), Subsystem::kAncilla, std::move(out));
}

double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace etsim::qcore
