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

#include "etsim/code.hpp"

#include <algorithm>
#include <cmath>

#include "etsim/errors.hpp"

namespace etsim::code {

using qcore::Subsystem;

namespace {

Vector fock_vector(int dim, std::initializer_list<std::pair<int, double>> terms) {
  Vector v = Vector::Zero(dim);
  for (const auto& [n, amp] : terms) v(n) = amp;
  return v;
}

Matrix columns(const StateVector& a, const StateVector& b) {
  Matrix m(a.dim(), 2);
  m.col(0) = a.amplitudes();
  m.col(1) = b.amplitudes();
  return m;
}

Operator as_cavity(const Operator& h) {
  if (h.subsystem() == Subsystem::kCavity) return h;
  if (h.subsystem() == Subsystem::kComposite) return ground_manifold(h);
  throw InvalidArgument("expected a cavity or composite operator");
}

BlockDecomposition decompose(const Eigen::Matrix2cd& b) {
  BlockDecomposition d;
  d.block = b;
  d.identity_coeff = 0.5 * (b(0, 0) + b(1, 1)).real();
  d.z_coeff = 0.5 * (b(0, 0) - b(1, 1)).real();
  d.off_diagonal = std::max(std::abs(b(0, 1)), std::abs(b(1, 0)));
  return d;
}

double block_violation(const Eigen::Matrix2cd& b) {
  return std::max({std::abs(b(0, 0) - b(1, 1)), std::abs(b(0, 1)), std::abs(b(1, 0))});
}

}  // namespace

Operator ground_manifold(const Operator& h) {
  if (h.subsystem() != Subsystem::kComposite) {
    throw InvalidArgument("ground_manifold expects a composite operator");
  }
  const int nc = h.space().cavity_dim;
  const Matrix& m = h.matrix();
  Matrix blockwise = Matrix::Zero(m.rows(), m.cols());
  for (int n = 0; n < nc; ++n) blockwise.block(2 * n, 2 * n, 2, 2) = m.block(2 * n, 2 * n, 2, 2);
  if (qcore::max_abs(m - blockwise) > 1e-12 * std::max(1.0, qcore::max_abs(m))) {
    return qcore::ancilla_block(h, 0);
  }
  Matrix out = Matrix::Zero(nc, nc);
  for (int n = 0; n < nc; ++n) {
    const Eigen::Matrix2cd b = m.block(2 * n, 2 * n, 2, 2);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> eig(b);
    const int k = std::abs(eig.eigenvectors()(0, 0)) >= std::abs(eig.eigenvectors()(0, 1)) ? 0 : 1;
    out(n, n) = eig.eigenvalues()(k);
  }
  return Operator(h.space(), Subsystem::kCavity, std::move(out));
}

Matrix CodeSpace::code_basis() const { return columns(zero_l, one_l); }
Matrix CodeSpace::error_basis() const { return columns(zero_e, one_e); }

Operator CodeSpace::p_error_space() const {
  const Matrix e = error_basis();
  return Operator(space, Subsystem::kCavity, e * e.adjoint());
}

CodeSpace binomial_code(const HilbertSpace& space) {
  return binomial_code(space, {qcore::destroy_cavity(space)});
}

CodeSpace binomial_code(const HilbertSpace& space, std::vector<Operator> errors) {
  space.validate();
  const int nc = space.cavity_dim;
  const double r = 1.0 / std::sqrt(2.0);
  StateVector zero_l(space, Subsystem::kCavity, fock_vector(nc, {{0, r}, {4, r}}));
  StateVector one_l(space, Subsystem::kCavity, fock_vector(nc, {{2, 1.0}}));

  const Matrix c = columns(zero_l, one_l);
  std::vector<double> alpha;
  std::vector<Operator> p_error;
  for (const auto& e : errors) {
    if (e.subsystem() != Subsystem::kCavity || !(e.space() == space)) {
      throw InvalidArgument("code errors must be cavity operators on the code space");
    }
    const Eigen::Matrix2cd block = c.adjoint() * e.matrix().adjoint() * e.matrix() * c;
    const double a = 0.5 * (block(0, 0) + block(1, 1)).real();
    if (!(a > 0.0)) throw InvalidArgument("error operator annihilates the code space");
    alpha.push_back(a);
    p_error.push_back(Operator(space, Subsystem::kCavity,
                               e.matrix() * (c * c.adjoint()) / std::sqrt(a)));
  }

  // Error words are the normalized images under the first error.
  const Matrix& a0 = errors.front().matrix();
  auto zero_e = StateVector::normalized(space, Subsystem::kCavity, a0 * zero_l.amplitudes());
  auto one_e = StateVector::normalized(space, Subsystem::kCavity, a0 * one_l.amplitudes());

  Operator p_code(space, Subsystem::kCavity, c * c.adjoint());
  return CodeSpace{space,           std::move(zero_l), std::move(one_l),
                   std::move(zero_e), std::move(one_e), std::move(errors),
                   std::move(alpha),  std::move(p_code), std::move(p_error)};
}

KlResult kl_check(const Matrix& words, std::span<const Operator> errors) {
  KlResult r;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    for (std::size_t j = 0; j < errors.size(); ++j) {
      const Eigen::Matrix2cd b =
          words.adjoint() * errors[i].matrix().adjoint() * errors[j].matrix() * words;
      if (i == j) r.alpha.push_back(0.5 * (b(0, 0) + b(1, 1)).real());
      r.violation = std::max(r.violation, block_violation(b));
    }
  }
  return r;
}

KlResult kl_check(const CodeSpace& code, std::span<const Operator> errors) {
  return kl_check(code.code_basis(), errors);
}

LogicalBlocks logical_blocks(const Operator& h_in, const CodeSpace& code) {
  const Operator h = as_cavity(h_in);
  if (!h.is_hermitian(1e-9)) throw InvalidArgument("logical_blocks: H must be Hermitian");
  const Matrix c = code.code_basis();
  const Matrix e = code.error_basis();
  const Matrix& m = h.matrix();

  LogicalBlocks lb;
  lb.code = decompose(c.adjoint() * m * c);
  lb.error = decompose(e.adjoint() * m * e);

  const int nc = code.space.cavity_dim;
  const Matrix outside =
      Matrix::Identity(nc, nc) - c * c.adjoint() - e * e.adjoint();
  const double leak = std::max(qcore::max_abs(outside * m * c),
                               qcore::max_abs(outside * m * e));
  const double cross = qcore::max_abs(e.adjoint() * m * c);
  lb.residual = std::max({lb.code.off_diagonal, lb.error.off_diagonal, leak, cross});
  return lb;
}

EtCheckResult et_check(std::span<const std::pair<Operator, double>> segments,
                       const CodeSpace& code, double tol) {
  EtCheckResult r;
  const Matrix c = code.code_basis();
  for (const auto& [h_in, duration] : segments) {
    (void)duration;
    const Operator h = as_cavity(h_in);
    const Matrix& m = h.matrix();
    const Eigen::Matrix2cd code_block = c.adjoint() * m * c;
    for (std::size_t j = 0; j < code.errors.size(); ++j) {
      const Matrix pj = code.p_error[j].matrix() * c;  // images of the words
      const Eigen::Matrix2cd error_block = pj.adjoint() * m * pj;
      const Eigen::Matrix2cd diff = error_block - code_block;
      const Complex tr = diff.trace();
      const double cj = 0.5 * tr.real();
      if (j == 0) r.c_of_t.push_back(cj);
      r.imaginary_residue = std::max(r.imaginary_residue, 0.5 * std::abs(tr.imag()));
      const Eigen::Matrix2cd rest = diff - cj * Eigen::Matrix2cd::Identity();
      r.worst_violation = std::max(r.worst_violation, rest.cwiseAbs().maxCoeff());

      const Matrix& ej = code.errors[j].matrix();
      const Matrix comm = (ej * m - m * ej) * c / std::sqrt(code.alpha[j]);
      r.commutator_violation =
          std::max(r.commutator_violation, comm.colwise().norm().maxCoeff());
    }
  }
  r.satisfied = r.worst_violation < tol;
  r.commutator_satisfied = r.commutator_violation < tol;
  return r;
}

EtCheckResult et_check(const Operator& h, const CodeSpace& code, double tol) {
  const std::pair<Operator, double> seg{h, 0.0};
  return et_check(std::span(&seg, 1), code, tol);
}

double choose_frame_offset(const model::DeviceParams& params,
                           const model::PassShiftTable& table) {
  if (table.n_trc() < 4) throw InvalidArgument("shift table must cover n = 0..4");
  return (6.0 * params.kerr - (table.shifts[4] - table.shifts[0])) / 4.0;
}

const std::array<Fiducial, 6>& fiducials() {
  static const std::array<Fiducial, 6> states = [] {
    const double r = 1.0 / std::sqrt(2.0);
    return std::array<Fiducial, 6>{{
        {"+Z", Eigen::Vector2cd(1.0, 0.0), Eigen::Vector3d(0, 0, 1)},
        {"-Z", Eigen::Vector2cd(0.0, 1.0), Eigen::Vector3d(0, 0, -1)},
        {"+X", Eigen::Vector2cd(r, r), Eigen::Vector3d(1, 0, 0)},
        {"-X", Eigen::Vector2cd(r, -r), Eigen::Vector3d(-1, 0, 0)},
        {"+Y", Eigen::Vector2cd(r, Complex(0, r)), Eigen::Vector3d(0, 1, 0)},
        {"-Y", Eigen::Vector2cd(r, Complex(0, -r)), Eigen::Vector3d(0, -1, 0)},
    }};
  }();
  return states;
}

StateVector encode(const CodeSpace& code, const Eigen::Vector2cd& logical) {
  return StateVector::normalized(code.space, Subsystem::kCavity,
                                 code.code_basis() * logical);
}

}  // namespace etsim::code
