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

#include <cmath>

#include <gtest/gtest.h>

#include "etsim/errors.hpp"

namespace etsim::code {
namespace {

constexpr double kKhz = kTwoPi * 1e3;
using model::DeviceParams;

// Diagonal cavity Hamiltonian from explicit level energies.
Operator diagonal_cavity(const HilbertSpace& s, const std::vector<double>& e) {
  Matrix m = Matrix::Zero(s.cavity_dim, s.cavity_dim);
  for (int n = 0; n < s.cavity_dim; ++n) m(n, n) = e[n];
  return Operator(s, qcore::Subsystem::kCavity, m);
}

std::vector<double> kerr_levels(const DeviceParams& p, double dw, int nc) {
  std::vector<double> e(nc);
  for (int n = 0; n < nc; ++n) e[n] = dw * n - 0.5 * p.kerr * n * (n - 1);
  return e;
}

TEST(BinomialCode, Words) {
  const HilbertSpace s{8};
  const auto c = binomial_code(s);
  EXPECT_NEAR(c.zero_l.amplitudes()(0).real(), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(c.zero_l.amplitudes()(4).real(), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(c.one_l.amplitudes()(2).real(), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(c.zero_e.amplitudes()(3)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(c.one_e.amplitudes()(1)), 1.0, 1e-15);
  ASSERT_EQ(c.alpha.size(), 1u);
  EXPECT_NEAR(c.alpha[0], 2.0, 1e-14);
  // P_a maps the words onto the normalized error words.
  const Vector img = c.p_error[0].matrix() * c.zero_l.amplitudes();
  EXPECT_NEAR((img - c.zero_e.amplitudes()).norm(), 0.0, 1e-14);
  EXPECT_THROW(binomial_code(HilbertSpace{5}), InvalidArgument);
}

TEST(BinomialCode, ProjectorsOrthogonal) {
  const HilbertSpace s{8};
  const auto c = binomial_code(s);
  const Matrix pc = c.p_code.matrix();
  EXPECT_LT(qcore::max_abs(pc * pc - pc), 1e-15);
  EXPECT_LT(qcore::max_abs(pc * c.p_error_space().matrix()), 1e-15);
}

TEST(KnillLaflamme, SinglePhotonLossCorrectable) {
  const HilbertSpace s{8};
  const auto c = binomial_code(s);
  const std::vector<Operator> errs{qcore::identity(s, qcore::Subsystem::kCavity),
                                   qcore::destroy_cavity(s)};
  const auto r = kl_check(c, errs);
  EXPECT_LT(r.violation, 1e-12);
  EXPECT_NEAR(r.alpha[1], 2.0, 1e-12);
}

TEST(KnillLaflamme, TwoPhotonLossFails) {
  const HilbertSpace s{8};
  const auto c = binomial_code(s);
  const Operator a = qcore::destroy_cavity(s);
  const std::vector<Operator> errs{a * a};
  const auto r = kl_check(c, errs);
  // <0L|a^dag2 a^2|0L> = 6, <1L|a^dag2 a^2|1L> = 2.
  EXPECT_NEAR(r.violation, 4.0, 1e-12);
  EXPECT_GE(r.violation, 0.5);
}

TEST(KnillLaflamme, ArbitraryWords) {
  const HilbertSpace s{8};
  Matrix w = Matrix::Zero(8, 2);
  w(0, 0) = 1.0;
  w(1, 1) = 1.0;  // |0>, |1> does not correct loss
  const std::vector<Operator> errs{qcore::destroy_cavity(s)};
  EXPECT_NEAR(kl_check(w, errs).violation, 1.0, 1e-14);
}

TEST(LogicalBlocks, KerrOnly) {
  const HilbertSpace s{8};
  const auto c = binomial_code(s);
  const DeviceParams p = model::reference_device();
  const double dw = 1.5 * p.kerr;  // keeps |0> and |4> in phase
  const auto lb = logical_blocks(diagonal_cavity(s, kerr_levels(p, dw, 8)), c);
  EXPECT_NEAR(lb.k_prime(), p.kerr, 1e-9);
  EXPECT_NEAR(lb.c(), 0.5 * p.kerr, 1e-9);
  EXPECT_LT(lb.residual, 1e-9);
}

TEST(LogicalBlocks, WrongFrameLeaks) {
  const HilbertSpace s{8};
  const auto c = binomial_code(s);
  const DeviceParams p = model::reference_device();
  const auto lb = logical_blocks(diagonal_cavity(s, kerr_levels(p, 0.0, 8)), c);
  // H|0_L> leaves the code along (|0> - |4>) / sqrt(2); each entry of that
  // component is |E4 - E0| / (2 sqrt(2)) = 3K / sqrt(2).
  EXPECT_NEAR(lb.residual, 3.0 * p.kerr / std::sqrt(2.0), 1e-9);
}

TEST(LogicalBlocks, RandomHermitianDecomposition) {
  const HilbertSpace s{8};
  const auto c = binomial_code(s);
  Matrix h = Matrix::Random(8, 8);
  h = (h + h.adjoint()).eval();
  const auto lb = logical_blocks(Operator(s, qcore::Subsystem::kCavity, h), c);
  const Eigen::Matrix2cd rebuilt =
      Complex(lb.code.identity_coeff) * Eigen::Matrix2cd::Identity() +
      Complex(lb.code.z_coeff) * Eigen::Vector2cd(1, -1).asDiagonal().toDenseMatrix();
  EXPECT_NEAR(std::abs(rebuilt(0, 0) - lb.code.block(0, 0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(rebuilt(1, 1) - lb.code.block(1, 1)), 0.0, 1e-12);
  EXPECT_NEAR(lb.code.off_diagonal, std::abs(lb.code.block(0, 1)), 1e-15);
  EXPECT_THROW(logical_blocks(Operator(s, qcore::Subsystem::kCavity, Matrix::Random(8, 8)), c),
               InvalidArgument);
}

TEST(EtCheck, KerrOnlyViolatesByK) {
  const HilbertSpace s{8};
  const auto c = binomial_code(s);
  const DeviceParams p = model::reference_device();
  const auto r = et_check(diagonal_cavity(s, kerr_levels(p, 1.5 * p.kerr, 8)), c);
  EXPECT_FALSE(r.satisfied);
  EXPECT_NEAR(r.worst_violation, p.kerr, 1e-9);
}

TEST(EtCheck, ErrorSpaceCopyOfCodeSpace) {
  // E3 - E0 = E1 - E2 = c and E4 = E0: error-transparent by construction.
  const HilbertSpace s{8};
  const auto code = binomial_code(s);
  const double c = 0.3, e0 = 0.1, e2 = 1.7;
  const auto r =
      et_check(diagonal_cavity(s, {e0, e2 + c, e2, e0 + c, e0, 5.0, 9.0, 2.0}), code, 1e-9);
  EXPECT_TRUE(r.satisfied);
  ASSERT_EQ(r.c_of_t.size(), 1u);
  EXPECT_NEAR(r.c_of_t[0], c, 1e-14);
  EXPECT_NEAR(r.commutator_violation, c, 1e-14);
  EXPECT_FALSE(r.commutator_satisfied);
}

TEST(EtCheck, CommutingHamiltonianSatisfiesBoth) {
  const HilbertSpace s{8};
  const auto code = binomial_code(s);
  const auto r = et_check(qcore::identity(s, qcore::Subsystem::kCavity), code, 1e-12);
  EXPECT_TRUE(r.satisfied);
  EXPECT_TRUE(r.commutator_satisfied);
}

TEST(EtCheck, SegmentsReportPerSegmentC) {
  const HilbertSpace s{8};
  const auto code = binomial_code(s);
  std::vector<std::pair<Operator, double>> segs;
  for (double c : {0.1, 0.2, 0.3}) {
    segs.emplace_back(diagonal_cavity(s, {0.0, 1.0 + c, 1.0, c, 0.0, 0, 0, 0}), 1.0);
  }
  const auto r = et_check(segs, code, 1e-9);
  ASSERT_EQ(r.c_of_t.size(), 3u);
  EXPECT_NEAR(r.c_of_t[2], 0.3, 1e-14);
  EXPECT_TRUE(r.satisfied);
}

TEST(FrameOffset, KerrOnly) {
  const DeviceParams p = model::reference_device();
  const auto t = model::pass_shift_table(p, {});
  EXPECT_NEAR(choose_frame_offset(p, t), 1.5 * p.kerr, 1e-9);
}

TEST(GroundManifold, DrivenHamiltonianReducesToDressedLevels) {
  const HilbertSpace s{8};
  const DeviceParams p = model::reference_device();
  const auto drives = model::reference_phase_drives();
  const auto h = model::build_driven_h(s, p, drives);
  const Matrix g = ground_manifold(h.static_part()).matrix();
  for (int n = 0; n < 8; ++n) {
    const double expected = -0.5 * p.kerr * n * (n - 1) +
                            model::dressed_shift(drives[0].omega, drives[0].delta_d + n * p.chi);
    EXPECT_NEAR(g(n, n).real(), expected, 1e-6 * p.kerr) << n;
  }
}

// Calibrated single-drive ET phase gate, reduced from the full driven H.
TEST(PhaseGate, LogicalBlocksMatchReported) {
  const HilbertSpace s{8};
  DeviceParams p = model::reference_device();
  const auto cal = model::calibrate_drives(p, model::reference_phase_drives());
  p.frame_offset = choose_frame_offset(p, model::pass_shift_table(p, cal.drives));
  EXPECT_NEAR(p.frame_offset / kKhz, 6.09, 0.609);
  const auto h = model::build_driven_h(s, p, cal.drives);
  const auto code = binomial_code(s);
  const auto lb = logical_blocks(h.static_part(), code);
  EXPECT_NEAR(lb.k_prime() / kKhz, 3.33, 0.15 * 3.33);
  EXPECT_NEAR(lb.c() / kKhz, -0.63, 0.15);
  EXPECT_LT(lb.residual, 1e-6 * kKhz);
  const auto et = et_check(h.static_part(), code);
  EXPECT_TRUE(et.satisfied);
  EXPECT_NEAR(et.c_of_t[0], lb.c(), 1e-6 * kKhz);
}

TEST(Fiducials, BlochVectors) {
  const auto& f = fiducials();
  for (const auto& st : f) {
    const Eigen::Vector2cd v = st.logical;
    const Complex x = 2.0 * std::conj(v(0)) * v(1);
    const Eigen::Vector3d bloch(x.real(), x.imag(), std::norm(v(0)) - std::norm(v(1)));
    EXPECT_LT((bloch - st.bloch).norm(), 1e-14) << st.label;
  }
}

}  // namespace
}  // namespace etsim::code
