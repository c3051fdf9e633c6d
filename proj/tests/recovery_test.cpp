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

#include "etsim/recovery.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "etsim/errors.hpp"

namespace etsim::recovery {
namespace {

using qcore::StateVector;
using qcore::Subsystem;

Vector composite(const Vector& cavity, int q) {
  return qcore::product_state(StateVector::normalized(HilbertSpace{static_cast<int>(cavity.size())},
                                                      Subsystem::kCavity, cavity),
                              q)
      .amplitudes();
}

double fidelity(const Matrix& rho, const Vector& psi) { return psi.dot(rho * psi).real(); }

TEST(IdealAqec, UnitaryAndCodeIdentity) {
  const HilbertSpace s{8};
  const auto code = code::binomial_code(s);
  const Matrix u = ideal_aqec_unitary(code, 0.0, 0.0).matrix();
  EXPECT_LT(qcore::unitarity_error(u), 1e-9);
  for (const auto& f : code::fiducials()) {
    const Vector psi = composite(code::encode(code, f.logical).amplitudes(), 0);
    EXPECT_NEAR(std::abs(psi.dot(u * psi)), 1.0, 1e-12) << f.label;
  }
}

TEST(IdealAqec, RecoversSingleLoss) {
  const HilbertSpace s{8};
  const auto code = code::binomial_code(s);
  const Matrix u = ideal_aqec_unitary(code, 0.0, 0.0).matrix();
  const Matrix& a = code.errors[0].matrix();
  for (const auto& f : code::fiducials()) {
    const Vector psi_l = code::encode(code, f.logical).amplitudes();
    const Vector in = composite((a * psi_l).normalized(), 0);
    const Vector want = composite(psi_l, 1);
    EXPECT_GT(std::norm(want.dot(u * in)), 1.0 - 1e-10) << f.label;
  }
}

TEST(IdealAqec, NoJumpCorrection) {
  const HilbertSpace s{8};
  const auto code = code::binomial_code(s);
  const double kappa = 1.0 / 480e-6, t = 120e-6;
  const Matrix u = ideal_aqec_unitary(code, kappa, t).matrix();
  const Matrix nj = dynamics::no_jump_map(s, kappa, t).matrix();
  const Vector distorted = composite((nj * code.zero_l.amplitudes()).normalized(), 0);
  const Vector want = composite(code.zero_l.amplitudes(), 0);
  EXPECT_NEAR(std::abs(want.dot(u * distorted)), 1.0, 1e-12);
  // Zero elapsed time gives no correction.
  EXPECT_LT(qcore::max_abs(ideal_aqec_unitary(code, kappa, 0.0).matrix() -
                           ideal_aqec_unitary(code, 0.0, 0.0).matrix()),
            1e-15);
}

TEST(CompleteUnitary, RejectsNonOrthonormal) {
  Matrix d = Matrix::Zero(4, 2);
  d(0, 0) = 1.0;
  d(0, 1) = 1.0;
  EXPECT_THROW(complete_unitary(d, d), InvalidArgument);
}

TEST(AqecCycle, NoiselessCodeStateUnchanged) {
  const HilbertSpace s{8};
  const auto code = code::binomial_code(s);
  const AqecSettings set{ideal_aqec_unitary(code, 0.0, 0.0), 0.0, 0.0, std::nullopt};
  const Vector psi = composite(code::encode(code, code::fiducials()[4].logical).amplitudes(), 0);
  const auto rho = qcore::DensityMatrix::from_pure(
      StateVector(s, Subsystem::kComposite, psi));
  const auto out = aqec_cycle(rho, set);
  EXPECT_NEAR(out.p_error_flag, 0.0, 1e-14);
  EXPECT_LT(qcore::max_abs(out.state.matrix() - rho.matrix()), 1e-12);
  EXPECT_FALSE(out.error_branch.has_value());
}

TEST(AqecCycle, NoiselessLossRecovered) {
  const HilbertSpace s{8};
  const auto code = code::binomial_code(s);
  const AqecSettings set{ideal_aqec_unitary(code, 0.0, 0.0), 0.0, 0.0, std::nullopt};
  const Matrix& a = code.errors[0].matrix();
  for (const auto& f : code::fiducials()) {
    const Vector psi_l = code::encode(code, f.logical).amplitudes();
    const auto rho = qcore::DensityMatrix::from_pure(
        StateVector(s, Subsystem::kComposite, composite((a * psi_l).normalized(), 0)));
    const auto out = aqec_cycle(rho, set);
    EXPECT_NEAR(out.p_error_flag, 1.0, 1e-12);
    EXPECT_NEAR(out.state.trace(), 1.0, 1e-12);
    EXPECT_GE(fidelity(out.state.matrix(), composite(psi_l, 0)), 0.999);
    ASSERT_TRUE(out.error_branch.has_value());
  }
}

TEST(AqecCycle, ImperfectionsRaiseFlagProbability) {
  const HilbertSpace s{8};
  const auto code = code::binomial_code(s);
  const auto noise = model::reference_noise();
  // Thermal ancilla at the start of the cycle.
  const Vector g = composite(code.zero_l.amplitudes(), 0);
  const Vector e = composite(code.zero_l.amplitudes(), 1);
  const Matrix rho =
      (1.0 - noise.n_th) * g * g.adjoint() + noise.n_th * e * e.adjoint();
  const auto out = aqec_cycle(qcore::DensityMatrix(s, Subsystem::kComposite, rho), code, noise, 0.0);
  EXPECT_GT(out.p_error_flag, noise.readout_flip);
  EXPECT_LT(out.p_error_flag, 0.05);
  EXPECT_NEAR(out.state.trace(), 1.0, 1e-12);
  const double p_e = (out.state.matrix().diagonal().array().real()(Eigen::seq(1, 15, 2))).sum();
  EXPECT_NEAR(p_e, noise.reset_fail, 1e-12);
}

TEST(AqecCycle, RecoveryIndependentOfJumpTimeUnderEt) {
  const HilbertSpace s{8};
  auto p = model::reference_device();
  const auto cal = model::calibrate_drives(p, model::reference_phase_drives());
  p.frame_offset = code::choose_frame_offset(p, model::pass_shift_table(p, cal.drives));
  const Operator h = code::ground_manifold(model::build_driven_h(s, p, cal.drives).static_part());
  const auto code = code::binomial_code(s);
  const AqecSettings set{ideal_aqec_unitary(code, 0.0, 0.0), 0.0, 0.0, std::nullopt};
  const double t_total = 60e-6;
  const Vector psi = code::encode(code, code::fiducials()[2].logical).amplitudes();
  const Matrix& a = code.errors[0].matrix();
  const Vector ideal = composite(qcore::expm_hermitian(h.matrix(), t_total) * psi, 0);
  std::vector<double> fids;
  for (double t : {0.0, 10e-6, 25e-6, 47e-6, 60e-6}) {
    const Vector jumped = qcore::expm_hermitian(h.matrix(), t_total - t) *
                          (a * (qcore::expm_hermitian(h.matrix(), t) * psi));
    const auto rho = qcore::DensityMatrix::from_pure(
        StateVector(s, Subsystem::kComposite, composite(jumped.normalized(), 0)));
    fids.push_back(fidelity(aqec_cycle(rho, set).state.matrix(), ideal));
  }
  for (double f : fids) EXPECT_NEAR(f, fids.front(), 1e-3);
}

TEST(Schedule, SingleCycleIsComposition) {
  const HilbertSpace s{6};
  const auto code = code::binomial_code(s);
  const auto noise = model::reference_noise();
  const auto collapses = dynamics::standard_collapses(s, noise);
  auto p = model::reference_device();
  p.frame_offset = 1.5 * p.kerr;
  const Operator h = model::build_h0(s, p);
  const auto gate = dynamics::lindblad_channel(h, collapses, 20e-6, 5e-10);
  const AqecSettings set{ideal_aqec_unitary(code, noise.kappa_a(), 20e-6), 0.01, 0.01,
                         std::nullopt};
  const auto rho0 = qcore::DensityMatrix::from_pure(
      qcore::product_state(code::encode(code, code::fiducials()[2].logical), 0));
  const auto rec = repetitive_schedule(rho0, gate, set, 2);
  ASSERT_EQ(rec.size(), 2u);
  const auto direct = aqec_cycle(gate.apply(rho0), set);
  EXPECT_LT(qcore::max_abs(rec[0].state.matrix() - direct.state.matrix()), 1e-14);
  EXPECT_DOUBLE_EQ(rec[0].p_error_flag, direct.p_error_flag);
}

TEST(Schedule, ZeroNoiseEtGateKeepsFidelity) {
  const HilbertSpace s{8};
  const auto code = code::binomial_code(s);
  auto p = model::reference_device();
  const auto cal = model::calibrate_drives(p, model::reference_phase_drives());
  p.frame_offset = code::choose_frame_offset(p, model::pass_shift_table(p, cal.drives));
  const Operator h = model::build_driven_h(s, p, cal.drives).static_part();
  const auto gate = Channel::unitary(qcore::expm(h, 0.0));
  const AqecSettings set{ideal_aqec_unitary(code, 0.0, 0.0), 0.0, 0.0, std::nullopt};
  const auto rho0 = qcore::DensityMatrix::from_pure(
      qcore::product_state(code::encode(code, code::fiducials()[4].logical), 0));
  for (const auto& r : repetitive_schedule(rho0, gate, set, 5)) {
    EXPECT_NEAR(fidelity(r.state.matrix(),
                         composite(code::encode(code, code::fiducials()[4].logical).amplitudes(), 0)),
                1.0, 1e-12);
  }
}

GrapeProblem random_problem(unsigned seed) {
  std::srand(seed);
  const int d = 8;
  Matrix drift = Matrix::Random(d, d);
  drift = (0.5 * (drift + drift.adjoint())).eval();
  Matrix target = Matrix::Random(d, d);
  target = Eigen::HouseholderQR<Matrix>(target).householderQ();
  GrapeProblem p{HilbertSpace{6},
                 drift,
                 {{"c0", Matrix::Random(d, d)}, {"c1", Matrix::Random(d, d)}},
                 {HilbertSpace{6}, Matrix::Identity(d, 3), target.leftCols(3)},
                 24,
                 2.0,
                 0.7};
  return p;
}

TEST(Grape, GradientMatchesFiniteDifferences) {
  const GrapeProblem p = random_problem(17);
  Eigen::VectorXd x = Eigen::VectorXd::Random(p.parameter_count()) * 0.5;
  Eigen::VectorXd grad;
  grape_fidelity(p, x, &grad);
  const double h = 1e-6;
  double worst = 0.0;
  const double scale = grad.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    const double fd = (grape_fidelity(p, xp) - grape_fidelity(p, xm)) / (2 * h);
    if (std::abs(fd) < 1e-3 * scale) continue;
    worst = std::max(worst, std::abs(grad(i) - fd) / std::abs(fd));
  }
  EXPECT_LT(worst, 1e-5);
}

TEST(Grape, IdentityTargetConvergedAtStart) {
  GrapeProblem p = random_problem(3);
  p.drift.setZero();
  p.target.image = p.target.domain;
  GrapeOptions o;
  o.initial = Eigen::VectorXd::Zero(p.parameter_count());
  const auto r = grape_optimize(p, o);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_NEAR(r.fidelity_history.front(), 1.0, 1e-14);
  EXPECT_TRUE(r.converged);
}

TEST(Grape, ValidatesProblem) {
  GrapeProblem p = random_problem(3);
  p.segments = 10;
  EXPECT_THROW(grape_optimize(p, {}), InvalidArgument);
  p.segments = 24;
  p.amplitude_bound = 0.0;
  EXPECT_THROW(grape_optimize(p, {}), InvalidArgument);
}

TEST(Grape, AqecPulseDeskProblem) {
  const HilbertSpace s{6};
  const auto code = code::binomial_code(s);
  const auto p = aqec_grape_problem(code, model::reference_device(), 1.5e-6, 75, kTwoPi * 3e6);
  GrapeOptions o;
  o.seed = 7;
  o.max_iter = 1500;
  const auto r = grape_optimize(p, o);
  EXPECT_GE(r.fidelity, 0.99);
  for (std::size_t k = 1; k < r.fidelity_history.size(); ++k) {
    EXPECT_GE(r.fidelity_history[k], r.fidelity_history[k - 1]);
  }
  // Bound respected and the pulse reproduces the reported fidelity.
  for (const auto& row : r.pulse.amplitudes) {
    for (const auto& u : row) {
      EXPECT_LE(std::abs(u.real()), p.amplitude_bound * (1 + 1e-12));
      EXPECT_LE(std::abs(u.imag()), p.amplitude_bound * (1 + 1e-12));
    }
  }
  EXPECT_NEAR(r.pulse.total_duration(), 1.5e-6, 1e-18);
  const Matrix u = pulse_unitary(p, r.pulse);
  const double phi = std::norm((p.target.image.adjoint() * u * p.target.domain).trace()) / 16.0;
  EXPECT_NEAR(phi, r.fidelity, 1e-10);
}

TEST(ControlPulse, CsvRoundTrip) {
  const GrapeProblem p = random_problem(5);
  const auto pulse = pulse_from_parameters(p, Eigen::VectorXd::Random(p.parameter_count()));
  std::stringstream ss;
  pulse.write_csv(ss);
  const auto back = ControlPulse::read_csv(ss);
  EXPECT_EQ(back.channels, pulse.channels);
  EXPECT_DOUBLE_EQ(back.segment_duration, pulse.segment_duration);
  ASSERT_EQ(back.amplitudes.size(), pulse.amplitudes.size());
  for (std::size_t k = 0; k < back.amplitudes.size(); ++k) {
    for (std::size_t j = 0; j < back.channels.size(); ++j) {
      EXPECT_EQ(back.amplitudes[k][j], pulse.amplitudes[k][j]);
    }
  }
  std::stringstream bad("nope\n");
  EXPECT_THROW(ControlPulse::read_csv(bad), InvalidArgument);
}

}  // namespace
}  // namespace etsim::recovery
