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


#include "etsim/experiments.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "etsim/errors.hpp"

namespace etsim::experiments {
namespace {

constexpr double kKhz = kTwoPi * 1e3;
constexpr double kMhz = kTwoPi * 1e6;
using qcore::HilbertSpace;

NoiseModel reference() { return {model::reference_noise(), {}}; }

NoiseModel quiet() {
  NoiseModel n;
  n.params.cavity_t1 = n.params.cavity_tphi = 1e9;
  n.params.qubit_t1 = n.params.qubit_tphi = 1e9;
  return n;
}

struct Fixture : ::testing::Test {
  HilbertSpace space{8};
  model::DeviceParams device = model::reference_device();
  code::CodeSpace code = code::binomial_code(space);
  GateModel gate(GateKind k) const { return gates::make_gate(k, space, device); }
};

TEST(ParallelFor, CoversEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(97);
  parallel_for(97, 4, [&](int i) { ++hits[i]; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(ParallelFor, RethrowsWorkerFailure) {
  EXPECT_THROW(parallel_for(10, 3,
                            [](int i) {
                              if (i == 7) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

using PassSweep = Fixture;

TEST_F(PassSweep, UndrivenRowIsKerrOnly) {
  const std::vector<double> rabi{0.0, 0.1 * device.chi};
  const auto rows = pass_sweep(device, -3.5 * device.chi, rabi);
  ASSERT_EQ(rows.size(), 10u);
  EXPECT_NEAR(rows[3].f_exact / kKhz, -14.4, 1e-9);
  EXPECT_DOUBLE_EQ(rows[3].f_exact, rows[3].f_perturbative);
}

TEST_F(PassSweep, ModelsDivergeWithAmplitude) {
  const std::vector<double> rabi{0.02 * device.chi, 0.2 * device.chi};
  const auto rows = pass_sweep(device, -3.5 * device.chi, rabi);
  const double small = std::abs(rows[3].f_exact - rows[3].f_perturbative);
  const double large = std::abs(rows[8].f_exact - rows[8].f_perturbative);
  EXPECT_GT(large, 50.0 * small);
}

TEST_F(PassSweep, ResonanceAborts) {
  const std::vector<double> rabi{0.1 * device.chi};
  EXPECT_THROW(pass_sweep(device, -3.0 * device.chi, rabi), PhysicsError);
}

using EtVerify = Fixture;

// Level spacings read straight off the dressed Hamiltonian.
RamseyPair diagonal_oracle(const GateModel& g) {
  const Matrix h = g.hamiltonian().matrix();
  auto e = [&](int n) { return h(qcore::composite_index(n, 0), qcore::composite_index(n, 0)).real(); };
  return {e(4) - e(2), e(3) - e(1)};
}

TEST_F(EtVerify, RamseyMatchesLevelSpacings) {
  for (GateKind k : {GateKind::kKerr, GateKind::kEtPhase, GateKind::kEtIdle}) {
    const auto g = gate(k);
    const auto r = ramsey_pair(g, 100e-6);
    const auto o = diagonal_oracle(g);
    EXPECT_NEAR(r.code_frequency, o.code_frequency, 1e-6 * kKhz) << gates::to_string(k);
    EXPECT_NEAR(r.error_frequency, o.error_frequency, 1e-6 * kKhz) << gates::to_string(k);
  }
}

TEST_F(EtVerify, RamseySynchronization) {
  const auto kerr = ramsey_pair(gate(GateKind::kKerr), 100e-6);
  EXPECT_NEAR((kerr.code_frequency - kerr.error_frequency) / kKhz, -10.0, 1.0);
  const auto et = ramsey_pair(gate(GateKind::kEtPhase), 100e-6);
  EXPECT_LT(std::abs(et.code_frequency - et.error_frequency), 0.3 * kKhz);
  const auto idle = ramsey_pair(gate(GateKind::kEtIdle), 100e-6);
  EXPECT_LT(std::abs(idle.code_frequency), 0.3 * kKhz);
  EXPECT_LT(std::abs(idle.error_frequency), 0.3 * kKhz);
}

TEST_F(EtVerify, PhaseGateReport) {
  std::vector<double> jumps;
  for (int i = 0; i < 10; ++i) jumps.push_back(9e-6 * i);
  const auto r = et_verify(gate(GateKind::kEtPhase), code, jumps, 90e-6);
  EXPECT_NEAR(r.blocks.k_prime() / kKhz, 3.33, 0.5);
  EXPECT_NEAR(r.blocks.c() / kKhz, -0.63, 0.15);
  EXPECT_TRUE(r.et.satisfied);
  EXPECT_LT(r.jump_overlap_deviation, 1e-3);
  EXPECT_NEAR(r.jump_phase_slope, r.blocks.c(), 0.05 * std::abs(r.blocks.c()));
  EXPECT_LT(std::abs(r.et_mismatch), 0.3 * kKhz);
  ASSERT_EQ(r.scales.size(), 1u);
}

TEST_F(EtVerify, KerrReportShowsJumpDependence) {
  const std::vector<double> jumps{0.0, 45e-6, 90e-6};
  const auto r = et_verify(gate(GateKind::kKerr), code, jumps, 90e-6);
  EXPECT_FALSE(r.et.satisfied);
  EXPECT_GT(r.jump_overlap_deviation, 0.05);
  EXPECT_NEAR(r.et_mismatch / kKhz, -9.6, 1e-6);
}

using WignerEvolution = Fixture;

TEST_F(WignerEvolution, BranchesAndPhases) {
  const std::vector<GateModel> gs{gate(GateKind::kKerr), gate(GateKind::kEtIdle)};
  const std::vector<double> times{0.0, 90e-6};
  tomography::WignerGrid grid;
  grid.nx = grid.ny = 9;
  const auto frames = wigner_evolution(gs, code, reference(), times, grid, 5e-10, 2);
  // t = 0 has no odd branch; t = 90 us has both.
  ASSERT_EQ(frames.size(), 6u);
  EXPECT_EQ(frames[0].branch, "even");
  EXPECT_NEAR(frames[0].probability, 1.0, 1e-12);
  EXPECT_NEAR(frames[0].purity, 1.0, 1e-9);
  EXPECT_NEAR(frames[0].logical_phase, -kTwoPi / 4, 1e-9);

  const Eigen::Vector2cd logical(1.0 / std::sqrt(2.0), Complex(0.0, -1.0 / std::sqrt(2.0)));
  const auto initial = qcore::DensityMatrix::from_pure(code::encode(code, logical));
  const auto expected = tomography::wigner(initial, grid);
  EXPECT_LT((frames[0].map.values - expected.values).cwiseAbs().maxCoeff(), 1e-12);

  EXPECT_EQ(frames[2].branch, "odd");
  EXPECT_NEAR(frames[1].probability + frames[2].probability, 1.0, 1e-9);
  EXPECT_LT(frames[2].purity, 0.7);  // R_Kerr error branch

  EXPECT_EQ(frames[3].gate, GateKind::kEtIdle);
  EXPECT_NEAR(frames[4].logical_phase, frames[3].logical_phase, 0.1);
  EXPECT_GT(frames[5].purity, frames[2].purity);
}

TEST_F(WignerEvolution, RejectsUnsortedTimes) {
  const std::vector<GateModel> gs{gate(GateKind::kKerr)};
  const std::vector<double> times{60e-6, 30e-6};
  EXPECT_THROW(wigner_evolution(gs, code, reference(), times, {}, 5e-10), InvalidArgument);
}

using GateFidelity = Fixture;

TEST_F(GateFidelity, ZeroDurationIsIdentity) {
  const std::vector<double> tg{0.0};
  const auto rows = gate_fidelity(gate(GateKind::kEtPhase), code, reference(), tg, {}, 5e-10);
  EXPECT_GE(rows[0].f_total, 0.999);
  EXPECT_NEAR(rows[0].p_no_error, 1.0, 1e-9);
  EXPECT_TRUE(std::isnan(rows[0].f_error));
}

TEST_F(GateFidelity, NoiselessEtGateIsPerfect) {
  const std::vector<double> tg{40e-6};
  const auto rows = gate_fidelity(gate(GateKind::kEtPhase), code, quiet(), tg, {}, 5e-10);
  EXPECT_NEAR(rows[0].f_total, 1.0, 1e-6);
}

TEST_F(GateFidelity, PhaseSlopeAndErrorSpace) {
  const std::vector<double> tg{20e-6, 40e-6, 60e-6};
  const auto et = gate_fidelity(gate(GateKind::kEtPhase), code, reference(), tg, {}, 5e-10, 3);
  const auto kerr = gate_fidelity(gate(GateKind::kKerr), code, reference(), tg, {}, 5e-10, 3);
  const double slope = (et[2].phase - et[0].phase) / (tg[2] - tg[0]);
  EXPECT_NEAR(std::abs(slope) / kKhz, 6.67, 0.05 * 6.67);
  EXPECT_NEAR(kerr[2].f_error, 0.4, 0.1);
  EXPECT_GE(et[2].f_error - kerr[2].f_error, 0.3);
  // Code-space fidelities are close for both gates.
  EXPECT_NEAR(et[2].f_code, kerr[2].f_code, 0.02);
}

TEST_F(GateFidelity, ImperfectModeFlagsAtZeroDuration) {
  AqecOptions opt;
  opt.mode = AqecMode::kImperfect;
  const std::vector<double> tg{0.0};
  const auto rows = gate_fidelity(gate(GateKind::kKerr), code, reference(), tg, opt, 5e-10);
  EXPECT_LT(rows[0].p_no_error, 0.99);
  EXPECT_GT(rows[0].p_no_error, 0.9);
}

TEST(AqecMode, Names) {
  EXPECT_EQ(parse_aqec_mode("ideal"), AqecMode::kIdeal);
  EXPECT_EQ(parse_aqec_mode(to_string(AqecMode::kImperfect)), AqecMode::kImperfect);
  EXPECT_THROW(parse_aqec_mode("perfect"), InvalidArgument);
}

using Repetitive = Fixture;

TEST_F(Repetitive, NoiselessEtGateKeepsFidelity) {
  const auto s = repetitive(gate(GateKind::kEtPhase), code, quiet(), 120e-6, 4, true, {}, 5e-10);
  ASSERT_EQ(s.fidelity.size(), 5u);
  for (double f : s.fidelity) EXPECT_NEAR(f, 1.0, 1e-6);
  EXPECT_TRUE(s.fit.degenerate);
}

TEST_F(Repetitive, FirstCycleMatchesSingleShot) {
  const auto g = gate(GateKind::kEtPhase);
  const auto s = repetitive(g, code, reference(), 60e-6, 3, true, {}, 5e-10);
  const std::vector<double> tg{60e-6};
  const auto once = gate_fidelity(g, code, reference(), tg, {}, 5e-10);
  EXPECT_NEAR(s.fidelity[1], once[0].f_total, 1e-9);
}

TEST_F(Repetitive, RecoveryBeatsNoRecovery) {
  const auto g = gate(GateKind::kEtPhase);
  const auto on = repetitive(g, code, reference(), 120e-6, 4, true, {}, 5e-10, 2);
  const auto off = repetitive(g, code, reference(), 120e-6, 4, false, {}, 5e-10, 2);
  for (std::size_t k = 3; k < on.fidelity.size(); ++k) EXPECT_GT(on.fidelity[k], off.fidelity[k]);
  EXPECT_GT(on.fit.lifetime, off.fit.lifetime);
}

TEST_F(Repetitive, IntervalMustExceedPulse) {
  AqecOptions opt;
  opt.mode = AqecMode::kImperfect;
  EXPECT_THROW(repetitive(gate(GateKind::kKerr), code, reference(), 1e-6, 4, true, opt, 5e-10),
               InvalidArgument);
}

using Excitation = Fixture;

// A closed two-level system driven from |g> spends on average
// 2 w^2 / (delta^2 + 4 w^2) in |e>.
TEST_F(Excitation, NoiselessMatchesTwoLevelAverage) {
  const std::vector<double> rabi{0.2 * kMhz};
  const std::vector<int> fock{2};
  const double dd = -2.5 * device.chi;
  const auto rows = excitation_sweep(device, quiet(), dd, rabi, fock, 20e-6, 5e-10, 2000);
  const double w = 0.1 * kMhz;
  const double delta = dd + 2 * device.chi;
  EXPECT_NEAR(rows[0].p_excited, 2 * w * w / (delta * delta + 4 * w * w), 2e-4);
  EXPECT_NEAR(rows[0].p_drive, rows[0].p_excited, 1e-12);
}

TEST_F(Excitation, ThermalFloorAndDriveContribution) {
  const std::vector<double> rabi{0.05 * kMhz, 0.1 * kMhz, 0.2 * kMhz};
  const std::vector<int> fock{3};
  const auto rows =
      excitation_sweep(device, reference(), -2.5 * device.chi, rabi, fock, 20e-6, 5e-10, 400);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_NEAR(rows[0].p_excited - rows[0].p_drive, model::reference_noise().n_th, 2e-3);
  EXPECT_LT(rows[0].p_excited, rows[1].p_excited);
  EXPECT_LT(rows[1].p_excited, rows[2].p_excited);
  EXPECT_NEAR(rows[1].p_drive, 0.01, 0.005);
}

TEST(Dephasing, MatchesPerturbativeRate) {
  const auto device = model::reference_device();
  const auto noise = model::reference_noise();
  const model::DriveSpec drive{0.1 * device.chi, -3.5 * device.chi};
  for (int n = 0; n <= 4; ++n) {
    const auto c = dephasing_check(device, noise, drive, n, 1000, 11, std::nullopt, 2);
    EXPECT_NEAR(c.simulated / c.predicted, 1.0, 0.25) << "n = " << n;
    EXPECT_GT(c.jumps, 200);
  }
}

TEST(Dephasing, DeterministicForSeed) {
  const auto device = model::reference_device();
  const auto noise = model::reference_noise();
  const model::DriveSpec drive{0.1 * device.chi, -3.5 * device.chi};
  const auto a = dephasing_check(device, noise, drive, 3, 200, 5, std::nullopt, 1);
  const auto b = dephasing_check(device, noise, drive, 3, 200, 5, std::nullopt, 3);
  EXPECT_EQ(a.jumps, b.jumps);
  EXPECT_EQ(a.simulated, b.simulated);
}

}  // namespace
}  // namespace etsim::experiments
