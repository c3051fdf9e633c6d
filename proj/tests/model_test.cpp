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

#include "etsim/model.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "etsim/errors.hpp"
#include "etsim/log.hpp"

namespace etsim::model {
namespace {

constexpr double kKhz = kTwoPi * 1e3;

// Ground-branch eigenvalue of [[0, w], [w, -d]] picked by overlap with |g>.
double two_level_oracle(double w, double d) {
  Eigen::Matrix2d h;
  h << 0.0, w, w, -d;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(h);
  const int k = std::abs(eig.eigenvectors()(0, 0)) > std::abs(eig.eigenvectors()(0, 1)) ? 0 : 1;
  return eig.eigenvalues()(k);
}

TEST(DeviceParams, Validation) {
  DeviceParams p = reference_device();
  EXPECT_NO_THROW(p.validate());
  p.chi = 0.0;
  EXPECT_THROW(p.validate(), PhysicsError);
  p = reference_device();
  p.kerr = -1.0;
  EXPECT_THROW(p.validate(), PhysicsError);
}

TEST(DeviceParams, KerrConsistencyOnlyWarns) {
  std::vector<std::string> warnings;
  set_log_sink([&](LogLevel level, std::string_view msg) {
    if (level == LogLevel::kWarning) warnings.emplace_back(msg);
  });
  DeviceParams p = reference_device();
  p.kerr = p.chi * p.chi / (4.0 * p.anharmonicity);
  p.validate();
  EXPECT_TRUE(warnings.empty());
  p.kerr *= 1.5;
  p.validate();
  EXPECT_EQ(warnings.size(), 1u);
  set_log_sink(nullptr);
}

TEST(NoiseParams, Validation) {
  NoiseParams n = reference_noise();
  EXPECT_NO_THROW(n.validate());
  EXPECT_NEAR(n.kappa_a(), 1.0 / 480e-6, 1e-9);
  n.n_th = 1.0;
  EXPECT_THROW(n.validate(), PhysicsError);
  n = reference_noise();
  n.qubit_t1 = 0.0;
  EXPECT_THROW(n.validate(), PhysicsError);
}

TEST(H0, DiagonalEntries) {
  const qcore::HilbertSpace s{8};
  DeviceParams p = reference_device();
  p.frame_offset = kTwoPi * 6e3;
  p.omega_q = kTwoPi * 1e5;
  const Matrix h = build_h0(s, p).matrix();
  EXPECT_LT(qcore::max_abs(h - Matrix(h.diagonal().asDiagonal())), 1e-30);
  for (int n = 0; n < 8; ++n) {
    const double cav = p.frame_offset * n - p.kerr * n * (n - 1) / 2.0;
    EXPECT_DOUBLE_EQ(h(2 * n, 2 * n).real(), cav);
    EXPECT_NEAR(h(2 * n + 1, 2 * n + 1).real(), cav - p.chi * n + p.omega_q, 1e-6);
  }
}

TEST(DressedShift, MatchesTwoLevelDiagonalization) {
  for (double d : {-3.0, -0.7, 0.4, 2.5, 11.0}) {
    for (double w : {1e-4, 0.05, 0.2, 0.9}) {
      EXPECT_NEAR(dressed_shift(w, d), two_level_oracle(w, d), 1e-13) << w << " " << d;
    }
  }
  EXPECT_THROW(dressed_shift(0.1, 0.0), PhysicsError);
}

TEST(DressedShift, PerturbativeLimit) {
  const double d = 5.0;
  for (double w : {1e-3, 1e-2}) {
    EXPECT_NEAR(dressed_shift(w, d) / (w * w / d), 1.0, 2.0 * w * w / (d * d) + 1e-12);
  }
}

TEST(DressedShift, ExcitedAmplitude) {
  const double w = 0.1, d = -2.0;
  Eigen::Matrix2d h;
  h << 0.0, w, w, -d;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(h);
  const int k = std::abs(eig.eigenvectors()(0, 0)) > 0.9 ? 0 : 1;
  const Eigen::Vector2d v = eig.eigenvectors().col(k) * (eig.eigenvectors()(0, k) > 0 ? 1 : -1);
  EXPECT_NEAR(dressed_excited_amplitude(w, d), v(1), 1e-14);
  EXPECT_EQ(dressed_excited_amplitude(0.0, d), 0.0);
}

TEST(CheckDrives, RejectsInvalidDrives) {
  const DeviceParams p = reference_device();
  const std::vector<DriveSpec> resonant{{0.05 * p.chi, -2.02 * p.chi}};
  EXPECT_THROW(check_drives(p, resonant), PhysicsError);
  const std::vector<DriveSpec> strong{{0.3 * p.chi, -10.0 * p.chi}};
  EXPECT_THROW(check_drives(p, strong), PhysicsError);
  const std::vector<DriveSpec> three(3, DriveSpec{0.01 * p.chi, -2.5 * p.chi});
  EXPECT_THROW(check_drives(p, three), PhysicsError);
  EXPECT_NO_THROW(check_drives(p, reference_phase_drives()));
}

TEST(DrivenHamiltonian, StaticDriveFrame) {
  const qcore::HilbertSpace s{6};
  const DeviceParams p = reference_device();
  const auto drives = reference_phase_drives();
  const auto h = build_driven_h(s, p, drives);
  ASSERT_TRUE(h.is_static());
  const Matrix& m = h.static_part().matrix();
  EXPECT_TRUE(h.static_part().is_hermitian());
  // |n,e> sits at -delta_n in the drive frame.
  for (int n = 0; n < 6; ++n) {
    const double cav = -p.kerr * n * (n - 1) / 2.0;
    EXPECT_NEAR(m(2 * n + 1, 2 * n + 1).real() - cav, -fock_detuning(p, drives[0], n), 1e-6);
    EXPECT_DOUBLE_EQ(m(2 * n + 1, 2 * n).real(), drives[0].omega);
  }
}

TEST(DrivenHamiltonian, TwoDrivesRotate) {
  const qcore::HilbertSpace s{6};
  const DeviceParams p = reference_device();
  const auto drives = reference_idle_drives();
  const auto h = build_driven_h(s, p, drives);
  ASSERT_EQ(h.rotating_terms().size(), 1u);
  const double dw = drives[1].delta_d - drives[0].delta_d;
  const double t = 0.37 / p.chi;
  const Matrix m = h.at(t).matrix();
  const Complex expected = drives[0].omega + drives[1].omega * std::exp(-kI * dw * t);
  EXPECT_NEAR(std::abs(m(1, 0) - expected), 0.0, 1e-6);
  EXPECT_TRUE(h.at(t).is_hermitian(1e-6));
  const auto segs = h.segments(0.0, 1e-6, 1e-8);
  EXPECT_EQ(segs.size(), 100u);
  double total = 0;
  for (const auto& [op, len] : segs) total += len;
  EXPECT_NEAR(total, 1e-6, 1e-18);
}

TEST(ShiftTable, NumericOracleAgreesWithinTwoPercent) {
  const DeviceParams p = reference_device();
  for (double frac : {0.02, 0.05, 0.1}) {
    for (double det : {-3.41, -2.5, -2.27, 5.5}) {
      const std::vector<DriveSpec> d{{frac * p.chi, det * p.chi}};
      try {
        check_drives(p, d);
      } catch (const PhysicsError&) {
        continue;  // too close to a transition for this amplitude
      }
      const auto exact = pass_shift_table(p, d, 4, ShiftMethod::kExactDressed);
      const auto oracle = pass_shift_table(p, d, 4, ShiftMethod::kNumericOracle, 10);
      for (int n = 0; n <= 4; ++n) {
        EXPECT_NEAR(exact.shifts[n] / oracle.shifts[n], 1.0, 0.02)
            << frac << " " << det << " n=" << n;
      }
    }
  }
}

TEST(ShiftTable, AdditiveOverDrives) {
  const DeviceParams p = reference_device();
  const auto both = reference_idle_drives();
  const auto t2 = pass_shift_table(p, both);
  const auto a = pass_shift_table(p, std::span(both).first(1));
  const auto b = pass_shift_table(p, std::span(both).last(1));
  for (int n = 0; n <= 4; ++n) EXPECT_NEAR(t2.shifts[n], a.shifts[n] + b.shifts[n], 1e-9);
}

TEST(ShiftTable, PerturbativeForm) {
  const DeviceParams p = reference_device();
  const auto d = reference_phase_drives();
  const auto t = pass_shift_table(p, d, 4, ShiftMethod::kPerturbative);
  for (int n = 0; n <= 4; ++n) {
    const double delta = d[0].delta_d + n * p.chi;
    EXPECT_NEAR(t.shifts[n], d[0].omega * d[0].omega / delta, 1e-9);
  }
}

TEST(FockFrequencies, KerrOnlyMismatch) {
  const DeviceParams p = reference_device();
  const auto t = pass_shift_table(p, {});
  const auto f = fock_frequencies(p, t, 0.0);
  // f_n = -K n (n-1) / 2 gives (f4 - f2) - (f3 - f1) = -2K.
  EXPECT_NEAR(et_mismatch(f), -2.0 * p.kerr, 1e-9);
  EXPECT_NEAR(et_mismatch(f) / kKhz, -10.0, 1.0);
  EXPECT_NEAR(idle_mismatch(f), -2.0 * p.kerr, 1e-9);
}

TEST(Calibration, PhaseGateSatisfiesEt) {
  const DeviceParams p = reference_device();
  const auto cal = calibrate_drives(p, reference_phase_drives());
  const auto f = fock_frequencies(p, pass_shift_table(p, cal.drives), 0.0);
  EXPECT_LT(std::abs(et_mismatch(f)), 1e-6 * kKhz);
  // Read as Rabi frequencies the quoted amplitudes need almost no rescaling.
  EXPECT_NEAR(cal.scales[0], 1.0, 0.01);
  // Reported Fock shifts of the ET phase gate, within 0.5 kHz.
  const double reported[] = {-0.10, -5.52, -18.90, -24.37};
  for (int n = 1; n <= 4; ++n) EXPECT_NEAR(f[n] / kKhz, reported[n - 1], 0.5) << n;
}

TEST(Calibration, IdleGateSatisfiesBoth) {
  const DeviceParams p = reference_device();
  const auto cal = calibrate_drives(p, reference_idle_drives());
  const auto f = fock_frequencies(p, pass_shift_table(p, cal.drives), 0.0);
  EXPECT_LT(std::abs(et_mismatch(f)), 1e-6 * kKhz);
  EXPECT_LT(std::abs(idle_mismatch(f)), 1e-6 * kKhz);
  for (double s : cal.scales) EXPECT_NEAR(s, 1.0, 0.03);
  const double reported[] = {-0.88, -12.16, -13.05, -24.34};
  for (int n = 1; n <= 4; ++n) EXPECT_NEAR(f[n] / kKhz, reported[n - 1], 0.5) << n;
}

TEST(Drives, RabiConvention) {
  const DriveSpec d = from_rabi(2.0, -3.0);
  EXPECT_DOUBLE_EQ(d.omega, 1.0);
  EXPECT_DOUBLE_EQ(d.delta_d, -3.0);
}

TEST(InducedDephasing, Formula) {
  const NoiseParams n = reference_noise();
  EXPECT_NEAR(induced_dephasing(n, 2.0, 4.0), 0.25 / n.qubit_t1, 1e-12);
  EXPECT_THROW(induced_dephasing(n, 1.0, 0.0), PhysicsError);
}

TEST(Feasibility, ReferenceDevicePasses) {
  const auto r = pass_feasibility(reference_device(), reference_noise());
  EXPECT_TRUE(r.all_satisfied());
  EXPECT_NEAR(r.chi_over_ec, 1.6 / 252.0, 1e-12);
  EXPECT_NEAR(r.condition2.value, 0.5 * std::sqrt(1.6 / 504.0), 1e-12);
  DeviceParams bad = reference_device();
  bad.anharmonicity = bad.chi;  // strongly hybridized
  EXPECT_FALSE(pass_feasibility(bad, reference_noise()).all_satisfied());
}

}  // namespace
}  // namespace etsim::model
