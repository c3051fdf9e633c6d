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

#include <algorithm>
#include <cmath>
#include <sstream>

#include "etsim/errors.hpp"
#include "etsim/log.hpp"

namespace etsim::model {

using qcore::HilbertSpace;
using qcore::Operator;
using qcore::Subsystem;

void DeviceParams::validate() const {
  if (!(chi > 0.0)) throw PhysicsError("device: chi must be > 0");
  if (!(kerr > 0.0)) throw PhysicsError("device: kerr must be > 0");
  if (anharmonicity < 0.0) throw PhysicsError("device: anharmonicity must be >= 0");
  if (anharmonicity > 0.0) {
    const double predicted = chi * chi / (4.0 * anharmonicity);
    const double rel = std::abs(kerr - predicted) / predicted;
    if (rel > 0.2) {
      std::ostringstream msg;
      msg << "device: kerr/2pi = " << kerr / kTwoPi
          << " Hz differs from chi^2/(4 E_c)/2pi = " << predicted / kTwoPi
          << " Hz by " << 100.0 * rel << "%";
      log_warning_once(msg.str());
    }
  }
}

void NoiseParams::validate() const {
  const auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw PhysicsError(std::string("noise: ") + name + " must be > 0");
  };
  const auto probability = [](double v, const char* name) {
    if (!(v >= 0.0 && v < 1.0)) {
      throw PhysicsError(std::string("noise: ") + name + " must lie in [0, 1)");
    }
  };
  positive(cavity_t1, "cavity_t1");
  positive(cavity_tphi, "cavity_tphi");
  positive(qubit_t1, "qubit_t1");
  positive(qubit_tphi, "qubit_tphi");
  probability(n_th, "n_th");
  probability(readout_flip, "readout_flip");
  probability(reset_fail, "reset_fail");
}

DeviceParams reference_device() {
  DeviceParams p;
  p.chi = kTwoPi * 1.60e6;
  p.kerr = kTwoPi * 4.8e3;
  p.anharmonicity = kTwoPi * 252e6;
  return p;
}

NoiseParams reference_noise() {
  NoiseParams n;
  n.cavity_t1 = 480e-6;
  n.cavity_tphi = 1.3e-3;
  n.qubit_t1 = 35e-6;
  n.qubit_tphi = 39e-6;
  n.n_th = 0.016;
  n.readout_flip = 0.01;
  n.reset_fail = 0.01;
  return n;
}

std::vector<DriveSpec> reference_phase_drives() {
  const double chi = reference_device().chi;
  return {from_rabi(0.074 * chi, -3.41 * chi)};
}

std::vector<DriveSpec> reference_idle_drives() {
  const double chi = reference_device().chi;
  return {from_rabi(0.054 * chi, -3.37 * chi), from_rabi(0.074 * chi, -2.27 * chi)};
}

DriveSpec from_rabi(double rabi, double delta_d) { return {0.5 * rabi, delta_d}; }

double fock_detuning(const DeviceParams& params, const DriveSpec& drive, int n) {
  return drive.delta_d + n * params.chi;
}

Operator build_h0(const HilbertSpace& space, const DeviceParams& params) {
  const int dim = space.total_dim();
  Matrix h = Matrix::Zero(dim, dim);
  for (int n = 0; n < space.cavity_dim; ++n) {
    const double cavity = params.frame_offset * n - 0.5 * params.kerr * n * (n - 1);
    h(qcore::composite_index(n, 0), qcore::composite_index(n, 0)) = cavity;
    h(qcore::composite_index(n, 1), qcore::composite_index(n, 1)) =
        cavity - params.chi * n + params.omega_q;
  }
  return Operator(space, Subsystem::kComposite, std::move(h));
}

DrivenHamiltonian::DrivenHamiltonian(Operator static_part,
                                     std::vector<RotatingTerm> rotating)
    : static_part_(std::move(static_part)), rotating_(std::move(rotating)) {}

Operator DrivenHamiltonian::at(double t) const {
  Matrix h = static_part_.matrix();
  const int nc = static_part_.space().cavity_dim;
  for (const auto& term : rotating_) {
    const Complex up = term.omega * std::exp(-kI * (term.frequency * t));
    for (int n = 0; n < nc; ++n) {
      const int g = qcore::composite_index(n, 0);
      const int e = qcore::composite_index(n, 1);
      h(e, g) += up;
      h(g, e) += std::conj(up);
    }
  }
  return Operator(static_part_.space(), Subsystem::kComposite, std::move(h));
}

std::vector<std::pair<Operator, double>> DrivenHamiltonian::segments(
    double t0, double duration, double segment_length) const {
  if (!(segment_length > 0.0)) throw InvalidArgument("segment_length must be > 0");
  std::vector<std::pair<Operator, double>> out;
  if (is_static()) {
    out.emplace_back(static_part_, duration);
    return out;
  }
  const auto count = static_cast<long>(std::ceil(duration / segment_length - 1e-12));
  const double len = duration / static_cast<double>(std::max(1L, count));
  for (long k = 0; k < std::max(1L, count); ++k) {
    out.emplace_back(at(t0 + (k + 0.5) * len), len);
  }
  return out;
}

void check_drives(const DeviceParams& params, std::span<const DriveSpec> drives,
                  int n_trc) {
  if (drives.size() > 2) throw PhysicsError("at most two PASS drives are supported");
  for (const auto& d : drives) {
    if (d.omega < 0.0) throw PhysicsError("drive amplitude must be >= 0");
    if (d.omega >= 0.3 * params.chi) {
      std::ostringstream msg;
      msg << "drive amplitude " << d.omega / params.chi << " chi exceeds 0.3 chi";
      throw PhysicsError(msg.str());
    }
    for (int n = 0; n <= n_trc; ++n) {
      const double delta_n = fock_detuning(params, d, n);
      if (std::abs(delta_n) < 3.0 * d.omega || delta_n == 0.0) {
        std::ostringstream msg;
        msg << "drive resonant with the n=" << n
            << " ancilla transition: delta_n/2pi = " << delta_n / kTwoPi
            << " Hz, omega/2pi = " << d.omega / kTwoPi << " Hz";
        throw PhysicsError(msg.str());
      }
    }
  }
}

DrivenHamiltonian build_driven_h(const HilbertSpace& space,
                                 const DeviceParams& params,
                                 std::span<const DriveSpec> drives, int n_trc) {
  check_drives(params, drives, n_trc);
  if (drives.empty()) return DrivenHamiltonian(build_h0(space, params), {});

  DeviceParams framed = params;
  framed.omega_q = -drives[0].delta_d;
  Matrix h = build_h0(space, framed).matrix();
  for (int n = 0; n < space.cavity_dim; ++n) {
    const int g = qcore::composite_index(n, 0);
    const int e = qcore::composite_index(n, 1);
    h(e, g) += drives[0].omega;
    h(g, e) += drives[0].omega;
  }
  std::vector<DrivenHamiltonian::RotatingTerm> rotating;
  for (std::size_t k = 1; k < drives.size(); ++k) {
    rotating.push_back({drives[k].omega, drives[k].delta_d - drives[0].delta_d});
  }
  return DrivenHamiltonian(Operator(space, Subsystem::kComposite, std::move(h)),
                           std::move(rotating));
}

double dressed_shift(double omega, double delta) {
  if (delta == 0.0) throw PhysicsError("dressed_shift: resonant drive (delta = 0)");
  const double sign = delta > 0.0 ? 1.0 : -1.0;
  // Rationalized form of (-delta + sign sqrt(delta^2 + 4 omega^2)) / 2; avoids
  // cancellation for |delta| >> omega.
  const double root = std::sqrt(delta * delta + 4.0 * omega * omega);
  return 2.0 * omega * omega / (delta + sign * root);
}

double dressed_excited_amplitude(double omega, double delta) {
  if (omega == 0.0) return 0.0;
  const double ratio = dressed_shift(omega, delta) / omega;
  return ratio / std::sqrt(1.0 + ratio * ratio);
}

const char* to_string(ShiftMethod m) {
  switch (m) {
    case ShiftMethod::kPerturbative:
      return "perturbative";
    case ShiftMethod::kExactDressed:
      return "exact-dressed";
    case ShiftMethod::kNumericOracle:
      return "numeric-oracle";
  }
  return "?";
}

namespace {

std::vector<double> numeric_shifts(const DeviceParams& params,
                                   const DriveSpec& drive, int n_trc,
                                   int cavity_dim) {
  const HilbertSpace space{cavity_dim};
  const std::vector<DriveSpec> one{drive};
  const Matrix h = build_driven_h(space, params, one, n_trc).static_part().matrix();
  const Matrix h0 = build_h0(space, params).matrix();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
  std::vector<double> shifts(n_trc + 1);
  for (int n = 0; n <= n_trc; ++n) {
    const int g = qcore::composite_index(n, 0);
    Eigen::Index best = 0;
    eig.eigenvectors().row(g).cwiseAbs().maxCoeff(&best);
    shifts[n] = eig.eigenvalues()(best) - h0(g, g).real();
  }
  return shifts;
}

}  // namespace

PassShiftTable pass_shift_table(const DeviceParams& params,
                                std::span<const DriveSpec> drives, int n_trc,
                                ShiftMethod method, int cavity_dim) {
  check_drives(params, drives, n_trc);
  PassShiftTable table;
  table.method = method;
  table.shifts.assign(n_trc + 1, 0.0);
  for (const auto& d : drives) {
    if (method == ShiftMethod::kNumericOracle) {
      if (cavity_dim < n_trc + 2) {
        throw InvalidArgument("numeric oracle needs cavity_dim >= n_trc + 2");
      }
      const auto s = numeric_shifts(params, d, n_trc, cavity_dim);
      for (int n = 0; n <= n_trc; ++n) table.shifts[n] += s[n];
      continue;
    }
    for (int n = 0; n <= n_trc; ++n) {
      const double delta_n = fock_detuning(params, d, n);
      table.shifts[n] += method == ShiftMethod::kPerturbative
                             ? d.omega * d.omega / delta_n
                             : dressed_shift(d.omega, delta_n);
    }
  }
  for (double s : table.shifts) {
    if (!std::isfinite(s)) throw PhysicsError("non-finite PASS shift");
  }
  return table;
}

std::vector<double> fock_frequencies(const DeviceParams& params,
                                     const PassShiftTable& table,
                                     double frame_offset) {
  std::vector<double> f(table.shifts.size());
  for (std::size_t n = 0; n < f.size(); ++n) {
    const double k = static_cast<double>(n);
    f[n] = frame_offset * k - 0.5 * params.kerr * k * (k - 1.0) +
           table.shifts[n] - table.shifts[0];
  }
  return f;
}

double et_mismatch(std::span<const double> f) {
  if (f.size() < 5) throw InvalidArgument("need f_0..f_4");
  return (f[4] - f[2]) - (f[3] - f[1]);
}

double idle_mismatch(std::span<const double> f) {
  if (f.size() < 5) throw InvalidArgument("need f_0..f_4");
  return 0.5 * f[4] - f[2];
}

double induced_dephasing(const NoiseParams& noise, double omega, double delta_n) {
  if (delta_n == 0.0) throw PhysicsError("induced_dephasing: resonant drive");
  return omega * omega * noise.kappa_q() / (delta_n * delta_n);
}

double induced_dephasing(const DeviceParams& params, const NoiseParams& noise,
                         const DriveSpec& drive, int n) {
  return induced_dephasing(noise, drive.omega, fock_detuning(params, drive, n));
}

FeasibilityReport pass_feasibility(const DeviceParams& params,
                                   const NoiseParams& noise,
                                   std::optional<double> omega) {
  if (!(params.anharmonicity > 0.0)) {
    throw PhysicsError("pass_feasibility needs the ancilla anharmonicity");
  }
  FeasibilityReport r;
  const double x = params.chi / (2.0 * params.anharmonicity);
  r.chi_over_ec = params.chi / params.anharmonicity;

  const double omega_used = omega.value_or(std::sqrt(params.kerr * params.chi / 2.0));
  r.condition1.description = "omega = (chi/2) O(sqrt(chi / 2 E_c))";
  r.condition1.value = omega_used;
  r.condition1.reference = 0.5 * params.chi * std::sqrt(x);
  r.condition1.margin = r.condition1.value / r.condition1.reference;
  r.condition1.satisfied = r.condition1.margin >= 0.1 && r.condition1.margin <= 10.0;

  r.condition2.description = "sqrt(chi / 2 E_c) / 2 << 1";
  r.condition2.value = 0.5 * std::sqrt(x);
  r.condition2.reference = 1.0;
  r.condition2.margin = r.condition2.value;
  r.condition2.satisfied = r.condition2.margin <= 0.1;

  r.condition3.description = "chi / 2 E_c << kappa_a / kappa_q";
  r.condition3.value = x;
  r.condition3.reference = noise.kappa_a() / noise.kappa_q();
  r.condition3.margin = r.condition3.value / r.condition3.reference;
  r.condition3.satisfied = r.condition3.margin <= 0.1;
  return r;
}

namespace {

std::vector<DriveSpec> scaled(std::span<const DriveSpec> nominal,
                              std::span<const double> s) {
  std::vector<DriveSpec> out(nominal.begin(), nominal.end());
  for (std::size_t k = 0; k < out.size(); ++k) out[k].omega *= s[k];
  return out;
}

// Returns (et, idle) mismatches; nullopt when the trial point is resonant.
std::optional<std::pair<double, double>> mismatches(
    const DeviceParams& params, std::span<const DriveSpec> nominal,
    std::span<const double> s) {
  const auto drives = scaled(nominal, s);
  try {
    const auto table = pass_shift_table(params, drives);
    const auto f = fock_frequencies(params, table, 0.0);
    return std::make_pair(et_mismatch(f), idle_mismatch(f));
  } catch (const PhysicsError&) {
    return std::nullopt;
  }
}

CalibrationResult calibrate_single(const DeviceParams& params,
                                   std::span<const DriveSpec> nominal) {
  auto et = [&](double s) -> std::optional<double> {
    const double v[1] = {s};
    auto m = mismatches(params, nominal, v);
    if (!m) return std::nullopt;
    return m->first;
  };
  // Geometric scan for a sign change, then bisection.
  double lo = 1e-3;
  auto f_lo = et(lo);
  if (!f_lo) throw PhysicsError("calibration: nominal drive is resonant");
  double hi = lo;
  std::optional<double> f_hi;
  bool bracketed = false;
  for (int k = 0; k < 200; ++k) {
    hi = lo * 1.05;
    f_hi = et(hi);
    if (!f_hi) break;
    if ((*f_lo < 0.0) != (*f_hi < 0.0)) {
      bracketed = true;
      break;
    }
    lo = hi;
    f_lo = f_hi;
  }
  if (!bracketed) {
    throw ConvergenceError(
        "calibration: no drive amplitude satisfies the error-transparency "
        "relation at this detuning");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = *et(mid);
    if ((f_mid < 0.0) == (*f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  const double s = 0.5 * (lo + hi);
  CalibrationResult r;
  r.scales = {s};
  r.drives = scaled(nominal, r.scales);
  r.et_residual = *et(s);
  return r;
}

CalibrationResult calibrate_pair(const DeviceParams& params,
                                 std::span<const DriveSpec> nominal) {
  Eigen::Vector2d s(1.0, 1.0);
  auto eval = [&](const Eigen::Vector2d& x) -> std::optional<Eigen::Vector2d> {
    if (x(0) <= 0.0 || x(1) <= 0.0) return std::nullopt;
    const double v[2] = {x(0), x(1)};
    auto m = mismatches(params, nominal, v);
    if (!m) return std::nullopt;
    return Eigen::Vector2d(m->first, m->second);
  };
  auto f = eval(s);
  if (!f) throw PhysicsError("calibration: nominal drives are resonant");
  const double tol = 1e-9 * params.kerr;
  for (int it = 0; it < 100 && f->norm() > tol; ++it) {
    Eigen::Matrix2d jac;
    for (int j = 0; j < 2; ++j) {
      Eigen::Vector2d step = s;
      const double h = 1e-6 * s(j);
      step(j) += h;
      auto fj = eval(step);
      if (!fj) throw ConvergenceError("calibration: Jacobian probe hit a resonance");
      jac.col(j) = (*fj - *f) / h;
    }
    const Eigen::Vector2d delta = jac.fullPivLu().solve(-*f);
    double lambda = 1.0;
    bool accepted = false;
    for (int k = 0; k < 40; ++k, lambda *= 0.5) {
      const Eigen::Vector2d trial = s + lambda * delta;
      auto ft = eval(trial);
      if (ft && ft->norm() < f->norm()) {
        s = trial;
        f = ft;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (f->norm() > 1e3 * tol) {
    throw ConvergenceError("calibration: two-drive solve did not converge");
  }
  CalibrationResult r;
  r.scales = {s(0), s(1)};
  r.drives = scaled(nominal, r.scales);
  r.et_residual = (*f)(0);
  r.idle_residual = (*f)(1);
  return r;
}

}  // namespace

CalibrationResult calibrate_drives(const DeviceParams& params,
                                   std::span<const DriveSpec> nominal) {
  params.validate();
  if (nominal.empty()) {
    CalibrationResult r;
    const auto f = fock_frequencies(params, pass_shift_table(params, nominal), 0.0);
    r.et_residual = et_mismatch(f);
    r.idle_residual = idle_mismatch(f);
    return r;
  }
  if (nominal.size() == 1) return calibrate_single(params, nominal);
  if (nominal.size() == 2) return calibrate_pair(params, nominal);
  throw PhysicsError("at most two PASS drives are supported");
}

}  // namespace etsim::model
