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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <utility>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include "etsim/dynamics.hpp"
#include "etsim/errors.hpp"
#include "etsim/recovery.hpp"

namespace etsim::experiments {

using qcore::DensityMatrix;
using qcore::HilbertSpace;
using qcore::Operator;
using qcore::Subsystem;

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (n <= 0) return;
  const int workers = std::clamp(threads, 1, n);
  if (workers == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

double unwrapped_slope(std::span<const double> t, std::span<const double> phase) {
  std::vector<double> p(phase.begin(), phase.end());
  for (std::size_t k = 1; k < p.size(); ++k) {
    p[k] -= kTwoPi * std::round((p[k] - p[k - 1]) / kTwoPi);
  }
  const double n = static_cast<double>(p.size());
  double st = 0, sp = 0, stt = 0, stp = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    st += t[k];
    sp += p[k];
    stt += t[k] * t[k];
    stp += t[k] * p[k];
  }
  return (n * stp - st * sp) / (n * stt - st * st);
}

dynamics::Channel gate_channel(const GateModel& gate, const NoiseModel& noise, double t,
                               double dt) {
  if (t == 0.0) return dynamics::Channel::identity(gate.space);
  return gate.channel(noise.params, t, dt, noise.channels);
}

code::CodeSpace error_words(const code::CodeSpace& code) {
  code::CodeSpace e = code;
  e.zero_l = code.zero_e;
  e.one_l = code.one_e;
  return e;
}

double azimuth(const Eigen::Matrix2cd& rho) {
  const Eigen::Vector3d b = tomography::bloch_vector(rho);
  return std::atan2(b.y(), b.x());
}

Matrix thermal_ancilla(double n_th) {
  return Eigen::Vector2cd(1.0 - n_th, n_th).asDiagonal();
}

}  // namespace

// ---- PASS frequency sweep ----

std::vector<PassSweepRow> pass_sweep(const model::DeviceParams& device, double delta_d,
                                     std::span<const double> rabi, int n_trc) {
  device.validate();
  std::vector<PassSweepRow> rows;
  for (double r : rabi) {
    if (r < 0.0) throw InvalidArgument("sweep amplitudes must be >= 0");
    std::vector<model::DriveSpec> drives;
    if (r > 0.0) drives.push_back(model::from_rabi(r, delta_d));
    model::check_drives(device, drives, n_trc);
    const auto exact = model::fock_frequencies(
        device, model::pass_shift_table(device, drives, n_trc), 0.0);
    const auto pert = model::fock_frequencies(
        device,
        model::pass_shift_table(device, drives, n_trc, model::ShiftMethod::kPerturbative),
        0.0);
    for (int n = 0; n <= n_trc; ++n) rows.push_back({r, n, exact[n], pert[n]});
  }
  return rows;
}

// ---- ET verification ----

RamseyPair ramsey_pair(const GateModel& gate, double duration, int samples) {
  if (samples < 2 || !(duration > 0.0)) {
    throw InvalidArgument("Ramsey needs a positive duration and at least two samples");
  }
  const HilbertSpace& s = gate.space;
  auto superposition = [&](int a, int b) {
    Vector v = Vector::Zero(s.total_dim());
    v(qcore::composite_index(a, 0)) = 1.0 / std::sqrt(2.0);
    v(qcore::composite_index(b, 0)) = 1.0 / std::sqrt(2.0);
    return v;
  };
  const Vector code0 = superposition(2, 4);
  const Vector err0 = superposition(1, 3);
  std::vector<double> t(samples), code_phase(samples), err_phase(samples);
  for (int k = 0; k < samples; ++k) {
    t[k] = duration * k / (samples - 1);
    const Matrix u = qcore::expm(gate.hamiltonian(), t[k]).matrix();
    const Vector c = u * code0;
    const Vector e = u * err0;
    code_phase[k] = std::arg(c(qcore::composite_index(4, 0)) *
                             std::conj(c(qcore::composite_index(2, 0))));
    err_phase[k] = std::arg(e(qcore::composite_index(3, 0)) *
                            std::conj(e(qcore::composite_index(1, 0))));
  }
  return {-unwrapped_slope(t, code_phase), -unwrapped_slope(t, err_phase)};
}

EtReport et_verify(const GateModel& gate, const code::CodeSpace& code,
                   std::span<const double> jump_times, double track_duration,
                   double ramsey_duration) {
  EtReport r;
  r.gate = gate.kind;
  r.drives = gate.drives;
  if (gate.calibration) r.scales = gate.calibration->scales;
  r.frame_offset = gate.params.frame_offset;
  const auto table = model::pass_shift_table(gate.params, gate.drives);
  r.fock_frequencies = model::fock_frequencies(gate.params, table, gate.params.frame_offset);
  r.et_mismatch = model::et_mismatch(r.fock_frequencies);
  r.idle_mismatch = model::idle_mismatch(r.fock_frequencies);
  const Operator h = gate.hamiltonian();
  r.blocks = code::logical_blocks(h, code);
  r.et = code::et_check(h, code);
  for (double tj : jump_times) {
    for (const auto& track : dynamics::conditioned_jump_track(h, code, tj, track_duration)) {
      r.jump_overlap_deviation = std::max(r.jump_overlap_deviation, std::abs(1.0 - track.overlap));
    }
  }
  if (jump_times.size() >= 2) {
    r.jump_phase_slope = dynamics::jump_phase_slope(h, code, jump_times, track_duration);
  }
  r.ramsey = ramsey_pair(gate, ramsey_duration);
  return r;
}

// ---- Wigner snapshots ----

std::vector<WignerFrame> wigner_evolution(std::span<const GateModel> gates,
                                          const code::CodeSpace& code,
                                          const NoiseModel& noise,
                                          std::span<const double> times,
                                          const tomography::WignerGrid& grid, double dt,
                                          int threads) {
  grid.validate();
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < 0.0 || (k > 0 && times[k] < times[k - 1])) {
      throw InvalidArgument("Wigner times must be non-negative and ascending");
    }
  }
  const Eigen::Vector2cd logical(1.0 / std::sqrt(2.0), Complex(0.0, -1.0 / std::sqrt(2.0)));
  const Vector psi = qcore::product_state(code::encode(code, logical), 0).amplitudes();
  const code::CodeSpace ecode = error_words(code);

  std::vector<std::vector<WignerFrame>> per_gate(gates.size());
  parallel_for(static_cast<int>(gates.size()), threads, [&](int gi) {
    const GateModel& g = gates[gi];
    DensityMatrix rho = DensityMatrix::from_pure(qcore::StateVector(g.space, Subsystem::kComposite, psi));
    std::map<double, dynamics::Channel> cache;
    double now = 0.0;
    for (double t : times) {
      const double step = t - now;
      if (step > 0.0) {
        auto it = cache.find(step);
        if (it == cache.end()) it = cache.emplace(step, gate_channel(g, noise, step, dt)).first;
        rho = it->second.apply(rho);
        now = t;
      }
      const auto branches = tomography::parity_postselect(qcore::partial_trace_ancilla(rho));
      auto emit = [&](const char* name, double p, const std::optional<DensityMatrix>& b,
                      const code::CodeSpace& words) {
        if (!b) return;
        WignerFrame f;
        f.gate = g.kind;
        f.time = t;
        f.branch = name;
        f.probability = p;
        f.purity = b->purity();
        f.logical_phase = azimuth(tomography::decode_logical(*b, words));
        f.map = tomography::wigner(*b, grid);
        per_gate[gi].push_back(std::move(f));
      };
      emit("even", branches.p_even, branches.even, code);
      emit("odd", branches.p_odd, branches.odd, ecode);
    }
  });
  std::vector<WignerFrame> out;
  for (auto& v : per_gate) {
    for (auto& f : v) out.push_back(std::move(f));
  }
  return out;
}

// ---- Gate fidelity ----

const char* to_string(AqecMode m) { return m == AqecMode::kIdeal ? "ideal" : "imperfect"; }

AqecMode parse_aqec_mode(std::string_view name) {
  if (name == "ideal") return AqecMode::kIdeal;
  if (name == "imperfect") return AqecMode::kImperfect;
  throw InvalidArgument("unknown AQEC mode '" + std::string(name) +
                        "' (expected ideal or imperfect)");
}

Eigen::Matrix2cd logical_rotation(const GateModel& gate, const code::CodeSpace& code,
                                  double t) {
  const Eigen::Matrix2cd b = code::logical_blocks(gate.hamiltonian(), code).code.block;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(b);
  Eigen::Vector2cd phases;
  for (int k = 0; k < 2; ++k) phases(k) = std::exp(-kI * (es.eigenvalues()(k) * t));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

namespace {

struct CycleSetup {
  NoiseModel noise;
  recovery::AqecSettings settings;
  Matrix ancilla;
  double pulse = 0.0;  // loss time before the recovery unitary acts
};

CycleSetup cycle_setup(const GateModel& gate, const code::CodeSpace& code,
                       const NoiseModel& noise, const AqecOptions& aqec, double elapsed,
                       double dt) {
  CycleSetup s{noise, {qcore::identity(gate.space, Subsystem::kComposite), 0, 0, {}},
               thermal_ancilla(0.0), 0.0};
  if (aqec.mode == AqecMode::kIdeal) {
    s.noise.params.n_th = 0.0;
    s.noise.params.readout_flip = 0.0;
    s.noise.params.reset_fail = 0.0;
  } else {
    if (!(aqec.duration > 0.0)) throw InvalidArgument("AQEC duration must be > 0");
    s.pulse = 0.5 * aqec.duration;
    s.ancilla = thermal_ancilla(noise.params.n_th);
    // Drives are off during the recovery pulse and its coherent part is
    // absorbed in the recovery unitary; only the bare noise remains.
    const Operator zero = 0.0 * qcore::identity(gate.space, Subsystem::kComposite);
    s.settings.pulse_noise_half = dynamics::lindblad_channel(
        zero, dynamics::standard_collapses(gate.space, noise.params, noise.channels),
        0.5 * aqec.duration, dt);
  }
  s.settings.readout_flip = s.noise.params.readout_flip;
  s.settings.reset_fail = s.noise.params.reset_fail;
  if (aqec.unitary) {
    if (aqec.unitary->rows() != gate.space.total_dim()) {
      throw InvalidArgument("AQEC unitary does not match the Hilbert space");
    }
    s.settings.unitary = Operator(gate.space, Subsystem::kComposite, *aqec.unitary);
  } else {
    s.settings.unitary =
        recovery::ideal_aqec_unitary(code, noise.params.kappa_a(), elapsed + s.pulse);
  }
  return s;
}

}  // namespace

std::vector<GateFidelityRow> gate_fidelity(const GateModel& gate, const code::CodeSpace& code,
                                           const NoiseModel& noise,
                                           std::span<const double> t_gates,
                                           const AqecOptions& aqec, double dt, int threads) {
  noise.params.validate();
  std::vector<GateFidelityRow> rows(t_gates.size());
  parallel_for(static_cast<int>(t_gates.size()), threads, [&](int i) {
    const double tg = t_gates[i];
    if (tg < 0.0) throw InvalidArgument("gate durations must be >= 0");
    const CycleSetup setup = cycle_setup(gate, code, noise, aqec, tg, dt);
    const dynamics::Channel ch = gate_channel(gate, setup.noise, tg, dt);
    const tomography::LogicalChannel logical = [&](const DensityMatrix& rho) {
      auto o = recovery::aqec_cycle(ch.apply(rho), setup.settings);
      return tomography::ChannelOutput{std::move(o.state), std::move(o.code_branch),
                                       std::move(o.error_branch), o.p_error_flag};
    };
    const auto res = tomography::logical_ptm(logical, code, tomography::RecoveryPolicy::kFlagSplit,
                                             setup.ancilla);
    const auto ideal = tomography::unitary_ptm(logical_rotation(gate, code, tg));
    const double nan = std::numeric_limits<double>::quiet_NaN();
    rows[i] = {tg,
               tomography::process_fidelity(res.total, ideal),
               res.code ? tomography::process_fidelity(*res.code, ideal) : nan,
               res.error ? tomography::process_fidelity(*res.error, ideal) : nan,
               res.weight_code,
               tomography::logical_phase(res.total)};
  });
  return rows;
}

// ---- Repetitive gates and recovery ----

RepetitiveSeries repetitive(const GateModel& gate, const code::CodeSpace& code,
                            const NoiseModel& noise, double interval, int n_cycles,
                            bool with_aqec, const AqecOptions& aqec, double dt, int threads) {
  noise.params.validate();
  if (n_cycles < 3) throw InvalidArgument("repetitive runs need at least three cycles");
  const CycleSetup setup = cycle_setup(gate, code, noise, aqec, 0.0, dt);
  const double gate_time = with_aqec ? interval - 2.0 * setup.pulse : interval;
  if (!(gate_time > 0.0)) throw InvalidArgument("interval must exceed the AQEC duration");
  CycleSetup cycle = cycle_setup(gate, code, noise, aqec, gate_time, dt);
  const dynamics::Channel ch = gate_channel(gate, cycle.noise, gate_time, dt);
  std::optional<recovery::AqecSettings> settings;
  if (with_aqec) settings = cycle.settings;

  std::array<std::vector<recovery::CycleRecord>, 6> runs;
  parallel_for(6, threads, [&](int k) {
    const Vector psi = code::encode(code, code::fiducials()[k].logical).amplitudes();
    const Matrix rho0 = Eigen::kroneckerProduct(Matrix(psi * psi.adjoint()), cycle.ancilla);
    runs[k] = recovery::repetitive_schedule(
        DensityMatrix::unchecked(gate.space, Subsystem::kComposite, rho0), ch, settings,
        n_cycles);
  });

  RepetitiveSeries s;
  s.gate = gate.kind;
  s.aqec = with_aqec;
  s.interval = interval;
  s.times.push_back(0.0);
  s.fidelity.push_back(1.0);
  const Eigen::Matrix2cd step = logical_rotation(gate, code, gate_time);
  Eigen::Matrix2cd ideal_u = Eigen::Matrix2cd::Identity();
  for (int c = 0; c < n_cycles; ++c) {
    ideal_u = step * ideal_u;
    std::array<Eigen::Vector3d, 6> bloch;
    for (int k = 0; k < 6; ++k) {
      bloch[k] = tomography::bloch_vector(tomography::decode_logical(runs[k][c].state, code));
    }
    const auto ptm = tomography::ptm_from_outputs(bloch);
    s.times.push_back(interval * (c + 1));
    s.fidelity.push_back(tomography::process_fidelity(ptm, tomography::unitary_ptm(ideal_u)));
  }
  s.fit = tomography::fit_exponential(s.times, s.fidelity);
  return s;
}

// ---- Drive-induced ancilla excitation ----

std::vector<ExcitationRow> excitation_sweep(const model::DeviceParams& device,
                                            const NoiseModel& noise, double delta_d,
                                            std::span<const double> rabi,
                                            std::span<const int> fock, double duration,
                                            double dt, int samples, int threads) {
  device.validate();
  noise.params.validate();
  if (fock.empty() || rabi.empty()) throw InvalidArgument("excitation sweep needs points");
  if (samples < 1) throw InvalidArgument("excitation sweep needs at least one sample");
  int n_max = 0;
  for (int n : fock) {
    if (n < 0) throw InvalidArgument("Fock inputs must be >= 0");
    n_max = std::max(n_max, n);
  }
  const HilbertSpace space{std::max(HilbertSpace::kMinCavityDim, n_max + 3)};
  model::DeviceParams frame = device;
  frame.frame_offset = 0.0;
  const auto collapses = dynamics::standard_collapses(space, noise.params, noise.channels);
  const Operator pe = qcore::tensor(qcore::identity(space, Subsystem::kCavity),
                                    qcore::projector_e(space));

  // Column 0 holds the undriven reference for every Fock input.
  const int na = static_cast<int>(rabi.size()) + 1;
  const int nf = static_cast<int>(fock.size());
  std::vector<double> p(na * nf);
  parallel_for(na * nf, threads, [&](int idx) {
    const int ia = idx / nf;
    const int n = fock[idx % nf];
    const double r = ia == 0 ? 0.0 : rabi[ia - 1];
    if (r < 0.0) throw InvalidArgument("sweep amplitudes must be >= 0");
    std::vector<model::DriveSpec> drives;
    if (r > 0.0) drives.push_back(model::from_rabi(r, delta_d));
    const Operator h =
        model::build_driven_h(space, frame, drives, std::max(model::kDefaultTruncation, n_max))
            .static_part();
    const Vector cav = qcore::fock(space, n).amplitudes();
    const Matrix rho0 =
        Eigen::kroneckerProduct(Matrix(cav * cav.adjoint()), thermal_ancilla(noise.params.n_th));
    dynamics::EvolutionOptions opt;
    opt.dt = dt;
    opt.samples = samples;
    opt.observables = {pe};
    const auto res = dynamics::lindblad_evolve(
        DensityMatrix::unchecked(space, Subsystem::kComposite, rho0), h, collapses, duration,
        opt);
    double avg = 0.0;
    for (const Complex& v : res.expectations[0]) avg += v.real();
    p[idx] = avg / static_cast<double>(res.expectations[0].size());
  });

  std::vector<ExcitationRow> rows;
  for (int ia = 1; ia < na; ++ia) {
    for (int k = 0; k < nf; ++k) {
      rows.push_back({rabi[ia - 1], fock[k], p[ia * nf + k], p[ia * nf + k] - p[k]});
    }
  }
  return rows;
}

// ---- Drive-induced dephasing ----

DephasingCheck dephasing_check(const model::DeviceParams& device,
                               const model::NoiseParams& noise, const model::DriveSpec& drive,
                               int n, int trajectories, std::uint64_t seed,
                               std::optional<double> duration, int threads) {
  noise.validate();
  if (trajectories < 1) throw InvalidArgument("need at least one trajectory");
  if (n < 0) throw InvalidArgument("Fock level must be >= 0");
  const HilbertSpace space{std::max(HilbertSpace::kMinCavityDim, n + 3)};
  model::DeviceParams frame = device;
  frame.frame_offset = 0.0;
  const std::vector<model::DriveSpec> drives{drive};
  const Operator h =
      model::build_driven_h(space, frame, drives, std::max(model::kDefaultTruncation, n))
          .static_part();
  dynamics::CollapseSet collapses(space);
  collapses.add("qubit_decay",
                qcore::tensor(qcore::identity(space, Subsystem::kCavity),
                              qcore::sigma_minus(space)),
                noise.kappa_q());

  const double delta = model::fock_detuning(device, drive, n);
  const double eps = model::dressed_excited_amplitude(drive.omega, delta);
  const double predicted = model::induced_dephasing(noise, drive.omega, delta);
  const double t_total = duration.value_or(0.5 / predicted);
  if (!(t_total > 0.0) || !std::isfinite(t_total)) {
    throw InvalidArgument("dephasing check needs a drive and a finite duration");
  }
  dynamics::TrajectoryOptions opt;
  opt.dt = t_total / 5000.0;
  Vector psi = Vector::Zero(space.total_dim());
  psi(qcore::composite_index(n, 0)) = std::sqrt(1.0 - eps * eps);
  psi(qcore::composite_index(n, 1)) = eps;
  const qcore::StateVector psi0(space, Subsystem::kComposite, psi);

  std::vector<double> first(trajectories);
  parallel_for(trajectories, threads, [&](int i) {
    const auto tr = dynamics::trajectory_run(dynamics::trajectory_seed(seed, i), psi0, h,
                                             collapses, t_total, opt);
    first[i] = tr.jumps.empty() ? -1.0 : tr.jumps.front().time;
  });
  DephasingCheck c;
  c.n = n;
  c.predicted = predicted;
  double exposure = 0.0;
  for (double t : first) {
    if (t >= 0.0) {
      ++c.jumps;
      exposure += t;
    } else {
      exposure += t_total;
    }
  }
  c.simulated = c.jumps / exposure;
  return c;
}

}  // namespace etsim::experiments
