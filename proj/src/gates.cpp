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


#include "etsim/gates.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "etsim/code.hpp"
#include "etsim/errors.hpp"

namespace etsim::gates {

using qcore::Subsystem;

const char* to_string(GateKind kind) {
  switch (kind) {
    case GateKind::kKerr:
      return "R_Kerr";
    case GateKind::kEtPhase:
      return "R_ET";
    case GateKind::kEtIdle:
      return "I_ET";
  }
  return "?";
}

GateKind parse_gate(std::string_view name) {
  for (GateKind k : {GateKind::kKerr, GateKind::kEtPhase, GateKind::kEtIdle}) {
    if (name == to_string(k)) return k;
  }
  throw InvalidArgument("unknown gate '" + std::string(name) + "' (expected R_Kerr, R_ET or I_ET)");
}

const char* to_string(Switching s) {
  return s == Switching::kAdiabatic ? "adiabatic" : "sudden";
}

Switching parse_switching(std::string_view name) {
  if (name == "adiabatic") return Switching::kAdiabatic;
  if (name == "sudden") return Switching::kSudden;
  throw InvalidArgument("unknown switching '" + std::string(name) +
                        "' (expected adiabatic or sudden)");
}

namespace {

double cavity_energy(const model::DeviceParams& p, int n) {
  return p.frame_offset * n - 0.5 * p.kerr * n * (n - 1);
}

}  // namespace

Operator GateModel::hamiltonian() const {
  const int dim = space.total_dim();
  Matrix h = Matrix::Zero(dim, dim);
  for (int n = 0; n < space.cavity_dim; ++n) {
    const double cav = cavity_energy(params, n);
    // Bare |n, e> sits at -(delta_d + n chi) in the frame of the first drive,
    // or at -n chi without drives.
    const double bare_e = drives.empty() ? -params.chi * n
                                         : -model::fock_detuning(params, drives[0], n);
    h(qcore::composite_index(n, 0), qcore::composite_index(n, 0)) = cav + shifts[n];
    h(qcore::composite_index(n, 1), qcore::composite_index(n, 1)) = cav + bare_e - shifts[n];
  }
  return Operator(space, Subsystem::kComposite, std::move(h));
}

Operator GateModel::dressing() const {
  const int dim = space.total_dim();
  Matrix d = Matrix::Zero(dim, dim);
  for (int n = 0; n < space.cavity_dim; ++n) {
    const int g = qcore::composite_index(n, 0);
    const int e = qcore::composite_index(n, 1);
    const double c = std::cos(mixing[n]);
    const double s = std::sin(mixing[n]);
    d(g, g) = c;
    d(e, g) = s;
    d(g, e) = -s;
    d(e, e) = c;
  }
  return Operator(space, Subsystem::kComposite, std::move(d));
}

Operator GateModel::driven_hamiltonian() const {
  if (drives.empty()) return model::build_h0(space, params);
  return model::build_driven_h(space, params, std::span(drives).first(1)).static_part();
}

Operator GateModel::cavity_hamiltonian() const {
  return code::ground_manifold(hamiltonian());
}

dynamics::CollapseSet GateModel::collapses(const model::NoiseParams& noise,
                                           dynamics::NoiseChannels channels) const {
  const auto bare = dynamics::standard_collapses(space, noise, channels);
  const Operator d = dressing();
  const Operator d_dag = d.adjoint();
  dynamics::CollapseSet out(space);
  for (const auto& c : bare.terms()) out.add(c.label, d_dag * c.op * d, c.rate);
  return out;
}

dynamics::Channel GateModel::channel(const model::NoiseParams& noise, double duration,
                                     double dt, dynamics::NoiseChannels channels) const {
  auto core = dynamics::lindblad_channel(hamiltonian(), collapses(noise, channels), duration, dt);
  if (switching == Switching::kAdiabatic) return core;
  const Operator d = dressing();
  return dynamics::Channel::unitary(d.adjoint()).then(core).then(dynamics::Channel::unitary(d));
}

dynamics::Channel GateModel::unitary(double duration) const {
  Operator u = qcore::expm(hamiltonian(), duration);
  if (switching == Switching::kSudden) {
    const Operator d = dressing();
    u = d * u * d.adjoint();
  }
  return dynamics::Channel::unitary(u);
}

std::vector<model::DriveSpec> default_drives(GateKind kind) {
  switch (kind) {
    case GateKind::kKerr:
      return {};
    case GateKind::kEtPhase:
      return model::reference_phase_drives();
    case GateKind::kEtIdle:
      return model::reference_idle_drives();
  }
  return {};
}

GateModel make_gate(GateKind kind, const HilbertSpace& space,
                    const model::DeviceParams& device,
                    const std::vector<model::DriveSpec>& drives, bool calibrate,
                    Switching switching) {
  space.validate();
  device.validate();
  if (kind == GateKind::kKerr && !drives.empty()) {
    throw InvalidArgument("R_Kerr takes no drives");
  }
  if (kind == GateKind::kEtPhase && drives.size() != 1) {
    throw InvalidArgument("R_ET takes exactly one drive");
  }
  if (kind == GateKind::kEtIdle && drives.size() != 2) {
    throw InvalidArgument("I_ET takes exactly two drives");
  }

  GateModel g;
  g.kind = kind;
  g.space = space;
  g.params = device;
  g.switching = switching;
  g.drives = drives;
  if (calibrate && !drives.empty()) {
    g.calibration = model::calibrate_drives(device, drives);
    g.drives = g.calibration->drives;
  }
  model::check_drives(device, g.drives);

  const int nc = space.cavity_dim;
  g.shifts.assign(nc, 0.0);
  g.mixing.assign(nc, 0.0);
  for (int n = 0; n < nc; ++n) {
    for (const auto& d : g.drives) {
      const double delta = model::fock_detuning(device, d, n);
      if (delta == 0.0) {
        throw PhysicsError("drive resonant with the n = " + std::to_string(n) + " transition");
      }
      g.shifts[n] += model::dressed_shift(d.omega, delta);
      g.mixing[n] += std::asin(model::dressed_excited_amplitude(d.omega, delta));
    }
  }
  model::PassShiftTable table;
  table.shifts.assign(g.shifts.begin(), g.shifts.begin() + model::kDefaultTruncation + 1);
  g.params.frame_offset = code::choose_frame_offset(device, table);
  return g;
}

GateModel make_gate(GateKind kind, const HilbertSpace& space,
                    const model::DeviceParams& device) {
  return make_gate(kind, space, device, default_drives(kind));
}

}  // namespace etsim::gates
