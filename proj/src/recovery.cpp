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

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "etsim/errors.hpp"

namespace etsim::recovery {

using qcore::Subsystem;

namespace {

Vector with_ancilla(const Vector& cavity, int q) {
  Vector v = Vector::Zero(2 * cavity.size());
  for (Eigen::Index n = 0; n < cavity.size(); ++n) {
    v(qcore::composite_index(static_cast<int>(n), q)) = cavity(n);
  }
  return v;
}

// Orthonormal basis whose first columns span `cols`.
Matrix extend_basis(const Matrix& cols) {
  const auto d = cols.rows();
  Matrix basis(d, d);
  Eigen::Index count = 0;
  const auto push = [&](Vector v) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index k = 0; k < count; ++k) v -= basis.col(k).dot(v) * basis.col(k);
    }
    const double norm = v.norm();
    if (norm < 1e-8) return false;
    basis.col(count++) = v / norm;
    return true;
  };
  for (Eigen::Index k = 0; k < cols.cols(); ++k) {
    if (!push(cols.col(k))) throw InvalidArgument("AQEC columns are linearly dependent");
  }
  for (Eigen::Index k = 0; k < d && count < d; ++k) push(Vector::Unit(d, k));
  return basis;
}

Matrix reset_ancilla(const Matrix& rho, int nc, double reset_fail) {
  Matrix out = Matrix::Zero(rho.rows(), rho.cols());
  for (int m = 0; m < nc; ++m) {
    for (int n = 0; n < nc; ++n) {
      const Complex c = rho(2 * m, 2 * n) + rho(2 * m + 1, 2 * n + 1);
      out(2 * m, 2 * n) = (1.0 - reset_fail) * c;
      out(2 * m + 1, 2 * n + 1) = reset_fail * c;
    }
  }
  return out;
}

Matrix project_ancilla(const Matrix& rho, int q) {
  Matrix out = Matrix::Zero(rho.rows(), rho.cols());
  const auto nc = rho.rows() / 2;
  for (Eigen::Index m = 0; m < nc; ++m) {
    for (Eigen::Index n = 0; n < nc; ++n) out(2 * m + q, 2 * n + q) = rho(2 * m + q, 2 * n + q);
  }
  return out;
}

}  // namespace

AqecTarget aqec_target(const code::CodeSpace& code, double kappa_a, double elapsed) {
  if (elapsed < 0.0 || kappa_a < 0.0) throw InvalidArgument("aqec_target: negative time or rate");
  const Matrix nj = dynamics::no_jump_map(code.space, kappa_a, elapsed).matrix();
  const Vector zero_t = (nj * code.zero_l.amplitudes()).normalized();
  const Vector one_t = (nj * code.one_l.amplitudes()).normalized();
  const int d = code.space.total_dim();
  AqecTarget t{code.space, Matrix(d, 4), Matrix(d, 4)};
  t.domain.col(0) = with_ancilla(zero_t, 0);
  t.domain.col(1) = with_ancilla(one_t, 0);
  t.domain.col(2) = with_ancilla(code.zero_e.amplitudes(), 0);
  t.domain.col(3) = with_ancilla(code.one_e.amplitudes(), 0);
  t.image.col(0) = with_ancilla(code.zero_l.amplitudes(), 0);
  t.image.col(1) = with_ancilla(code.one_l.amplitudes(), 0);
  t.image.col(2) = with_ancilla(code.zero_l.amplitudes(), 1);
  t.image.col(3) = with_ancilla(code.one_l.amplitudes(), 1);
  return t;
}

Matrix complete_unitary(const Matrix& domain, const Matrix& image) {
  if (domain.rows() != image.rows() || domain.cols() != image.cols()) {
    throw InvalidArgument("complete_unitary: shape mismatch");
  }
  const Matrix gram_d = domain.adjoint() * domain;
  const Matrix gram_i = image.adjoint() * image;
  const auto r = domain.cols();
  if (qcore::max_abs(gram_d - Matrix::Identity(r, r)) > 1e-10 ||
      qcore::max_abs(gram_i - Matrix::Identity(r, r)) > 1e-10) {
    throw InvalidArgument("complete_unitary: columns are not orthonormal");
  }
  return extend_basis(image) * extend_basis(domain).adjoint();
}

Operator ideal_aqec_unitary(const code::CodeSpace& code, double kappa_a, double elapsed) {
  const AqecTarget t = aqec_target(code, kappa_a, elapsed);
  return Operator(code.space, Subsystem::kComposite, complete_unitary(t.domain, t.image));
}

AqecOutcome aqec_cycle(const DensityMatrix& rho, const AqecSettings& s) {
  if (rho.subsystem() != Subsystem::kComposite) {
    throw InvalidArgument("aqec_cycle expects a composite state");
  }
  const HilbertSpace& space = rho.space();
  const int nc = space.cavity_dim;
  Matrix r = rho.matrix();
  if (s.pulse_noise_half) r = s.pulse_noise_half->apply(r);
  r = s.unitary.matrix() * r * s.unitary.matrix().adjoint();
  if (s.pulse_noise_half) r = s.pulse_noise_half->apply(r);

  const Matrix rho_g = project_ancilla(r, 0);
  const Matrix rho_e = project_ancilla(r, 1);
  const double f = s.readout_flip;
  const Matrix flag_e = (1.0 - f) * rho_e + f * rho_g;
  const Matrix flag_g = (1.0 - f) * rho_g + f * rho_e;

  AqecOutcome out{DensityMatrix::unchecked(space, Subsystem::kComposite,
                                           reset_ancilla(r, nc, s.reset_fail)),
                  flag_e.trace().real(), std::nullopt, std::nullopt};
  const double p_g = flag_g.trace().real();
  if (p_g > 1e-14) {
    out.code_branch = DensityMatrix::unchecked(space, Subsystem::kComposite,
                                               reset_ancilla(flag_g / p_g, nc, s.reset_fail));
  }
  if (out.p_error_flag > 1e-14) {
    out.error_branch = DensityMatrix::unchecked(
        space, Subsystem::kComposite, reset_ancilla(flag_e / out.p_error_flag, nc, s.reset_fail));
  }
  return out;
}

AqecOutcome aqec_cycle(const DensityMatrix& rho, const code::CodeSpace& code,
                       const model::NoiseParams& noise, double elapsed) {
  AqecSettings s{ideal_aqec_unitary(code, noise.kappa_a(), elapsed), noise.readout_flip,
                 noise.reset_fail, std::nullopt};
  return aqec_cycle(rho, s);
}

std::vector<CycleRecord> repetitive_schedule(const DensityMatrix& rho0, const Channel& gate,
                                             const std::optional<AqecSettings>& aqec,
                                             int n_cycles) {
  if (n_cycles < 0) throw InvalidArgument("n_cycles must be >= 0");
  std::vector<CycleRecord> out;
  DensityMatrix rho = rho0;
  for (int k = 0; k < n_cycles; ++k) {
    rho = gate.apply(rho);
    double p = 0.0;
    if (aqec) {
      auto o = aqec_cycle(rho, *aqec);
      rho = std::move(o.state);
      p = o.p_error_flag;
    }
    out.push_back({rho, p});
  }
  return out;
}

// ---- GRAPE ----

void GrapeProblem::validate() const {
  if (segments < 20) throw InvalidArgument("GRAPE needs at least 20 segments");
  if (!(amplitude_bound > 0.0)) throw InvalidArgument("GRAPE amplitude bound must be > 0");
  if (!(duration > 0.0)) throw InvalidArgument("GRAPE duration must be > 0");
  if (controls.empty()) throw InvalidArgument("GRAPE needs at least one control");
  const auto d = drift.rows();
  if (target.domain.rows() != d || target.image.rows() != d) {
    throw InvalidArgument("GRAPE target dimension differs from the drift");
  }
  for (const auto& c : controls) {
    if (c.lowering.rows() != d) throw InvalidArgument("control " + c.name + " has wrong size");
  }
}

GrapeProblem aqec_grape_problem(const code::CodeSpace& code, const model::DeviceParams& params,
                                double duration, int segments, double amplitude_bound,
                                double kappa_a, double elapsed) {
  model::DeviceParams frame = params;
  frame.frame_offset = 0.0;
  frame.omega_q = 0.0;
  const Operator id_c = qcore::identity(code.space, Subsystem::kCavity);
  GrapeProblem p{code.space,
                 model::build_h0(code.space, frame).matrix(),
                 {{"ancilla", qcore::tensor(id_c, qcore::sigma_minus(code.space)).matrix()},
                  {"cavity", qcore::destroy(code.space).matrix()}},
                 aqec_target(code, kappa_a, elapsed),
                 segments,
                 duration,
                 amplitude_bound};
  p.validate();
  return p;
}

void ControlPulse::write_csv(std::ostream& os) const {
  os << "segment_index,channel,real,imag,segment_duration_s\n";
  os << std::setprecision(17);
  for (std::size_t k = 0; k < amplitudes.size(); ++k) {
    for (std::size_t j = 0; j < channels.size(); ++j) {
      os << k << ',' << channels[j] << ',' << amplitudes[k][j].real() << ','
         << amplitudes[k][j].imag() << ',' << segment_duration << '\n';
    }
  }
}

ControlPulse ControlPulse::read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("segment_index,channel", 0) != 0) {
    throw InvalidArgument("pulse CSV: missing header");
  }
  ControlPulse p;
  std::map<std::string, std::size_t> index;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string seg, ch, re, im, dt;
    if (!std::getline(ss, seg, ',') || !std::getline(ss, ch, ',') || !std::getline(ss, re, ',') ||
        !std::getline(ss, im, ',') || !std::getline(ss, dt, ',')) {
      throw InvalidArgument("pulse CSV: malformed line " + std::to_string(line_no));
    }
    const std::size_t k = std::stoul(seg);
    if (!index.contains(ch)) {
      index[ch] = p.channels.size();
      p.channels.push_back(ch);
    }
    if (p.amplitudes.size() <= k) p.amplitudes.resize(k + 1);
    auto& row = p.amplitudes[k];
    if (row.size() < p.channels.size()) row.resize(p.channels.size());
    row[index[ch]] = Complex(std::stod(re), std::stod(im));
    p.segment_duration = std::stod(dt);
  }
  for (auto& row : p.amplitudes) row.resize(p.channels.size());
  return p;
}

ControlPulse pulse_from_parameters(const GrapeProblem& p, const Eigen::VectorXd& x) {
  const auto nch = p.controls.size();
  if (x.size() != p.parameter_count()) throw InvalidArgument("GRAPE parameter size mismatch");
  ControlPulse pulse;
  pulse.segment_duration = p.duration / p.segments;
  for (const auto& c : p.controls) pulse.channels.push_back(c.name);
  pulse.amplitudes.assign(p.segments, std::vector<Complex>(nch));
  for (int k = 0; k < p.segments; ++k) {
    for (std::size_t j = 0; j < nch; ++j) {
      const auto base = 2 * (k * nch + j);
      pulse.amplitudes[k][j] = p.amplitude_bound * Complex(x(base), x(base + 1));
    }
  }
  return pulse;
}

Eigen::VectorXd parameters_from_pulse(const GrapeProblem& p, const ControlPulse& pulse) {
  const auto nch = p.controls.size();
  if (pulse.amplitudes.size() != static_cast<std::size_t>(p.segments) ||
      pulse.channels.size() != nch) {
    throw InvalidArgument("pulse does not match the GRAPE problem");
  }
  Eigen::VectorXd x(p.parameter_count());
  for (int k = 0; k < p.segments; ++k) {
    for (std::size_t j = 0; j < nch; ++j) {
      const auto base = 2 * (k * nch + j);
      x(base) = pulse.amplitudes[k][j].real() / p.amplitude_bound;
      x(base + 1) = pulse.amplitudes[k][j].imag() / p.amplitude_bound;
    }
  }
  return x;
}

namespace {

struct SegmentEig {
  Matrix v;
  Eigen::VectorXd lambda;
  Matrix u;
};

std::vector<Matrix> control_hamiltonians(const GrapeProblem& p) {
  std::vector<Matrix> hs;
  for (const auto& c : p.controls) {
    hs.push_back(c.lowering + c.lowering.adjoint());
    hs.push_back(kI * (c.lowering.adjoint() - c.lowering));
  }
  return hs;
}

SegmentEig segment(const GrapeProblem& p, const std::vector<Matrix>& hc,
                   const Eigen::VectorXd& x, int k, double dt) {
  Matrix h = p.drift;
  const auto per = static_cast<Eigen::Index>(hc.size());
  for (Eigen::Index j = 0; j < per; ++j) h += (p.amplitude_bound * x(k * per + j)) * hc[j];
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
  SegmentEig s{eig.eigenvectors(), eig.eigenvalues(), {}};
  const Vector phases = (-kI * dt * s.lambda.cast<Complex>()).array().exp();
  s.u = s.v * phases.asDiagonal() * s.v.adjoint();
  return s;
}

}  // namespace

Matrix pulse_unitary(const GrapeProblem& p, const ControlPulse& pulse) {
  const Eigen::VectorXd x = parameters_from_pulse(p, pulse);
  const auto hc = control_hamiltonians(p);
  const double dt = p.duration / p.segments;
  Matrix u = Matrix::Identity(p.drift.rows(), p.drift.cols());
  for (int k = 0; k < p.segments; ++k) u = segment(p, hc, x, k, dt).u * u;
  return u;
}

double grape_fidelity(const GrapeProblem& p, const Eigen::VectorXd& x,
                      Eigen::VectorXd* gradient) {
  if (x.size() != p.parameter_count()) throw InvalidArgument("GRAPE parameter size mismatch");
  const auto hc = control_hamiltonians(p);
  const double dt = p.duration / p.segments;
  const auto r = static_cast<double>(p.target.domain.cols());

  std::vector<SegmentEig> segs;
  segs.reserve(p.segments);
  std::vector<Matrix> forward;  // forward[k] = U_k ... U_1 domain, forward[0] = domain
  forward.push_back(p.target.domain);
  for (int k = 0; k < p.segments; ++k) {
    segs.push_back(segment(p, hc, x, k, dt));
    forward.push_back(segs.back().u * forward.back());
  }
  const Complex g = (p.target.image.adjoint() * forward.back()).trace();
  const double phi = std::norm(g) / (r * r);
  if (!gradient) return phi;

  gradient->setZero(x.size());
  const auto per = static_cast<Eigen::Index>(hc.size());
  Matrix back = p.target.image;  // U_{k+1}^dag ... U_N^dag image
  for (int k = p.segments - 1; k >= 0; --k) {
    const SegmentEig& s = segs[k];
    const auto d = s.lambda.size();
    Matrix gmat(d, d);
    for (Eigen::Index a = 0; a < d; ++a) {
      const Complex ea = std::exp(-kI * (s.lambda(a) * dt));
      for (Eigen::Index b = 0; b < d; ++b) {
        const double diff = s.lambda(a) - s.lambda(b);
        if (std::abs(diff * dt) < 1e-9) {
          gmat(a, b) = -kI * dt * ea;
        } else {
          gmat(a, b) = (ea - std::exp(-kI * (s.lambda(b) * dt))) / diff;
        }
      }
    }
    // dg = sum_ab G_ab A_ab M_ba with A = V^dag dH V and M = V^dag F back^dag V.
    const Matrix m = s.v.adjoint() * forward[k] * back.adjoint() * s.v;
    const Matrix gm = gmat.cwiseProduct(m.transpose());
    for (Eigen::Index j = 0; j < per; ++j) {
      const Matrix a = s.v.adjoint() * hc[j] * s.v;
      const Complex dg = p.amplitude_bound * gm.cwiseProduct(a).sum();
      (*gradient)(k * per + j) = 2.0 * (std::conj(g) * dg).real() / (r * r);
    }
    back = s.u.adjoint() * back;
  }
  return phi;
}

GrapeResult grape_optimize(const GrapeProblem& p, const GrapeOptions& o) {
  p.validate();
  const auto n = p.parameter_count();
  Eigen::VectorXd x(n);
  if (o.initial) {
    if (o.initial->size() != n) throw InvalidArgument("GRAPE initial guess has wrong size");
    x = *o.initial;
  } else {
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> u(-o.initial_scale, o.initial_scale);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = u(rng);
  }
  x = x.cwiseMax(-1.0).cwiseMin(1.0);

  // Minimize f = 1 - Phi on the box [-1, 1]^n.
  Eigen::VectorXd grad(n);
  double phi = grape_fidelity(p, x, &grad);
  Eigen::VectorXd g = -grad;
  GrapeResult res;
  res.fidelity_history.push_back(phi);

  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> memory;
  const auto project_direction = [&](Eigen::VectorXd& d) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if ((x(i) >= 1.0 && d(i) > 0.0) || (x(i) <= -1.0 && d(i) < 0.0)) d(i) = 0.0;
    }
  };

  int it = 0;
  for (; it < o.max_iter && 1.0 - phi > o.target_infidelity; ++it) {
    Eigen::VectorXd d = -g;
    if (!memory.empty()) {
      std::vector<double> alpha(memory.size());
      for (int i = static_cast<int>(memory.size()) - 1; i >= 0; --i) {
        const auto& [s, y] = memory[i];
        alpha[i] = s.dot(d) / y.dot(s);
        d -= alpha[i] * y;
      }
      const auto& [s_last, y_last] = memory.back();
      d *= s_last.dot(y_last) / y_last.squaredNorm();
      for (std::size_t i = 0; i < memory.size(); ++i) {
        const auto& [s, y] = memory[i];
        const double beta = y.dot(d) / y.dot(s);
        d += (alpha[i] - beta) * s;
      }
    }
    project_direction(d);
    if (g.dot(d) >= 0.0) {
      memory.clear();
      d = -g;
      project_direction(d);
    }
    if (d.squaredNorm() == 0.0) break;

    double t = memory.empty() ? std::min(1.0, 0.1 / d.cwiseAbs().maxCoeff()) : 1.0;
    bool accepted = false;
    Eigen::VectorXd x_new, grad_new(n);
    double phi_new = phi;
    for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
      x_new = (x + t * d).cwiseMax(-1.0).cwiseMin(1.0);
      phi_new = grape_fidelity(p, x_new, &grad_new);
      if ((1.0 - phi_new) <= (1.0 - phi) + 1e-4 * g.dot(x_new - x) && phi_new > phi) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (memory.empty()) break;
      memory.clear();
      continue;
    }
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = -grad_new - g;
    if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
      memory.emplace_back(s, y);
      if (static_cast<int>(memory.size()) > o.memory) memory.pop_front();
    }
    x = x_new;
    phi = phi_new;
    g = -grad_new;
    res.fidelity_history.push_back(phi);
  }
  res.iterations = it;
  res.fidelity = phi;
  res.converged = 1.0 - phi <= o.target_infidelity;
  res.pulse = pulse_from_parameters(p, x);
  return res;
}

}  // namespace etsim::recovery
