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

#include "etsim/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <sstream>
#include <mutex>
#include <thread>

#include <unsupported/Eigen/KroneckerProduct>

#include "etsim/errors.hpp"
#include "etsim/log.hpp"

namespace etsim::dynamics {

using qcore::Subsystem;

namespace {

Matrix identity_matrix(int d) { return Matrix::Identity(d, d); }

// D(rho) = sum L rho L^dag - {L^dag L, rho} / 2 as a superoperator.
Matrix dissipator_super(const std::vector<Matrix>& jumps, int d) {
  const int d2 = d * d;
  Matrix sup = Matrix::Zero(d2, d2);
  const Matrix id = identity_matrix(d);
  for (const auto& l : jumps) {
    const Matrix ldl = l.adjoint() * l;
    sup += Eigen::kroneckerProduct(l.conjugate(), l).eval();
    sup -= 0.5 * Eigen::kroneckerProduct(id, ldl).eval();
    sup -= 0.5 * Eigen::kroneckerProduct(ldl.transpose(), id).eval();
  }
  return sup;
}

// Superoperator of rho -> U rho U^dag.
Matrix unitary_super(const Matrix& u) {
  return Eigen::kroneckerProduct(u.conjugate(), u).eval();
}

Matrix vec(const Matrix& rho) {
  return Eigen::Map<const Vector>(rho.data(), rho.size());
}

Matrix unvec(const Vector& v, int d) { return Eigen::Map<const Matrix>(v.data(), d, d); }

// One 4th-order step of length h in the interaction picture of H, given
// A = superoperator of the half-step unitary and D = dissipator.
Matrix rk4ip_step_super(const Matrix& a, const Matrix& dis, double h) {
  const Matrix k1 = h * (a * dis);
  const Matrix k2 = h * (dis * (a + 0.5 * k1));
  const Matrix k3 = h * (dis * (a + 0.5 * k2));
  const Matrix k4 = h * (dis * (a * (a + k3)));
  return a * (a + k1 / 6.0 + k2 / 3.0 + k3 / 3.0) + k4 / 6.0;
}

struct StateStepper {
  std::vector<Matrix> jumps;
  Matrix ldl_sum;

  explicit StateStepper(const CollapseSet& c) : jumps(c.jump_operators()) {
    const int d = c.space().total_dim();
    ldl_sum = Matrix::Zero(d, d);
    for (const auto& l : jumps) ldl_sum += l.adjoint() * l;
  }

  Matrix dissipate(const Matrix& rho) const {
    Matrix out = -0.5 * (ldl_sum * rho + rho * ldl_sum);
    for (const auto& l : jumps) out += l * rho * l.adjoint();
    return out;
  }

  Matrix step(const Matrix& rho, const Matrix& u_half, double h) const {
    const auto half = [&](const Matrix& m) -> Matrix { return u_half * m * u_half.adjoint(); };
    const Matrix rho_i = half(rho);
    const Matrix k1 = half(h * dissipate(rho));
    const Matrix k2 = h * dissipate(rho_i + 0.5 * k1);
    const Matrix k3 = h * dissipate(rho_i + 0.5 * k2);
    const Matrix k4 = h * dissipate(half(rho_i + k3));
    return half(rho_i + k1 / 6.0 + k2 / 3.0 + k3 / 3.0) + k4 / 6.0;
  }
};

long step_count(double t, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("dt must be > 0");
  if (t < 0.0) throw InvalidArgument("evolution time must be >= 0");
  return std::max(1L, static_cast<long>(std::ceil(t / dt - 1e-9)));
}

void require_composite(const Operator& h) {
  if (h.subsystem() != Subsystem::kComposite) {
    throw InvalidArgument("dynamics expects composite operators");
  }
  if (!h.is_hermitian(1e-9 * std::max(1.0, qcore::max_abs(h.matrix())))) {
    throw InvalidArgument("Hamiltonian must be Hermitian");
  }
}

void record(EvolutionResult& r, const Matrix& rho, double t,
            const std::vector<Operator>& observables) {
  r.times.push_back(t);
  for (std::size_t k = 0; k < observables.size(); ++k) {
    r.expectations[k].push_back((observables[k].matrix() * rho).trace());
  }
  r.trace_error = std::max(r.trace_error, std::abs(rho.trace() - 1.0));
}

DensityMatrix finalize(EvolutionResult& r, const HilbertSpace& space, Matrix rho) {
  rho = 0.5 * (rho + rho.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(rho);
  const double min_eval = eig.eigenvalues().minCoeff();
  if (min_eval < 0.0) {
    r.clipped_negativity = -min_eval;
    if (min_eval < -1e-6) {
      std::ostringstream msg;
      msg << "lindblad_evolve: negative eigenvalue " << min_eval << " clipped";
      log_warning(msg.str());
    }
    const double tr = rho.trace().real();
    const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
    rho = eig.eigenvectors() * clipped.cast<Complex>().asDiagonal() *
          eig.eigenvectors().adjoint();
    rho *= tr / rho.trace().real();
  }
  return DensityMatrix::unchecked(space, Subsystem::kComposite, std::move(rho));
}

}  // namespace

void CollapseSet::add(std::string label, Operator op, double rate) {
  if (!(rate >= 0.0)) throw InvalidArgument("collapse rate must be >= 0: " + label);
  if (op.subsystem() != Subsystem::kComposite || !(op.space() == space_)) {
    throw InvalidArgument("collapse operator must be composite on the set's space: " + label);
  }
  terms_.push_back({std::move(label), std::move(op), rate});
}

void CollapseSet::append(const CollapseSet& other) {
  for (const auto& t : other.terms()) add(t.label, t.op, t.rate);
}

std::vector<Matrix> CollapseSet::jump_operators() const {
  std::vector<Matrix> out;
  for (const auto& t : terms_) {
    if (t.rate > 0.0) out.push_back(std::sqrt(t.rate) * t.op.matrix());
  }
  return out;
}

Collapse cavity_dephasing(const HilbertSpace& space, double tphi) {
  if (!(tphi > 0.0)) throw InvalidArgument("cavity tphi must be > 0");
  return {"cavity_dephasing", qcore::embed_cavity(qcore::number_cavity(space)), 2.0 / tphi};
}

Collapse qubit_dephasing(const HilbertSpace& space, double tphi) {
  if (!(tphi > 0.0)) throw InvalidArgument("qubit tphi must be > 0");
  const Operator id = qcore::identity(space, Subsystem::kCavity);
  return {"qubit_dephasing", qcore::tensor(id, qcore::projector_e(space)), 2.0 / tphi};
}

CollapseSet standard_collapses(const HilbertSpace& space, const model::NoiseParams& noise,
                               NoiseChannels ch) {
  noise.validate();
  CollapseSet set(space);
  const Operator id = qcore::identity(space, Subsystem::kCavity);
  if (ch.cavity_loss) set.add("cavity_loss", qcore::destroy(space), noise.kappa_a());
  if (ch.cavity_dephasing) {
    auto c = cavity_dephasing(space, noise.cavity_tphi);
    set.add(c.label, c.op, c.rate);
  }
  if (ch.qubit_decay) {
    set.add("qubit_decay", qcore::tensor(id, qcore::sigma_minus(space)), noise.kappa_q());
  }
  if (ch.qubit_thermal && noise.n_th > 0.0) {
    set.add("qubit_thermal", qcore::tensor(id, qcore::sigma_plus(space)),
            noise.kappa_q() * noise.n_th / (1.0 - noise.n_th));
  }
  if (ch.qubit_dephasing) {
    auto c = qubit_dephasing(space, noise.qubit_tphi);
    set.add(c.label, c.op, c.rate);
  }
  return set;
}

Channel::Channel(HilbertSpace space, Matrix super) : space_(space), super_(std::move(super)) {
  const int d2 = space_.total_dim() * space_.total_dim();
  if (super_.rows() != d2 || super_.cols() != d2) {
    throw InvalidArgument("channel superoperator has the wrong dimension");
  }
}

Channel Channel::identity(const HilbertSpace& space) {
  const int d2 = space.total_dim() * space.total_dim();
  return Channel(space, Matrix::Identity(d2, d2));
}

Channel Channel::unitary(const Operator& u) {
  if (u.subsystem() != Subsystem::kComposite) {
    throw InvalidArgument("Channel::unitary expects a composite operator");
  }
  return Channel(u.space(), unitary_super(u.matrix()));
}

Matrix Channel::apply(const Matrix& rho) const {
  return unvec(super_ * vec(rho), space_.total_dim());
}

DensityMatrix Channel::apply(const DensityMatrix& rho) const {
  if (rho.subsystem() != Subsystem::kComposite || !(rho.space() == space_)) {
    throw InvalidArgument("channel applied to a state on another space");
  }
  return DensityMatrix::unchecked(space_, Subsystem::kComposite, apply(rho.matrix()));
}

Channel Channel::then(const Channel& next) const {
  if (!(next.space_ == space_)) throw InvalidArgument("channel spaces differ");
  return Channel(space_, next.super_ * super_);
}

Channel Channel::power(std::uint64_t n) const {
  const long d2 = super_.rows();
  Matrix result = Matrix::Identity(d2, d2);
  Matrix base = super_;
  bool first = true;
  while (n > 0) {
    if (n & 1U) {
      result = first ? base : Matrix(base * result);
      first = false;
    }
    n >>= 1U;
    if (n > 0) base = base * base;
  }
  return Channel(space_, std::move(result));
}

Operator propagator(std::span<const std::pair<Operator, double>> segments) {
  if (segments.empty()) throw InvalidArgument("propagator needs at least one segment");
  const auto& first = segments.front().first;
  Matrix u = Matrix::Identity(first.dim(), first.dim());
  for (const auto& [h, duration] : segments) {
    if (!(h.space() == first.space()) || h.subsystem() != first.subsystem()) {
      throw InvalidArgument("propagator segments live on different spaces");
    }
    u = qcore::expm(h, duration).matrix() * u;
  }
  return Operator(first.space(), first.subsystem(), std::move(u));
}

void check_step(const Operator& h, double dt) {
  const double phase = dt * qcore::max_abs(h.matrix());
  if (!(phase < kMaxStepPhase)) {
    std::ostringstream msg;
    msg << "step rejected: dt * max|H| = " << phase << " >= " << kMaxStepPhase
        << " (dt must be < " << kMaxStepPhase / qcore::max_abs(h.matrix()) << " s)";
    throw InvalidArgument(msg.str());
  }
}

Channel lindblad_channel(const Operator& h, const CollapseSet& collapses, double t_total,
                         double dt) {
  require_composite(h);
  if (!(collapses.space() == h.space())) throw InvalidArgument("collapse space differs from H");
  if (t_total == 0.0) return Channel::identity(h.space());
  check_step(h, dt);
  const long n = step_count(t_total, dt);
  const double step = t_total / static_cast<double>(n);
  const int d = h.dim();
  const Matrix a = unitary_super(qcore::expm_hermitian(h.matrix(), 0.5 * step));
  const auto jumps = collapses.jump_operators();
  if (jumps.empty()) {
    return Channel(h.space(), unitary_super(qcore::expm_hermitian(h.matrix(), t_total)));
  }
  const Matrix s = rk4ip_step_super(a, dissipator_super(jumps, d), step);
  return Channel(h.space(), s).power(static_cast<std::uint64_t>(n));
}

EvolutionResult lindblad_evolve(const DensityMatrix& rho0, const Operator& h,
                                const CollapseSet& collapses, double t_total,
                                const EvolutionOptions& options) {
  require_composite(h);
  if (rho0.subsystem() != Subsystem::kComposite || !(rho0.space() == h.space())) {
    throw InvalidArgument("initial state must be composite on the space of H");
  }
  check_step(h, options.dt);
  const int samples = std::max(1, options.samples);
  const double interval = t_total / samples;
  const Channel chunk = lindblad_channel(h, collapses, interval, options.dt);

  EvolutionResult r{rho0, {}, std::vector<std::vector<Complex>>(options.observables.size()),
                    0.0, 0.0};
  Matrix rho = rho0.matrix();
  if (options.samples > 0) record(r, rho, 0.0, options.observables);
  for (int k = 1; k <= samples; ++k) {
    rho = chunk.apply(rho);
    if (options.samples > 0) record(r, rho, k * interval, options.observables);
  }
  r.trace_error = std::max(r.trace_error, std::abs(rho.trace() - 1.0));
  r.final_state = finalize(r, h.space(), std::move(rho));
  return r;
}

EvolutionResult lindblad_evolve(const DensityMatrix& rho0,
                                std::span<const std::pair<Operator, double>> segments,
                                const CollapseSet& collapses,
                                const EvolutionOptions& options) {
  if (segments.empty()) throw InvalidArgument("no Hamiltonian segments");
  const StateStepper stepper(collapses);
  EvolutionResult r{rho0, {}, std::vector<std::vector<Complex>>(options.observables.size()),
                    0.0, 0.0};
  Matrix rho = rho0.matrix();
  double t = 0.0;
  record(r, rho, t, options.observables);
  for (const auto& [h, duration] : segments) {
    require_composite(h);
    check_step(h, options.dt);
    const long n = step_count(duration, options.dt);
    const double step = duration / static_cast<double>(n);
    const Matrix u_half = qcore::expm_hermitian(h.matrix(), 0.5 * step);
    for (long k = 0; k < n; ++k) rho = stepper.step(rho, u_half, step);
    t += duration;
    record(r, rho, t, options.observables);
  }
  r.final_state = finalize(r, rho0.space(), std::move(rho));
  return r;
}

Operator no_jump_map(const HilbertSpace& space, double kappa_a, double t) {
  if (t < 0.0) throw InvalidArgument("no_jump_map: t must be >= 0");
  Matrix m = Matrix::Zero(space.cavity_dim, space.cavity_dim);
  for (int n = 0; n < space.cavity_dim; ++n) m(n, n) = std::exp(-0.5 * kappa_a * n * t);
  return Operator(space, Subsystem::kCavity, std::move(m));
}

std::vector<JumpTrack> conditioned_jump_track(const Operator& h_in,
                                              const code::CodeSpace& code, double t_jump,
                                              double t_total) {
  if (!(t_jump >= 0.0 && t_jump <= t_total)) {
    throw InvalidArgument("conditioned_jump_track: need 0 <= t_jump <= T");
  }
  const Operator h =
      h_in.subsystem() == Subsystem::kComposite ? code::ground_manifold(h_in) : h_in;
  const Matrix& a = code.errors.front().matrix();
  const Matrix u_full = qcore::expm_hermitian(h.matrix(), t_total);
  const Matrix u_before = qcore::expm_hermitian(h.matrix(), t_jump);
  const Matrix u_after = qcore::expm_hermitian(h.matrix(), t_total - t_jump);

  std::vector<JumpTrack> out;
  for (const auto& f : code::fiducials()) {
    const Vector psi = code::encode(code, f.logical).amplitudes();
    const Vector ref = (a * (u_full * psi)).normalized();
    const Vector track = (u_after * (a * (u_before * psi))).normalized();
    const Complex ov = ref.dot(track);
    out.push_back({f.label, std::abs(ov), std::arg(ov)});
  }
  return out;
}

double jump_phase_slope(const Operator& h, const code::CodeSpace& code,
                        std::span<const double> jump_times, double t_total) {
  if (jump_times.size() < 2) throw InvalidArgument("need at least two jump times");
  std::vector<double> phase;
  for (double t : jump_times) {
    const double p = conditioned_jump_track(h, code, t, t_total)[2].phase;  // +X
    if (phase.empty()) {
      phase.push_back(p);
    } else {
      double q = p;
      while (q - phase.back() > std::numbers::pi) q -= kTwoPi;
      while (q - phase.back() < -std::numbers::pi) q += kTwoPi;
      phase.push_back(q);
    }
  }
  const auto n = static_cast<double>(jump_times.size());
  double st = 0, sp = 0, stt = 0, stp = 0;
  for (std::size_t k = 0; k < jump_times.size(); ++k) {
    st += jump_times[k];
    sp += phase[k];
    stt += jump_times[k] * jump_times[k];
    stp += jump_times[k] * phase[k];
  }
  return (n * stp - st * sp) / (n * stt - st * st);
}

std::uint64_t trajectory_seed(std::uint64_t root, std::uint64_t index) {
  std::uint64_t z = root + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Trajectory trajectory_run(std::uint64_t seed, const StateVector& psi0, const Operator& h,
                          const CollapseSet& collapses, double t_total,
                          const TrajectoryOptions& options) {
  require_composite(h);
  if (psi0.subsystem() != Subsystem::kComposite) {
    throw InvalidArgument("trajectory initial state must be composite");
  }
  const int samples = std::max(1, options.samples);
  const long per_sample = step_count(t_total / samples, options.dt);
  const double step = t_total / static_cast<double>(samples * per_sample);

  std::vector<Matrix> jumps;
  std::vector<int> channel_index;
  Matrix h_eff = h.matrix();
  for (std::size_t k = 0; k < collapses.terms().size(); ++k) {
    const auto& term = collapses.terms()[k];
    if (term.rate <= 0.0) continue;
    const Matrix l = std::sqrt(term.rate) * term.op.matrix();
    h_eff -= 0.5 * kI * (l.adjoint() * l);
    jumps.push_back(l);
    channel_index.push_back(static_cast<int>(k));
  }
  const Matrix m = jumps.empty() ? qcore::expm_hermitian(h.matrix(), step)
                                 : qcore::expm_general(-kI * step * h_eff);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  double threshold = uniform(rng);

  Trajectory tr{psi0, {}, std::vector<std::vector<double>>(options.observables.size())};
  Vector psi = psi0.amplitudes();
  const auto sample = [&](const Vector& v) {
    const Vector u = v.normalized();
    for (std::size_t k = 0; k < options.observables.size(); ++k) {
      tr.expectations[k].push_back(u.dot(options.observables[k].matrix() * u).real());
    }
  };
  if (options.samples > 0) sample(psi);

  std::vector<double> weights(jumps.size());
  long step_index = 0;
  for (int s = 0; s < samples; ++s) {
    for (long k = 0; k < per_sample; ++k) {
      psi = m * psi;
      ++step_index;
      if (jumps.empty() || psi.squaredNorm() > threshold) continue;
      double total = 0.0;
      for (std::size_t j = 0; j < jumps.size(); ++j) {
        weights[j] = (jumps[j] * psi).squaredNorm();
        total += weights[j];
      }
      double pick = uniform(rng) * total;
      std::size_t chosen = 0;
      while (chosen + 1 < jumps.size() && pick >= weights[chosen]) pick -= weights[chosen++];
      psi = (jumps[chosen] * psi).normalized();
      tr.jumps.push_back({step_index * step, channel_index[chosen]});
      threshold = uniform(rng);
    }
    if (options.samples > 0) sample(psi);
  }
  tr.final_state = StateVector::normalized(psi0.space(), Subsystem::kComposite, psi);
  return tr;
}

EnsembleResult trajectory_ensemble(std::uint64_t root_seed, int n, const StateVector& psi0,
                                   const Operator& h, const CollapseSet& collapses,
                                   double t_total, const TrajectoryOptions& options,
                                   int threads) {
  if (n < 1) throw InvalidArgument("trajectory count must be >= 1");
  std::vector<std::optional<Trajectory>> runs(n);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        runs[i] = trajectory_run(trajectory_seed(root_seed, i), psi0, h, collapses, t_total,
                                 options);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int workers = std::clamp(threads, 1, n);
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  const int d = psi0.dim();
  Matrix avg = Matrix::Zero(d, d);
  EnsembleResult r{DensityMatrix::from_pure(psi0), {}, {}, {}};
  r.expectations.assign(options.observables.size(), {});
  for (int i = 0; i < n; ++i) {
    const Vector& v = runs[i]->final_state.amplitudes();
    avg += v * v.adjoint();
    r.jump_counts.push_back(runs[i]->jumps.size());
    for (std::size_t k = 0; k < options.observables.size(); ++k) {
      auto& dst = r.expectations[k];
      const auto& src = runs[i]->expectations[k];
      if (dst.empty()) dst.assign(src.size(), 0.0);
      for (std::size_t s = 0; s < src.size(); ++s) dst[s] += src[s] / n;
    }
  }
  const int samples = std::max(1, options.samples);
  if (options.samples > 0) {
    for (int s = 0; s <= samples; ++s) r.times.push_back(t_total * s / samples);
  }
  r.average = DensityMatrix::unchecked(psi0.space(), Subsystem::kComposite, avg / n);
  return r;
}

double trace_distance(const Matrix& a, const Matrix& b) {
  const Matrix diff = 0.5 * ((a - b) + (a - b).adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(diff);
  return 0.5 * eig.eigenvalues().cwiseAbs().sum();
}

}  // namespace etsim::dynamics
