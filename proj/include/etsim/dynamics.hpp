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

// Time evolution: unitary propagators, Lindblad integration, jump-conditioned
// tracks and Monte-Carlo trajectories.
//
// Superoperators act on column-major vectorized density matrices:
// vec(A rho B) = (B^T kron A) vec(rho).

#ifndef ETSIM_DYNAMICS_HPP_
#define ETSIM_DYNAMICS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "etsim/code.hpp"
#include "etsim/model.hpp"
#include "etsim/qcore.hpp"

namespace etsim::dynamics {

using qcore::DensityMatrix;
using qcore::HilbertSpace;
using qcore::Operator;
using qcore::StateVector;

using Segments = std::vector<std::pair<Operator, double>>;

// Largest dt * max|H_ij| accepted by the integrator.
inline constexpr double kMaxStepPhase = 0.05;

struct Collapse {
  std::string label;
  Operator op;  // composite
  double rate;  // 1/s; the jump operator is sqrt(rate) * op
};

class CollapseSet {
 public:
  explicit CollapseSet(HilbertSpace space) : space_(space) {}

  // Throws InvalidArgument for negative rates or non-composite operators.
  void add(std::string label, Operator op, double rate);
  void append(const CollapseSet& other);

  const HilbertSpace& space() const { return space_; }
  const std::vector<Collapse>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  // sqrt(rate) * op for every term with a non-zero rate.
  std::vector<Matrix> jump_operators() const;

 private:
  HilbertSpace space_;
  std::vector<Collapse> terms_;
};

struct NoiseChannels {
  bool cavity_loss = true;
  bool cavity_dephasing = true;
  bool qubit_decay = true;
  bool qubit_thermal = true;
  bool qubit_dephasing = true;
};

CollapseSet standard_collapses(const HilbertSpace& space,
                               const model::NoiseParams& noise,
                               NoiseChannels channels = {});

// sqrt(2 / tphi) a^dag a.
Collapse cavity_dephasing(const HilbertSpace& space, double tphi);
// sqrt(2 / tphi) |e><e|.
Collapse qubit_dephasing(const HilbertSpace& space, double tphi);

// Linear map on composite density matrices.
class Channel {
 public:
  Channel(HilbertSpace space, Matrix super);
  static Channel identity(const HilbertSpace& space);
  static Channel unitary(const Operator& u);

  const HilbertSpace& space() const { return space_; }
  const Matrix& super() const { return super_; }

  DensityMatrix apply(const DensityMatrix& rho) const;
  Matrix apply(const Matrix& rho) const;
  // `next` after this.
  Channel then(const Channel& next) const;
  Channel power(std::uint64_t n) const;

 private:
  HilbertSpace space_;
  Matrix super_;
};

// Ordered product of segment exponentials (first segment acts first).
Operator propagator(std::span<const std::pair<Operator, double>> segments);

// Throws InvalidArgument unless dt * max|H_ij| < kMaxStepPhase.
void check_step(const Operator& h, double dt);

// Channel of the Lindblad equation over t_total using fixed 4th-order steps
// of length t_total / ceil(t_total / dt) (Runge-Kutta in the interaction
// picture of H).
Channel lindblad_channel(const Operator& h, const CollapseSet& collapses,
                         double t_total, double dt);

struct EvolutionOptions {
  double dt = 1e-9;
  int samples = 0;  // equally spaced samples after t = 0; 0 keeps the final state only
  std::vector<Operator> observables;
};

struct EvolutionResult {
  DensityMatrix final_state;
  std::vector<double> times;
  std::vector<std::vector<Complex>> expectations;  // [observable][sample]
  double trace_error = 0.0;
  double clipped_negativity = 0.0;
};

EvolutionResult lindblad_evolve(const DensityMatrix& rho0, const Operator& h,
                                const CollapseSet& collapses, double t_total,
                                const EvolutionOptions& options);

// Piecewise-constant H; each segment is stepped with its own Hamiltonian.
EvolutionResult lindblad_evolve(const DensityMatrix& rho0,
                                std::span<const std::pair<Operator, double>> segments,
                                const CollapseSet& collapses,
                                const EvolutionOptions& options);

// Diagonal cavity operator e^{-kappa_a n t / 2}.
Operator no_jump_map(const HilbertSpace& space, double kappa_a, double t);

struct JumpTrack {
  std::string label;
  double overlap = 0.0;
  double phase = 0.0;  // arg <ref|track>
};

// Compares U(T,t) a U(t,0)|psi_L> with a U(T,0)|psi_L> for the six cardinal
// states. Composite H is reduced with code::ground_manifold.
std::vector<JumpTrack> conditioned_jump_track(const Operator& h,
                                              const code::CodeSpace& code,
                                              double t_jump, double t_total);

// Phase of the track as a function of the jump time, least-squares slope.
double jump_phase_slope(const Operator& h, const code::CodeSpace& code,
                        std::span<const double> jump_times, double t_total);

// SplitMix64 of (root, index); independent per-trajectory seeds.
std::uint64_t trajectory_seed(std::uint64_t root, std::uint64_t index);

struct Jump {
  double time;
  int channel;  // index into CollapseSet::terms()
};

struct TrajectoryOptions {
  double dt = 10e-9;  // jump-time resolution; evolution between jumps is exact
  int samples = 0;
  std::vector<Operator> observables;
};

struct Trajectory {
  StateVector final_state;
  std::vector<Jump> jumps;
  std::vector<std::vector<double>> expectations;  // [observable][sample], real part
};

Trajectory trajectory_run(std::uint64_t seed, const StateVector& psi0,
                          const Operator& h, const CollapseSet& collapses,
                          double t_total, const TrajectoryOptions& options);

struct EnsembleResult {
  DensityMatrix average;
  std::vector<double> times;
  std::vector<std::vector<double>> expectations;
  std::vector<std::size_t> jump_counts;  // per trajectory
};

// Runs n trajectories with seeds trajectory_seed(root, i) on `threads`
// workers. The result does not depend on the thread count.
EnsembleResult trajectory_ensemble(std::uint64_t root_seed, int n,
                                   const StateVector& psi0, const Operator& h,
                                   const CollapseSet& collapses, double t_total,
                                   const TrajectoryOptions& options, int threads = 1);

double trace_distance(const Matrix& a, const Matrix& b);

}  // namespace etsim::dynamics

#endif  // ETSIM_DYNAMICS_HPP_
