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

#include "etsim/tomography.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "etsim/errors.hpp"
#include "etsim/log.hpp"
#include "etsim/recovery.hpp"

namespace etsim::tomography {

using qcore::Subsystem;

namespace {

Matrix cavity_matrix(const DensityMatrix& rho) {
  if (rho.subsystem() == Subsystem::kCavity) return rho.matrix();
  if (rho.subsystem() == Subsystem::kComposite) return qcore::partial_trace_ancilla(rho).matrix();
  throw InvalidArgument("expected a cavity or composite state");
}

// <m| D(beta) |n> from the associated Laguerre form.
Complex displacement_element(int m, int n, Complex beta) {
  const double x = std::norm(beta);
  const double gauss = std::exp(-0.5 * x);
  if (m >= n) {
    const double pre = std::exp(0.5 * (std::lgamma(n + 1.0) - std::lgamma(m + 1.0)));
    return pre * std::pow(beta, m - n) * gauss *
           std::assoc_laguerre(static_cast<unsigned>(n), static_cast<unsigned>(m - n), x);
  }
  const double pre = std::exp(0.5 * (std::lgamma(m + 1.0) - std::lgamma(n + 1.0)));
  return pre * std::pow(-std::conj(beta), n - m) * gauss *
         std::assoc_laguerre(static_cast<unsigned>(m), static_cast<unsigned>(n - m), x);
}

const std::array<Eigen::Matrix2cd, 4>& paulis() {
  static const std::array<Eigen::Matrix2cd, 4> p = [] {
    std::array<Eigen::Matrix2cd, 4> out;
    out[0] << 1, 0, 0, 1;
    out[1] << 0, 1, 1, 0;
    out[2] << 0, Complex(0, -1), Complex(0, 1), 0;
    out[3] << 1, 0, 0, -1;
    return out;
  }();
  return p;
}

std::array<Eigen::Vector3d, 6> decode_all(const std::array<std::optional<DensityMatrix>, 6>& s,
                                          const code::CodeSpace& code) {
  std::array<Eigen::Vector3d, 6> out;
  for (int k = 0; k < 6; ++k) out[k] = bloch_vector(decode_logical(*s[k], code));
  return out;
}

}  // namespace

void WignerGrid::validate() const {
  if (nx < 1 || ny < 1) throw InvalidArgument("Wigner grid needs at least one point per axis");
  if (!(x_max >= x_min && y_max >= y_min)) throw InvalidArgument("Wigner grid bounds inverted");
}

double WignerGrid::x(int i) const {
  return nx == 1 ? x_min : x_min + (x_max - x_min) * i / (nx - 1);
}

double WignerGrid::y(int j) const {
  return ny == 1 ? y_min : y_min + (y_max - y_min) * j / (ny - 1);
}

double WignerGrid::cell_area() const {
  const double dx = nx > 1 ? (x_max - x_min) / (nx - 1) : 0.0;
  const double dy = ny > 1 ? (y_max - y_min) / (ny - 1) : 0.0;
  return dx * dy;
}

double WignerMap::integral() const { return values.sum() * grid.cell_area(); }

WignerMap wigner(const DensityMatrix& rho, const WignerGrid& grid) {
  grid.validate();
  const Matrix r = cavity_matrix(rho);
  const int nc = static_cast<int>(r.rows());
  if (std::abs(r(nc - 1, nc - 1)) > 1e-3) {
    std::ostringstream msg;
    msg << "wigner: top Fock level population " << std::abs(r(nc - 1, nc - 1))
        << "; the state may be truncated";
    log_warning(msg.str());
  }
  WignerMap w{grid, RealMatrix(grid.ny, grid.nx)};
  // W(alpha) = (2/pi) Tr[D(2 alpha) P rho].
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const Complex beta = 2.0 * Complex(grid.x(i), grid.y(j));
      Complex acc = 0.0;
      for (int m = 0; m < nc; ++m) {
        for (int n = 0; n < nc; ++n) {
          if (r(n, m) == Complex(0.0)) continue;
          acc += displacement_element(m, n, beta) * (n % 2 == 0 ? 1.0 : -1.0) * r(n, m);
        }
      }
      w.values(j, i) = 2.0 / std::numbers::pi * acc.real();
    }
  }
  return w;
}

ParityBranches parity_postselect(const DensityMatrix& rho) {
  const Matrix r = cavity_matrix(rho);
  const auto nc = r.rows();
  Matrix even = Matrix::Zero(nc, nc), odd = Matrix::Zero(nc, nc);
  for (Eigen::Index m = 0; m < nc; ++m) {
    for (Eigen::Index n = 0; n < nc; ++n) {
      if (m % 2 != n % 2) continue;
      (m % 2 == 0 ? even : odd)(m, n) = r(m, n);
    }
  }
  ParityBranches b;
  const double total = r.trace().real();
  b.p_even = even.trace().real() / total;
  b.p_odd = odd.trace().real() / total;
  const auto& space = rho.space();
  if (b.p_even > 1e-14) {
    b.even = DensityMatrix::unchecked(space, Subsystem::kCavity, even / even.trace().real());
  }
  if (b.p_odd > 1e-14) {
    b.odd = DensityMatrix::unchecked(space, Subsystem::kCavity, odd / odd.trace().real());
  }
  return b;
}

Eigen::Matrix2cd decode_logical(const DensityMatrix& rho, const code::CodeSpace& code) {
  const Matrix c = code.code_basis();
  Eigen::Matrix2cd l = c.adjoint() * cavity_matrix(rho) * c;
  const double p = l.trace().real();
  l += 0.5 * (1.0 - p) * Eigen::Matrix2cd::Identity();
  return l;
}

Eigen::Vector3d bloch_vector(const Eigen::Matrix2cd& rho) {
  const auto& p = paulis();
  return {(p[1] * rho).trace().real(), (p[2] * rho).trace().real(),
          (p[3] * rho).trace().real()};
}

PauliTransferMatrix ptm_from_outputs(std::span<const Eigen::Vector3d, 6> s) {
  PauliTransferMatrix r;
  r.r.setZero();
  r.r(0, 0) = 1.0;
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  for (const auto& v : s) t += v / 6.0;
  r.r.block<3, 1>(1, 0) = t;
  // Fiducial order: +Z, -Z, +X, -X, +Y, -Y.
  r.r.block<3, 1>(1, 1) = 0.5 * (s[2] - s[3]);
  r.r.block<3, 1>(1, 2) = 0.5 * (s[4] - s[5]);
  r.r.block<3, 1>(1, 3) = 0.5 * (s[0] - s[1]);
  return r;
}

PauliTransferMatrix unitary_ptm(const Eigen::Matrix2cd& u) {
  const auto& p = paulis();
  PauliTransferMatrix r;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) r.r(i, j) = 0.5 * (p[i] * u * p[j] * u.adjoint()).trace().real();
  }
  return r;
}

PauliTransferMatrix compose(const PauliTransferMatrix& second, const PauliTransferMatrix& first) {
  return {second.r * first.r};
}

double process_fidelity(const PauliTransferMatrix& r, const PauliTransferMatrix& ideal) {
  return (ideal.r.transpose() * r.r).trace() / 4.0;
}

double average_fidelity(double f) { return (2.0 * f + 1.0) / 3.0; }

double logical_phase(const PauliTransferMatrix& r) {
  return std::atan2(r.r(2, 1) - r.r(1, 2), r.r(1, 1) + r.r(2, 2));
}

const char* to_string(RecoveryPolicy p) {
  switch (p) {
    case RecoveryPolicy::kNone:
      return "none";
    case RecoveryPolicy::kIdealDecode:
      return "ideal-decode";
    case RecoveryPolicy::kFlagSplit:
      return "flag-split";
  }
  return "?";
}

PtmResult logical_ptm(const LogicalChannel& channel, const code::CodeSpace& code,
                      RecoveryPolicy policy, const Eigen::Matrix2cd& ancilla) {
  const auto& space = code.space;
  const std::optional<recovery::AqecSettings> decoder =
      policy == RecoveryPolicy::kIdealDecode
          ? std::optional(recovery::AqecSettings{recovery::ideal_aqec_unitary(code, 0.0, 0.0),
                                                 0.0, 0.0, std::nullopt})
          : std::nullopt;
  std::array<std::optional<DensityMatrix>, 6> totals, codes, errors;
  PtmResult res;
  bool have_code = true, have_error = true;
  for (int k = 0; k < 6; ++k) {
    const Vector psi = code::encode(code, code::fiducials()[k].logical).amplitudes();
    const Matrix rho_in = Eigen::kroneckerProduct(Matrix(psi * psi.adjoint()), Matrix(ancilla));
    ChannelOutput out =
        channel(DensityMatrix::unchecked(space, Subsystem::kComposite, rho_in));
    totals[k] = decoder ? recovery::aqec_cycle(out.state, *decoder).state : out.state;
    res.p_error[k] = out.p_error;
    codes[k] = out.code_branch;
    errors[k] = out.error_branch;
    have_code = have_code && codes[k].has_value();
    have_error = have_error && errors[k].has_value();
  }
  const auto total_bloch = decode_all(totals, code);
  res.total = ptm_from_outputs(total_bloch);
  if (policy == RecoveryPolicy::kFlagSplit) {
    double pe = 0.0;
    for (double p : res.p_error) pe += p / 6.0;
    res.weight_error = pe;
    res.weight_code = 1.0 - pe;
    if (have_code) res.code = ptm_from_outputs(decode_all(codes, code));
    if (have_error) res.error = ptm_from_outputs(decode_all(errors, code));
  }
  return res;
}

ExponentialFit fit_exponential(std::span<const double> t, std::span<const double> f,
                               std::optional<double> floor) {
  if (t.size() != f.size()) throw InvalidArgument("fit_exponential: size mismatch");
  if (t.size() < 4) throw InvalidArgument("fit_exponential needs at least four samples");
  const auto n = static_cast<Eigen::Index>(t.size());
  ExponentialFit fit;

  const double mean = std::accumulate(f.begin(), f.end(), 0.0) / n;
  double spread = 0.0;
  for (double v : f) spread = std::max(spread, std::abs(v - mean));
  if (spread < 1e-12) {
    fit.lifetime = std::numeric_limits<double>::infinity();
    fit.floor = floor.value_or(mean);
    fit.amplitude = mean - fit.floor;
    fit.degenerate = true;
    return fit;
  }

  // Parameters: (A, k) or (A, k, F0), with tau = 1 / k.
  const bool free_floor = !floor.has_value();
  double f0 = floor.value_or(std::min(*std::min_element(f.begin(), f.end()) - 1e-3, 0.25));
  // Log-linear initial guess on the points above the floor.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int used = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (f[i] - f0 <= 1e-9) continue;
    const double y = std::log(f[i] - f0);
    sx += t[i];
    sy += y;
    sxx += t[i] * t[i];
    sxy += t[i] * y;
    ++used;
  }
  double k = 0.0, a = f[0] - f0;
  if (used >= 2 && used * sxx - sx * sx > 0) {
    const double slope = (used * sxy - sx * sy) / (used * sxx - sx * sx);
    k = std::max(-slope, 0.0);
    a = std::exp((sy - slope * sx) / used);
  }
  if (k == 0.0) k = 1.0 / std::max(t.back() - t.front(), 1e-300);

  Eigen::VectorXd p(free_floor ? 3 : 2);
  p(0) = a;
  p(1) = k;
  if (free_floor) p(2) = f0;
  const auto residuals = [&](const Eigen::VectorXd& q, Eigen::MatrixXd* jac) {
    Eigen::VectorXd r(n);
    if (jac) jac->resize(n, q.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      const double e = std::exp(-q(1) * t[i]);
      const double floor_i = free_floor ? q(2) : f0;
      r(i) = q(0) * e + floor_i - f[i];
      if (jac) {
        (*jac)(i, 0) = e;
        (*jac)(i, 1) = -q(0) * t[i] * e;
        if (free_floor) (*jac)(i, 2) = 1.0;
      }
    }
    return r;
  };
  // Levenberg-Marquardt.
  double lambda = 1e-3;
  Eigen::MatrixXd jac;
  Eigen::VectorXd r = residuals(p, &jac);
  for (int it = 0; it < 500; ++it) {
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    Eigen::MatrixXd lhs = jtj;
    lhs.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-300);
    const Eigen::VectorXd step = lhs.ldlt().solve(-g);
    const Eigen::VectorXd trial = p + step;
    const Eigen::VectorXd r_trial = residuals(trial, nullptr);
    if (r_trial.squaredNorm() < r.squaredNorm()) {
      const bool done = step.cwiseAbs().cwiseQuotient(p.cwiseAbs().cwiseMax(1e-300)).maxCoeff() < 1e-12;
      p = trial;
      r = residuals(p, &jac);
      lambda = std::max(lambda / 3.0, 1e-12);
      if (done) break;
    } else {
      lambda *= 4.0;
      if (lambda > 1e12) break;
    }
  }
  fit.amplitude = p(0);
  fit.floor = free_floor ? p(2) : f0;
  fit.residual = std::sqrt(r.squaredNorm() / n);
  if (!(p(1) > 0.0)) {
    fit.lifetime = std::numeric_limits<double>::infinity();
    fit.degenerate = true;
  } else {
    fit.lifetime = 1.0 / p(1);
  }
  return fit;
}

}  // namespace etsim::tomography
