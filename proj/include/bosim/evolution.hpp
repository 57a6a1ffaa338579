// Copyright 2026 the bosim authors
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

#ifndef BOSIM_EVOLUTION_HPP
#define BOSIM_EVOLUTION_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "bosim/device.hpp"
#include "bosim/error.hpp"
#include "bosim/fock.hpp"

namespace bosim {

// One additive Hamiltonian piece: H_k = scale * matrix, with `scale` the
// characteristic angular coefficient (rad/us) and `matrix` a dimensionless
// Hermitian pattern. The total Hamiltonian is the sum over terms.
struct HamiltonianTerm {
  std::string label;
  OperatorMatrix matrix;
  double scale = 0.0;  // rad/us
};

inline HamiltonianTerm make_hamiltonian_term(std::string label, OperatorMatrix matrix, double scale) {
  const double magnitude = matrix.size() > 0 ? matrix.cwiseAbs().maxCoeff() : 0.0;
  if (!is_hermitian(matrix, kConstructionTol * std::max(1.0, magnitude)))
    fail(ErrorCode::InvalidHamiltonian, "term '" + label + "' is not Hermitian");
  return HamiltonianTerm{std::move(label), std::move(matrix), scale};
}

// Conversion (beamsplitter) coupling between the two memories:
// H/hbar = 2*pi*g (e^{i phi} a b+  +  e^{-i phi} a+ b).
inline HamiltonianTerm bilinear_hamiltonian(const ModeSpace& space, double g_mhz, double phi) {
  if (space.num_modes() != 2) fail(ErrorCode::InvalidSpace, "bilinear coupling needs a two-mode space");
  const OperatorMatrix ab_dag = tensor(annihilation_op(space.dim(0)), creation_op(space.dim(1)));
  const Complex phase = std::exp(Complex(0.0, phi));
  OperatorMatrix m = phase * ab_dag + std::conj(phase) * ab_dag.adjoint();
  return make_hamiltonian_term("bilinear", std::move(m), kTwoPi * g_mhz);
}

// Self- and cross-Kerr of the two memories:
// H/hbar = -2*pi [ chi_aa/2 n_a(n_a-1) + chi_bb/2 n_b(n_b-1) + chi_ab n_a n_b ].
inline HamiltonianTerm kerr_hamiltonian(const ModeSpace& space, double chi_aa, double chi_bb, double chi_ab) {
  if (space.num_modes() != 2) fail(ErrorCode::InvalidSpace, "Kerr term needs a two-mode space");
  const double chi_max = std::max({std::abs(chi_aa), std::abs(chi_bb), std::abs(chi_ab)});
  OperatorMatrix m = OperatorMatrix::Zero(space.total_dim(), space.total_dim());
  if (chi_max == 0.0) return HamiltonianTerm{"kerr", std::move(m), 0.0};
  for (int i = 0; i < space.total_dim(); ++i) {
    const std::vector<int> occ = space.unflatten(i);
    const double na = occ[0], nb = occ[1];
    const double shift = 0.5 * chi_aa * na * (na - 1.0) + 0.5 * chi_bb * nb * (nb - 1.0) + chi_ab * na * nb;
    m(i, i) = -shift / chi_max;
  }
  return HamiltonianTerm{"kerr", std::move(m), kTwoPi * chi_max};
}

// Dispersive phase accumulation on one mode: H/hbar = 2*pi*chi * n_mode.
inline HamiltonianTerm number_hamiltonian(const ModeSpace& space, int mode, double chi_mhz) {
  return make_hamiltonian_term("number_m" + std::to_string(mode), lift(number_op(space.dim(mode)), space, mode),
                               kTwoPi * chi_mhz);
}

inline OperatorMatrix total_hamiltonian(std::span<const HamiltonianTerm> terms, int dim) {
  OperatorMatrix h = OperatorMatrix::Zero(dim, dim);
  for (const auto& t : terms) {
    if (t.matrix.rows() != dim || t.matrix.cols() != dim)
      fail(ErrorCode::DimensionMismatch, "Hamiltonian term '" + t.label + "' has wrong dimension");
    if (t.scale != 0.0) h += t.scale * t.matrix;
  }
  return h;
}

// exp(-i H t) through the eigendecomposition of the Hermitian H (rad/us, us).
inline Matrix hermitian_propagator(const OperatorMatrix& h, double t) {
  const double magnitude = h.size() > 0 ? h.cwiseAbs().maxCoeff() : 0.0;
  if (!is_hermitian(h, kConstructionTol * std::max(1.0, magnitude)))
    fail(ErrorCode::InvalidHamiltonian, "propagator input is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) fail(ErrorCode::InvalidHamiltonian, "eigendecomposition failed");
  Vector phases(h.rows());
  for (int i = 0; i < h.rows(); ++i) phases(i) = std::exp(Complex(0.0, -es.eigenvalues()(i) * t));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// Closed evolution under the summed terms for time t (us), forward sign
// convention exp(-i H t).
inline QuantumState propagate_unitary(const QuantumState& state, std::span<const HamiltonianTerm> terms, double t) {
  if (t < 0) fail(ErrorCode::InvalidParams, "propagation time must be nonnegative");
  const Matrix u = hermitian_propagator(total_hamiltonian(terms, state.space().total_dim()), t);
  return apply_unitary(state, u);
}

// Drive envelope: cosine ring-up, flat plateau, cosine ring-down. The exact
// integral over the full duration is plateau + ring.
struct Envelope {
  double plateau = 0.0;  // us
  double ring = 0.0;     // us

  double duration() const { return plateau + 2.0 * ring; }

  double value(double t) const {
    if (t <= 0.0 || t >= duration()) return 0.0;
    if (ring > 0.0 && t < ring) return 0.5 * (1.0 - std::cos(kPi * t / ring));
    if (t <= ring + plateau) return 1.0;
    return 0.5 * (1.0 - std::cos(kPi * (duration() - t) / ring));
  }
};

inline Envelope make_envelope(double plateau, double ring) {
  if (plateau < 0 || ring < 0) fail(ErrorCode::InvalidParams, "envelope durations must be nonnegative");
  return Envelope{plateau, ring};
}

// Mixing angle accumulated by a shaped conversion pulse:
// theta = 2*pi*g * integral(envelope) = 2*pi*g * (plateau + ring).
inline double effective_theta(double g_mhz, const Envelope& env) {
  if (g_mhz < 0) fail(ErrorCode::InvalidCoupling, "coupling must be nonnegative");
  return kTwoPi * g_mhz * (env.plateau + env.ring);
}

// Closed evolution under a shaped bilinear pulse, approximated by
// piecewise-constant coupling sampled at segment midpoints (`segments_per_ramp`
// segments per ramp, one for the plateau). All segments share one
// eigendecomposition because the generator pattern is fixed.
inline QuantumState propagate_enveloped(const QuantumState& state, double g_mhz, double phi, const Envelope& env,
                                        int segments_per_ramp = 64) {
  if (segments_per_ramp < 1) fail(ErrorCode::InvalidParams, "need at least one segment per ramp");
  const HamiltonianTerm term = bilinear_hamiltonian(state.space(), g_mhz, phi);

  struct Segment {
    double start, length;
  };
  std::vector<Segment> segments;
  if (env.ring > 0.0) {
    const double h = env.ring / segments_per_ramp;
    for (int i = 0; i < segments_per_ramp; ++i) segments.push_back({i * h, h});
    if (env.plateau > 0.0) segments.push_back({env.ring, env.plateau});
    for (int i = 0; i < segments_per_ramp; ++i) segments.push_back({env.ring + env.plateau + i * h, h});
  } else if (env.plateau > 0.0) {
    segments.push_back({0.0, env.plateau});
  }

  // Piecewise-constant couplings commute (same pattern), so the product of
  // segment propagators is one propagator at the accumulated angle.
  double integral = 0.0;
  for (const auto& s : segments) integral += env.value(s.start + 0.5 * s.length) * s.length;
  const Matrix u = hermitian_propagator(term.scale * term.matrix, integral);
  return apply_unitary(state, u);
}

// One Lindblad collapse operator with its rate (1/us).
struct CollapseChannel {
  std::string label;
  OperatorMatrix op;
  double rate = 0.0;
};

// Standard memory decoherence: single-photon loss at 1/T1 per mode plus
// number dephasing L = n at kappa_phi = 2/Tphi, which makes the |0><1|
// coherence of that mode decay as exp(-t/Tphi). While the conversion drives
// are on the dephasing rate is multiplied by `drive_dephasing_multiplier`.
inline std::vector<CollapseChannel> decoherence_channels(const ModeSpace& space, const DeviceParams& p,
                                                         bool drives_on) {
  if (space.num_modes() != 2) fail(ErrorCode::InvalidSpace, "decoherence channels need a two-mode space");
  const double mult = drives_on ? p.drive_dephasing_multiplier : 1.0;
  std::vector<CollapseChannel> channels;
  auto add = [&channels](const std::string& label, OperatorMatrix op, double rate) {
    if (rate > 0.0) channels.push_back({label, std::move(op), rate});
  };
  add("loss_a", lift(annihilation_op(space.dim(0)), space, 0), 1.0 / p.t1_a);
  add("loss_b", lift(annihilation_op(space.dim(1)), space, 1), 1.0 / p.t1_b);
  add("dephasing_a", lift(number_op(space.dim(0)), space, 0), mult * 2.0 / p.tphi_a);
  add("dephasing_b", lift(number_op(space.dim(1)), space, 1), mult * 2.0 / p.tphi_b);
  return channels;
}

// Default fixed RK4 step: resolve the coupling, the fastest dephasing and an
// absolute cap, whichever is smallest.
inline double default_timestep(double g_mhz, const DeviceParams& p) {
  double dt = 0.5;
  if (g_mhz > 0.0) dt = std::min(dt, 0.01 / g_mhz);
  const double tphi = std::min(p.tphi_a, p.tphi_b);
  if (std::isfinite(tphi)) dt = std::min(dt, tphi / 1000.0);
  return dt;
}

namespace detail {

using SparseMatrix = Eigen::SparseMatrix<Complex>;

inline SparseMatrix sparse_of(const Matrix& m) {
  // Keep every exact nonzero; the physical operators are banded.
  return m.sparseView(Complex(1.0, 0.0), 0.0);
}

}  // namespace detail

// Fixed-step RK4 integration of
//   d rho/dt = -i[H, rho] + sum_k rate_k (L rho L+ - 1/2 {L+L, rho}).
// The state must already be a density matrix. Hermiticity is enforced by
// symmetrization after every step; the trace is left untouched so drift
// stays visible to tests.
inline QuantumState lindblad_evolve(const QuantumState& state, std::span<const HamiltonianTerm> terms,
                                    std::span<const CollapseChannel> channels, double t, double dt) {
  if (state.is_pure()) fail(ErrorCode::PureStateInput, "lindblad_evolve needs a density state, densify first");
  if (t < 0) fail(ErrorCode::InvalidParams, "evolution time must be nonnegative");
  if (dt <= 0) fail(ErrorCode::InvalidParams, "timestep must be positive");

  double char_rate = 0.0;
  for (const auto& term : terms) char_rate = std::max(char_rate, std::abs(term.scale));
  for (const auto& ch : channels) char_rate = std::max(char_rate, ch.rate);
  if (dt * char_rate > 0.1)
    fail(ErrorCode::StepTooLarge, "dt * max(rates) = " + std::to_string(dt * char_rate) + " exceeds 0.1");
  if (t == 0.0) return state;

  const int dim = state.space().total_dim();
  const Matrix h = total_hamiltonian(terms, dim);
  const double magnitude = h.size() > 0 ? h.cwiseAbs().maxCoeff() : 0.0;
  if (!is_hermitian(h, kConstructionTol * std::max(1.0, magnitude)))
    fail(ErrorCode::InvalidHamiltonian, "Lindblad Hamiltonian is not Hermitian");

  // K = -iH - 1/2 sum rate L+L folds the anticommutator into one operator:
  // rhs(rho) = K rho + (K rho)+ + sum rate (L rho) L+   for Hermitian rho.
  Matrix k_dense = Complex(0.0, -1.0) * h;
  struct Jump {
    detail::SparseMatrix l, l_dag;
    double rate;
  };
  std::vector<Jump> jumps;
  for (const auto& ch : channels) {
    if (ch.op.rows() != dim || ch.op.cols() != dim)
      fail(ErrorCode::DimensionMismatch, "collapse operator '" + ch.label + "' has wrong dimension");
    if (ch.rate < 0) fail(ErrorCode::InvalidParams, "collapse rate must be nonnegative");
    if (ch.rate == 0.0) continue;
    k_dense -= 0.5 * ch.rate * (ch.op.adjoint() * ch.op);
    jumps.push_back({detail::sparse_of(ch.op), detail::sparse_of(ch.op.adjoint()), ch.rate});
  }
  const detail::SparseMatrix k_sparse = detail::sparse_of(k_dense);

  const int steps = static_cast<int>(std::ceil(t / dt - 1e-12));
  const double h_step = t / steps;

  Matrix rho = state.rho();
  Matrix k1(dim, dim), k2(dim, dim), k3(dim, dim), k4(dim, dim), work(dim, dim);
  auto rhs = [&](const Matrix& r, Matrix& out) {
    work.noalias() = k_sparse * r;
    out = work + work.adjoint();
    for (const auto& j : jumps) {
      work.noalias() = j.l * r;
      out.noalias() += j.rate * (work * j.l_dag);
    }
  };

  Matrix stage(dim, dim);
  for (int s = 0; s < steps; ++s) {
    rhs(rho, k1);
    stage = rho + (0.5 * h_step) * k1;
    rhs(stage, k2);
    stage = rho + (0.5 * h_step) * k2;
    rhs(stage, k3);
    stage = rho + h_step * k3;
    rhs(stage, k4);
    rho += (h_step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    rho = 0.5 * (rho + rho.adjoint()).eval();
  }
  return QuantumState::density(state.space(), std::move(rho), state.leakage());
}

}  // namespace bosim

#endif
