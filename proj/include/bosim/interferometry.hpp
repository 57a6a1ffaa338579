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

#ifndef BOSIM_INTERFEROMETRY_HPP
#define BOSIM_INTERFEROMETRY_HPP

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "bosim/device.hpp"
#include "bosim/error.hpp"
#include "bosim/evolution.hpp"
#include "bosim/fock.hpp"

namespace bosim {

enum class GateMode { Ideal, Physical };

// Dispersive mixing angles: theta = pi/2 swaps the memories, theta = pi/4 is
// the 50:50 splitter.
struct BeamsplitterSpec {
  double theta = 0.0;
  double phi = 0.0;
  GateMode mode = GateMode::Ideal;
};

// Audit record of one executed gate: wall duration in simulated microseconds,
// the coupler-excitation probability charged against post-selection, and the
// worst top-Fock-level population observed after the gate.
struct GateRecord {
  std::string gate;
  double duration_us = 0.0;
  double p_exc = 0.0;
  double leakage = 0.0;
};

namespace detail {

inline double check_truncation(const QuantumState& state, double tolerance, const std::string& gate) {
  double worst = 0.0;
  for (int m = 0; m < state.space().num_modes(); ++m)
    worst = std::max(worst, top_level_population(state, m));
  if (worst > tolerance)
    fail(ErrorCode::TruncationTooSmall,
         gate + " leaves " + std::to_string(worst) + " on a top Fock level (tolerance " +
             std::to_string(tolerance) + "); enlarge dims");
  return worst;
}

// The bilinear generator conserves n_a + n_b, so the ideal propagator is
// assembled block-by-block over total-photon-number subspaces. This keeps the
// number-conservation invariant exact and the cost at O(sum block^3).
struct NumberBlocks {
  std::vector<std::vector<int>> indices;  // flattened basis indices per block
  std::vector<Matrix> unitaries;
};

inline NumberBlocks bs_number_blocks(const ModeSpace& space, double theta, double phi) {
  const int da = space.dim(0), db = space.dim(1);
  NumberBlocks blocks;
  for (int n = 0; n <= da + db - 2; ++n) {
    const int na_min = std::max(0, n - db + 1);
    const int na_max = std::min(n, da - 1);
    const int size = na_max - na_min + 1;
    std::vector<int> idx(static_cast<size_t>(size));
    for (int k = 0; k < size; ++k) {
      const int na = na_min + k;
      idx[static_cast<size_t>(k)] = na * db + (n - na);
    }
    Matrix g = Matrix::Zero(size, size);
    for (int k = 0; k + 1 < size; ++k) {
      const int na = na_min + k;  // transition (na, n-na) -> (na+1, n-na-1)
      const double amp = std::sqrt(static_cast<double>((na + 1) * (n - na)));
      g(k + 1, k) = std::exp(Complex(0.0, -phi)) * amp;
      g(k, k + 1) = std::exp(Complex(0.0, phi)) * amp;
    }
    blocks.indices.push_back(std::move(idx));
    blocks.unitaries.push_back(hermitian_propagator(g, theta));
  }
  return blocks;
}

inline QuantumState apply_number_blocked(const QuantumState& state, const NumberBlocks& blocks) {
  const int dim = state.space().total_dim();
  if (state.is_pure()) {
    Vector out = Vector::Zero(dim);
    for (size_t b = 0; b < blocks.indices.size(); ++b) {
      const auto& idx = blocks.indices[b];
      Vector sub(static_cast<int>(idx.size()));
      for (size_t k = 0; k < idx.size(); ++k) sub(static_cast<int>(k)) = state.amplitudes()(idx[k]);
      sub = blocks.unitaries[b] * sub;
      for (size_t k = 0; k < idx.size(); ++k) out(idx[k]) = sub(static_cast<int>(k));
    }
    return QuantumState::pure(state.space(), std::move(out), state.leakage());
  }
  Matrix out = Matrix::Zero(dim, dim);
  for (size_t p = 0; p < blocks.indices.size(); ++p) {
    for (size_t q = 0; q < blocks.indices.size(); ++q) {
      const auto& rows = blocks.indices[p];
      const auto& cols = blocks.indices[q];
      Matrix sub(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
      for (size_t r = 0; r < rows.size(); ++r)
        for (size_t c = 0; c < cols.size(); ++c) sub(static_cast<int>(r), static_cast<int>(c)) = state.rho()(rows[r], cols[c]);
      sub = blocks.unitaries[p] * sub * blocks.unitaries[q].adjoint();
      for (size_t r = 0; r < rows.size(); ++r)
        for (size_t c = 0; c < cols.size(); ++c) out(rows[r], cols[c]) = sub(static_cast<int>(r), static_cast<int>(c));
    }
  }
  return QuantumState::density(state.space(), std::move(out), state.leakage());
}

}  // namespace detail

// Instantaneous beamsplitter unitary at mixing angle theta. Kept exactly
// block-diagonal over total photon number.
inline QuantumState ideal_beamsplitter(const QuantumState& state, double theta, double phi = 0.0) {
  if (state.space().num_modes() != 2) fail(ErrorCode::InvalidSpace, "beamsplitter needs a two-mode state");
  return detail::apply_number_blocked(state, detail::bs_number_blocks(state.space(), theta, phi));
}

// Beamsplitter gate. Ideal mode applies the unitary; physical mode integrates
// the master equation over the drive duration theta/(2 pi g) with the Kerr
// shifts and decoherence active, and charges one coupler-excitation flag.
inline std::pair<QuantumState, GateRecord> beamsplitter(const QuantumState& state, const BeamsplitterSpec& spec,
                                                        double g_mhz, const DeviceParams& params, double dt = 0.0) {
  if (state.space().num_modes() != 2) fail(ErrorCode::InvalidSpace, "beamsplitter needs a two-mode state");
  if (!std::isfinite(spec.theta)) fail(ErrorCode::InvalidParams, "mixing angle must be finite");

  if (spec.mode == GateMode::Ideal) {
    QuantumState out = ideal_beamsplitter(state, spec.theta, spec.phi);
    GateRecord rec{"bs", 0.0, 0.0, 0.0};
    rec.leakage = detail::check_truncation(out, params.leakage_tolerance, "beamsplitter");
    return {std::move(out), rec};
  }

  if (g_mhz <= 0.0) fail(ErrorCode::InvalidCoupling, "physical beamsplitter needs g > 0");
  if (spec.theta < 0.0) fail(ErrorCode::InvalidParams, "physical beamsplitter needs theta >= 0");
  const double duration = spec.theta / (kTwoPi * g_mhz);
  const std::vector<HamiltonianTerm> terms = {bilinear_hamiltonian(state.space(), g_mhz, spec.phi),
                                              kerr_hamiltonian(state.space(), params.chi_aa, params.chi_bb,
                                                               params.chi_ab)};
  const std::vector<CollapseChannel> channels = decoherence_channels(state.space(), params, true);
  const double step = dt > 0.0 ? dt : default_timestep(g_mhz, params);
  QuantumState out = lindblad_evolve(state.densified(), terms, channels, duration, step);
  GateRecord rec{"bs", duration, params.p_exc, 0.0};
  rec.leakage = detail::check_truncation(out, params.leakage_tolerance, "beamsplitter");
  return {std::move(out), rec};
}

// Differential phase gate on memory A: applies exp(i phi n_a), phi normalized
// to [0, 2 pi). Physically the phase accrues dispersively over
// phi / (2 pi chi_1) with decoherence running.
inline std::pair<QuantumState, GateRecord> dps(const QuantumState& state, double phi, const DeviceParams& params,
                                               GateMode mode = GateMode::Ideal, double dt = 0.0) {
  if (state.space().num_modes() != 2) fail(ErrorCode::InvalidSpace, "dps needs a two-mode state");
  if (!std::isfinite(phi)) fail(ErrorCode::InvalidParams, "phase must be finite");
  phi = std::fmod(phi, kTwoPi);
  if (phi < 0.0) phi += kTwoPi;

  if (mode == GateMode::Ideal) {
    const int dim = state.space().total_dim();
    Vector phase(dim);
    for (int i = 0; i < dim; ++i)
      phase(i) = std::exp(Complex(0.0, phi * state.space().unflatten(i)[0]));
    QuantumState out = state.is_pure()
                           ? QuantumState::pure(state.space(), phase.asDiagonal() * state.amplitudes(),
                                                state.leakage())
                           : QuantumState::density(state.space(),
                                                   phase.asDiagonal() * state.rho() *
                                                       phase.conjugate().asDiagonal(),
                                                   state.leakage());
    GateRecord rec{"dps", 0.0, 0.0, 0.0};
    rec.leakage = detail::check_truncation(out, params.leakage_tolerance, "dps");
    return {std::move(out), rec};
  }

  const double duration = phi / (kTwoPi * params.chi_1);
  // Negative scale so the accumulated phase is exp(+i phi n_a).
  std::vector<HamiltonianTerm> terms = {number_hamiltonian(state.space(), 0, -params.chi_1),
                                        kerr_hamiltonian(state.space(), params.bare_chi_aa, params.bare_chi_bb,
                                                         params.bare_chi_ab)};
  const std::vector<CollapseChannel> channels = decoherence_channels(state.space(), params, false);
  const double step = dt > 0.0 ? dt : default_timestep(params.chi_1, params);
  QuantumState out = lindblad_evolve(state.densified(), terms, channels, duration, step);
  GateRecord rec{"dps", duration, 0.0, 0.0};
  rec.leakage = detail::check_truncation(out, params.leakage_tolerance, "dps");
  return {std::move(out), rec};
}

// Coherent displacement of one memory, treated as instantaneous.
inline std::pair<QuantumState, GateRecord> displace(const QuantumState& state, int mode, Complex alpha,
                                                    double leakage_tolerance = kDefaultLeakageTolerance) {
  const ModeSpace& space = state.space();
  if (mode < 0 || mode >= space.num_modes()) fail(ErrorCode::InvalidSpace, "displace: mode index out of range");
  const int d = space.dim(mode);
  const OperatorMatrix k = Complex(0.0, -1.0) * (alpha * creation_op(d) - std::conj(alpha) * annihilation_op(d));
  const Matrix u = hermitian_propagator(lift(-k, space, mode), 1.0);  // exp(i K) = D(alpha)
  QuantumState out = apply_unitary(state, u);
  GateRecord rec{"displace", 0.0, 0.0, 0.0};
  rec.leakage = detail::check_truncation(out, leakage_tolerance, "displace");
  return {std::move(out), rec};
}

// Three-photon input preparation: load one photon in A, swap it into B with a
// full conversion pulse, then load two photons into A. The two-photon load
// stands in for an optimal-control pulse and is ideal in both modes; the swap
// honours the requested mode.
inline std::pair<QuantumState, std::vector<GateRecord>> prepare_21(const ModeSpace& space, const DeviceParams& params,
                                                                   double g_mhz, GateMode mode, double dt = 0.0) {
  if (space.num_modes() != 2 || space.dim(0) < 4 || space.dim(1) < 4)
    fail(ErrorCode::InvalidDimension, "three-photon preparation needs dims >= [4,4]");
  std::vector<GateRecord> records;
  QuantumState state = fock_state(space, {1, 0});
  auto [swapped, swap_rec] = beamsplitter(state, {0.5 * kPi, 0.0, mode}, g_mhz, params, dt);
  swap_rec.gate = "prepare_21.swap";
  records.push_back(swap_rec);

  // Ideal two-photon load on A: permutation exchanging Fock levels 0 and 2.
  OperatorMatrix load = identity_op(space.dim(0));
  load(0, 0) = 0.0;
  load(2, 2) = 0.0;
  load(0, 2) = 1.0;
  load(2, 0) = 1.0;
  QuantumState out = apply_unitary(swapped, lift(load, space, 0));
  GateRecord load_rec{"prepare_21.load", 0.0, 0.0, 0.0};
  load_rec.leakage = detail::check_truncation(out, params.leakage_tolerance, "prepare_21");
  records.push_back(load_rec);
  return {std::move(out), std::move(records)};
}

}  // namespace bosim

#endif
