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

#ifndef BOSIM_MEASUREMENT_HPP
#define BOSIM_MEASUREMENT_HPP

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "bosim/device.hpp"
#include "bosim/error.hpp"
#include "bosim/fock.hpp"
#include "bosim/interferometry.hpp"

namespace bosim {

// Joint photon-number distribution P(n_a, n_b). `spam_applied` marks the
// multiplicative readout scale; `survival` is the post-selection survival
// probability tied to the data and `survival_included` says whether it is
// currently multiplied into probs (true for as-observed data, false once
// post-selected back out).
struct JointNumberDistribution {
  Eigen::MatrixXd probs;
  bool spam_applied = false;
  double survival = 1.0;
  bool survival_included = false;
};

// Born probabilities of the joint number measurement, optionally scaled by
// the state-prep-and-measurement factor. Raw probabilities sum to one minus
// any truncation leakage.
inline JointNumberDistribution joint_number_probs(const QuantumState& state, const DeviceParams& params,
                                                  bool apply_spam) {
  const ModeSpace& space = state.space();
  if (space.num_modes() != 2) fail(ErrorCode::InvalidSpace, "joint readout needs a two-mode state");
  const Eigen::VectorXd pops = state.populations();
  JointNumberDistribution dist;
  dist.probs = Eigen::MatrixXd::Zero(space.dim(0), space.dim(1));
  for (int i = 0; i < space.total_dim(); ++i) {
    const std::vector<int> occ = space.unflatten(i);
    dist.probs(occ[0], occ[1]) = pops(i);
  }
  if (apply_spam) {
    dist.probs *= params.readout_scale;
    dist.spam_applied = true;
  }
  return dist;
}

// Frequency of the coupler pulse that addresses the joint Fock level (n, m).
inline double selective_pulse_freq(int n, int m, const DeviceParams& params) {
  if (n < 0 || m < 0) fail(ErrorCode::InvalidParams, "photon numbers must be nonnegative");
  return params.omega_ge - n * params.chi_ac - m * params.chi_bc;
}

// Photon-number parity of one mode, optionally scaled by the parity-meter
// contrast.
inline double parity_expectation(const QuantumState& state, int mode, const DeviceParams& params,
                                 bool apply_contrast = false) {
  const ModeSpace& space = state.space();
  if (mode < 0 || mode >= space.num_modes()) fail(ErrorCode::InvalidSpace, "parity: mode index out of range");
  const Eigen::VectorXd pops = state.populations();
  double value = 0.0;
  for (int i = 0; i < space.total_dim(); ++i) {
    const int n = space.unflatten(i)[static_cast<size_t>(mode)];
    value += (n % 2 == 0 ? 1.0 : -1.0) * pops(i);
  }
  return apply_contrast ? params.parity_contrast * value : value;
}

struct OverlapEstimate {
  double value = 0.0;        // contrast-scaled parity of memory A after the splitter
  double raw = 0.0;          // unscaled parity
  double ideal_value = 0.0;  // Tr(rho_A rho_B), computed directly
  double contrast = 1.0;
};

namespace detail {

inline QuantumState embed_single_mode(const QuantumState& state, int dim) {
  const int d = state.space().dim(0);
  if (dim < d) fail(ErrorCode::InvalidDimension, "embedding must not shrink the space");
  if (state.is_pure()) {
    Vector v = Vector::Zero(dim);
    v.head(d) = state.amplitudes();
    return QuantumState::pure(ModeSpace::single(dim), std::move(v), state.leakage());
  }
  Matrix m = Matrix::Zero(dim, dim);
  m.topLeftCorner(d, d) = state.rho();
  return QuantumState::density(ModeSpace::single(dim), std::move(m), state.leakage());
}

}  // namespace detail

// Overlap meter: interfere the two inputs on a 50:50 splitter and read the
// photon-number parity of memory A. With the splitter phased so that A
// carries the difference mode (phi = pi/2), <P_A> = Tr(rho_A rho_B) exactly.
// The inputs are embedded into dim_a + dim_b - 1 levels per mode first, so
// the number-conserving splitter suffers no truncation error. Physical mode
// runs the splitter through the master equation instead.
inline OverlapEstimate overlap_via_parity(const QuantumState& state_a, const QuantumState& state_b,
                                          const DeviceParams& params, GateMode mode = GateMode::Ideal,
                                          double g_mhz = 0.034, double dt = 0.0) {
  if (state_a.space().num_modes() != 1 || state_b.space().num_modes() != 1)
    fail(ErrorCode::InvalidSpace, "overlap inputs must be single-mode states");
  if (state_a.space().dim(0) != state_b.space().dim(0))
    fail(ErrorCode::DimensionMismatch, "overlap inputs must share one truncation");

  const int d = state_a.space().dim(0);
  const int embedded = 2 * d - 1;
  const QuantumState joint =
      product_state(detail::embed_single_mode(state_a, embedded), detail::embed_single_mode(state_b, embedded));

  static constexpr double kSwapTestPhase = 0.5 * kPi;
  QuantumState out = (mode == GateMode::Ideal)
                         ? ideal_beamsplitter(joint, 0.25 * kPi, kSwapTestPhase)
                         : beamsplitter(joint, {0.25 * kPi, kSwapTestPhase, GateMode::Physical}, g_mhz, params, dt)
                               .first;

  OverlapEstimate est;
  est.contrast = params.parity_contrast;
  est.raw = parity_expectation(out, 0, params, false);
  est.value = est.contrast * est.raw;
  est.ideal_value = (state_a.density_matrix() * state_b.density_matrix()).trace().real();
  return est;
}

// Conditions a distribution on no coupler excitation during any conversion
// pulse: survival = prod(1 - p_exc) over the gate records, divided back out
// of the observed probabilities.
inline JointNumberDistribution postselect(const JointNumberDistribution& dist, std::span<const GateRecord> records) {
  double survival = 1.0;
  for (const auto& r : records) survival *= (1.0 - r.p_exc);
  if (survival <= 0.0) fail(ErrorCode::AllDiscarded, "post-selection discards every run");
  JointNumberDistribution out = dist;
  out.probs /= survival;
  out.survival = survival;
  out.survival_included = false;
  return out;
}

}  // namespace bosim

#endif
