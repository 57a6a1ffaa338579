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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "bosim/interferometry.hpp"
#include "oracle.hpp"

using namespace bosim;

namespace {

DeviceParams lossless_params() {
  DeviceParams p = default_device_params();
  p.t1_a = p.t1_b = std::numeric_limits<double>::infinity();
  p.tphi_a = p.tphi_b = std::numeric_limits<double>::infinity();
  p.chi_aa = p.chi_bb = p.chi_ab = 0.0;
  p.bare_chi_aa = p.bare_chi_bb = p.bare_chi_ab = 0.0;
  return p;
}

}  // namespace

TEST_CASE("ideal beamsplitter matches the exponentiated exchange coupling") {
  const ModeSpace space = ModeSpace::two_mode(4, 5);
  const Vector psi = oracle::random_pure(space.total_dim(), 91);
  const double theta = 0.7, phi = 1.1;

  const QuantumState in = QuantumState::pure(space, psi);
  const QuantumState out = ideal_beamsplitter(in, theta, phi);
  const Vector ref = oracle::beamsplitter_state(psi, 4, 5, theta, phi);
  REQUIRE((out.amplitudes() - ref).cwiseAbs().maxCoeff() < 1e-12);

  // density input follows the same unitary
  const QuantumState out_rho = ideal_beamsplitter(in.densified(), theta, phi);
  const Matrix ref_rho = ref * ref.adjoint();
  REQUIRE((out_rho.rho() - ref_rho).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("beamsplitter conserves total photon number") {
  const ModeSpace space = ModeSpace::two_mode(5, 5);
  const QuantumState out = ideal_beamsplitter(fock_state(space, {2, 1}), 0.4, 0.2);
  double n3 = 0.0;
  for (int na = 0; na <= 3; ++na) n3 += population(out, {na, 3 - na});
  REQUIRE(n3 == Catch::Approx(1.0).margin(1e-12));
  const OperatorMatrix total_n =
      lift(number_op(5), space, 0) + lift(number_op(5), space, 1);
  REQUIRE(real_expectation(out, total_n) == Catch::Approx(3.0).margin(1e-12));
}

TEST_CASE("two single photons coalesce at the 50:50 point") {
  const ModeSpace space = ModeSpace::two_mode(3, 3);
  const QuantumState out = ideal_beamsplitter(fock_state(space, {1, 1}), 0.25 * kPi);
  REQUIRE(population(out, {1, 1}) < 1e-12);
  REQUIRE(population(out, {2, 0}) == Catch::Approx(0.5).margin(1e-12));
  REQUIRE(population(out, {0, 2}) == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("coincidence amplitude follows cos(2 theta)") {
  const ModeSpace space = ModeSpace::two_mode(3, 3);
  for (double theta : {0.0, 0.2, 0.5, 0.25 * kPi, 1.1, 0.5 * kPi}) {
    const QuantumState out = ideal_beamsplitter(fock_state(space, {1, 1}), theta);
    const double c = std::cos(2.0 * theta);
    REQUIRE(population(out, {1, 1}) == Catch::Approx(c * c).margin(1e-12));
  }
  // full swap angle returns the coincidence exactly
  const QuantumState revived = ideal_beamsplitter(fock_state(space, {1, 1}), 0.5 * kPi);
  REQUIRE(population(revived, {1, 1}) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("2+1 photons split with the 3:1:1:3 pattern at 50:50") {
  const ModeSpace space = ModeSpace::two_mode(4, 4);
  const QuantumState in = fock_state(space, {2, 1});
  const QuantumState out = ideal_beamsplitter(in, 0.25 * kPi);
  REQUIRE(population(out, {3, 0}) == Catch::Approx(0.375).margin(1e-12));
  REQUIRE(population(out, {2, 1}) == Catch::Approx(0.125).margin(1e-12));
  REQUIRE(population(out, {1, 2}) == Catch::Approx(0.125).margin(1e-12));
  REQUIRE(population(out, {0, 3}) == Catch::Approx(0.375).margin(1e-12));

  // cross-check against the dense exponential on the same input
  const Vector ref = oracle::beamsplitter_state(in.amplitudes(), 4, 4, 0.25 * kPi, 0.0);
  REQUIRE((out.amplitudes() - ref).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("physical gate reduces to the ideal one as rates vanish") {
  // dims [4,4]: the coalesced pair parks 0.5 on n=2, which must sit below
  // the top level or the truncation guard fires
  const ModeSpace space = ModeSpace::two_mode(4, 4);
  const DeviceParams p = lossless_params();
  const QuantumState in = fock_state(space, {1, 1});
  const double g = 0.034;

  auto [phys, rec] = beamsplitter(in, {0.25 * kPi, 0.0, GateMode::Physical}, g, p, 0.01);
  const QuantumState ideal = ideal_beamsplitter(in, 0.25 * kPi);
  for (int na = 0; na < 4; ++na)
    for (int nb = 0; nb < 4; ++nb)
      REQUIRE(population(phys, {na, nb}) == Catch::Approx(population(ideal, {na, nb})).margin(1e-9));
  REQUIRE(rec.duration_us == Catch::Approx(3.6764705882352944).margin(1e-12));
  REQUIRE(rec.p_exc == p.p_exc);
  REQUIRE(rec.gate == "bs");
}

TEST_CASE("ideal gate records zero duration and no excitation charge") {
  const ModeSpace space = ModeSpace::two_mode(3, 3);
  const DeviceParams p = default_device_params();
  auto [out, rec] = beamsplitter(fock_state(space, {1, 0}), {0.25 * kPi, 0.0, GateMode::Ideal}, 0.034, p);
  REQUIRE(rec.duration_us == 0.0);
  REQUIRE(rec.p_exc == 0.0);
}

TEST_CASE("truncation pressure after a gate raises the guard") {
  const ModeSpace space = ModeSpace::two_mode(2, 2);
  const DeviceParams p = default_device_params();
  // dims [2,2] cannot hold the (2,0)/(0,2) components of the coalesced pair;
  // the blocked unitary freezes |1,1> there, which the top-level check flags.
  REQUIRE_THROWS_AS(beamsplitter(fock_state(space, {1, 1}), {0.25 * kPi, 0.0, GateMode::Ideal}, 0.034, p),
                    Error);
}

TEST_CASE("differential phase gate applies e^{i phi n_a}") {
  const ModeSpace space = ModeSpace::two_mode(4, 3);
  const DeviceParams p = default_device_params();
  Vector amps = Vector::Zero(space.total_dim());
  amps(space.flatten({0, 0})) = 1.0 / std::sqrt(3.0);
  amps(space.flatten({1, 0})) = 1.0 / std::sqrt(3.0);
  amps(space.flatten({2, 0})) = 1.0 / std::sqrt(3.0);
  const QuantumState in = QuantumState::pure(space, amps);

  const double phi = 0.9;
  auto [out, rec] = dps(in, phi, p);
  const Vector a = out.amplitudes();
  const Complex r1 = a(space.flatten({1, 0})) / a(space.flatten({0, 0}));
  const Complex r2 = a(space.flatten({2, 0})) / a(space.flatten({0, 0}));
  REQUIRE(std::abs(r1 - std::polar(1.0, phi)) < 1e-12);
  REQUIRE(std::abs(r2 - std::polar(1.0, 2.0 * phi)) < 1e-12);
  REQUIRE(rec.duration_us == 0.0);

  // negative angles wrap into [0, 2pi)
  auto [wrapped, rec2] = dps(in, phi - kTwoPi, p);
  REQUIRE((wrapped.amplitudes() - out.amplitudes()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("physical phase gate runs for phi/(2 pi chi_1) and matches the ideal one") {
  const ModeSpace space = ModeSpace::two_mode(4, 3);
  const DeviceParams p = lossless_params();
  Vector amps = Vector::Zero(space.total_dim());
  amps(space.flatten({0, 1})) = std::sqrt(0.5);
  amps(space.flatten({2, 0})) = std::sqrt(0.5);
  const QuantumState in = QuantumState::pure(space, amps);

  const double phi = 0.5 * kPi;
  // the 1e-8 comparison needs the RK4 step well under the 2 pi chi_1 scale
  auto [phys, rec] = dps(in, phi, p, GateMode::Physical, 0.001);
  REQUIRE(rec.duration_us == Catch::Approx(1.0 / (4.0 * 1.01)).margin(1e-12));
  auto [ideal, rec_i] = dps(in, phi, p);
  const Matrix ideal_rho = ideal.densified().rho();
  REQUIRE((phys.rho() - ideal_rho).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("displacement of vacuum builds the matching coherent state") {
  const ModeSpace space = ModeSpace::two_mode(20, 2);
  const Complex alpha(0.8, -0.4);
  auto [out, rec] = displace(fock_state(space, {0, 0}), 0, alpha);
  REQUIRE(mean_occupation(out, 0) == Catch::Approx(std::norm(alpha)).margin(1e-9));
  const Vector want = coherent_amplitudes(20, alpha);
  for (int n = 0; n < 10; ++n) {
    const Complex got = out.amplitudes()(space.flatten({n, 0}));
    REQUIRE(std::abs(got - want(n)) < 1e-9);
  }
  REQUIRE_THROWS_AS(displace(fock_state(space, {0, 0}), 5, alpha), Error);
}

TEST_CASE("three-photon preparation lands on |2,1>") {
  const ModeSpace space = ModeSpace::two_mode(5, 5);
  const DeviceParams p = default_device_params();
  auto [state, records] = prepare_21(space, p, 0.034, GateMode::Ideal);
  REQUIRE(population(state, {2, 1}) == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(records.size() == 2);
  REQUIRE(records[0].gate == "prepare_21.swap");
  REQUIRE(records[1].gate == "prepare_21.load");
  REQUIRE_THROWS_AS(prepare_21(ModeSpace::two_mode(3, 3), p, 0.034, GateMode::Ideal), Error);
}

TEST_CASE("physical three-photon preparation stays close to the target") {
  const ModeSpace space = ModeSpace::two_mode(5, 5);
  const DeviceParams p = default_device_params();
  auto [state, records] = prepare_21(space, p, 0.034, GateMode::Physical);
  REQUIRE(population(state, {2, 1}) > 0.9);
  REQUIRE(records[0].duration_us == Catch::Approx(2.0 * 3.6764705882352944).margin(1e-12));
}
