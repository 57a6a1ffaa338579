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
#include <vector>

#include "bosim/device.hpp"
#include "bosim/evolution.hpp"
#include "bosim/fock.hpp"
#include "oracle.hpp"

using namespace bosim;

namespace {

std::vector<oracle::Channel> to_oracle(const std::vector<CollapseChannel>& channels) {
  std::vector<oracle::Channel> out;
  for (const auto& c : channels) out.push_back({c.op, c.rate});
  return out;
}

}  // namespace

TEST_CASE("exchange coupling matches the reference construction") {
  const ModeSpace space = ModeSpace::two_mode(3, 4);
  const HamiltonianTerm term = bilinear_hamiltonian(space, 0.02, 0.3);
  const Matrix h = term.scale * term.matrix;
  const Matrix ref = oracle::exchange_hamiltonian(3, 4, 0.02, 0.3);
  REQUIRE((h - ref).cwiseAbs().maxCoeff() < 1e-12);
  REQUIRE(is_hermitian(h));
}

TEST_CASE("propagator agrees with the Taylor-series exponential") {
  const ModeSpace space = ModeSpace::two_mode(3, 3);
  const Matrix h = oracle::exchange_hamiltonian(3, 3, 0.02, 0.3);
  const double t = 7.3;
  const Matrix u = hermitian_propagator(h, t);
  const Matrix ref = oracle::expm(Complex(0.0, -1.0) * h * t);
  REQUIRE((u - ref).cwiseAbs().maxCoeff() < 1e-12);
  REQUIRE((u * u.adjoint() - Matrix::Identity(9, 9)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("propagator rejects non-Hermitian input") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = Complex(1.0, 0.0);  // missing the conjugate partner
  REQUIRE_THROWS_AS(hermitian_propagator(m, 1.0), Error);
}

TEST_CASE("single excitation exchanges as cos^2 / sin^2 of the mixing angle") {
  const ModeSpace space = ModeSpace::two_mode(3, 3);
  const double g = 0.034;
  const std::vector<HamiltonianTerm> terms = {bilinear_hamiltonian(space, g, 0.0)};
  for (double t : {0.0, 1.7, 3.6764705882352944, 7.352941176470589, 11.0}) {
    const QuantumState moved = propagate_unitary(fock_state(space, {1, 0}), terms, t);
    const double theta = kTwoPi * g * t;
    REQUIRE(population(moved, {1, 0}) == Catch::Approx(std::cos(theta) * std::cos(theta)).margin(1e-12));
    REQUIRE(population(moved, {0, 1}) == Catch::Approx(std::sin(theta) * std::sin(theta)).margin(1e-12));
  }
}

TEST_CASE("Kerr diagonal carries the photon-dependent shifts") {
  const ModeSpace space = ModeSpace::two_mode(4, 4);
  const HamiltonianTerm term = kerr_hamiltonian(space, 0.008, 0.005, 0.001);
  const Matrix h = term.scale * term.matrix;
  // |3,2>: -2*pi*(0.5*0.008*3*2 + 0.5*0.005*2*1 + 0.001*3*2), frozen
  const int idx = space.flatten({3, 2});
  REQUIRE(std::abs(h(idx, idx).real() - (-kTwoPi * 0.035)) < 1e-12);
  REQUIRE(std::abs(h(space.flatten({0, 0}), space.flatten({0, 0}))) < 1e-15);
  REQUIRE(std::abs(h(space.flatten({1, 0}), space.flatten({1, 0}))) < 1e-15);
  // single photons pick up no self-Kerr, pairs do
  REQUIRE(std::abs(h(space.flatten({1, 1}), space.flatten({1, 1})).real() - (-kTwoPi * 0.001)) < 1e-12);
}

TEST_CASE("number term accumulates e^{+i phi n} under negative chi") {
  const ModeSpace space = ModeSpace::two_mode(4, 2);
  const double chi = 1.01;
  const double phi = 0.8;
  Vector amps = Vector::Zero(space.total_dim());
  amps(space.flatten({0, 0})) = 1.0 / std::sqrt(2.0);
  amps(space.flatten({2, 0})) = 1.0 / std::sqrt(2.0);
  const QuantumState in = QuantumState::pure(space, amps);
  const std::vector<HamiltonianTerm> terms = {number_hamiltonian(space, 0, -chi)};
  const QuantumState out = propagate_unitary(in, terms, phi / (kTwoPi * chi));
  const Complex ratio = out.amplitudes()(space.flatten({2, 0})) / out.amplitudes()(space.flatten({0, 0}));
  REQUIRE(std::abs(ratio - std::polar(1.0, 2.0 * phi)) < 1e-12);
}

TEST_CASE("envelope integral equals plateau plus ring, by quadrature") {
  const Envelope env = make_envelope(3.0, 0.4);
  REQUIRE(env.duration() == Catch::Approx(3.8).margin(1e-15));
  const double integral =
      oracle::trapezoid([&env](double t) { return env.value(t); }, 0.0, env.duration(), 20000);
  REQUIRE(integral == Catch::Approx(3.4).margin(1e-7));
  REQUIRE(effective_theta(0.034, env) == Catch::Approx(kTwoPi * 0.034 * 3.4).margin(1e-12));
}

TEST_CASE("shaped pulse matches the square pulse at equal accumulated angle") {
  const ModeSpace space = ModeSpace::two_mode(3, 3);
  const QuantumState in = fock_state(space, {1, 0});
  const Envelope env = make_envelope(2.0, 0.5);
  const double g = 0.04;
  const QuantumState shaped = propagate_enveloped(in, g, 0.0, env);
  const double theta = effective_theta(g, env);
  REQUIRE(population(shaped, {1, 0}) == Catch::Approx(std::cos(theta) * std::cos(theta)).margin(1e-6));
  REQUIRE(population(shaped, {0, 1}) == Catch::Approx(std::sin(theta) * std::sin(theta)).margin(1e-6));
}

TEST_CASE("decoherence channels carry the documented rates") {
  const ModeSpace space = ModeSpace::two_mode(3, 3);
  DeviceParams p = default_device_params();

  const auto idle = decoherence_channels(space, p, false);
  REQUIRE(idle.size() == 4);
  REQUIRE(idle[0].label == "loss_a");
  REQUIRE(idle[0].rate == Catch::Approx(1.0 / 450.0).margin(1e-15));
  REQUIRE(idle[2].label == "dephasing_a");
  REQUIRE(idle[2].rate == Catch::Approx(2.0 / 1125.0).margin(1e-15));

  p.drive_dephasing_multiplier = 2.0;
  const auto driven = decoherence_channels(space, p, true);
  REQUIRE(driven[2].rate == Catch::Approx(4.0 / 1125.0).margin(1e-15));
  REQUIRE(driven[0].rate == Catch::Approx(1.0 / 450.0).margin(1e-15));  // loss unchanged

  p.tphi_a = std::numeric_limits<double>::infinity();
  p.tphi_b = std::numeric_limits<double>::infinity();
  REQUIRE(decoherence_channels(space, p, false).size() == 2);  // pure loss
}

TEST_CASE("master equation agrees with the exponentiated superoperator") {
  const ModeSpace space = ModeSpace::two_mode(2, 2);
  const DeviceParams p = default_device_params();
  const std::vector<HamiltonianTerm> terms = {bilinear_hamiltonian(space, 0.05, 0.7),
                                              kerr_hamiltonian(space, 0.008, 0.005, 0.001)};
  const std::vector<CollapseChannel> channels = decoherence_channels(space, p, true);

  const Matrix rho0 = oracle::random_density(4, 4, 23);
  const QuantumState in = QuantumState::density(space, rho0);
  const Matrix h = total_hamiltonian(terms, 4);
  const double t = 4.0;

  const Matrix ref = oracle::evolve_density(rho0, h, to_oracle(channels), t);

  SECTION("fine step, tight agreement") {
    const QuantumState out = lindblad_evolve(in, terms, channels, t, 0.005);
    REQUIRE((out.rho() - ref).cwiseAbs().maxCoeff() < 1e-10);
  }
  SECTION("default step, engineering agreement") {
    const QuantumState out = lindblad_evolve(in, terms, channels, t, default_timestep(0.05, p));
    REQUIRE((out.rho() - ref).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("dissipative evolution conserves trace and positivity") {
  const ModeSpace space = ModeSpace::two_mode(3, 3);
  const DeviceParams p = default_device_params();
  const std::vector<HamiltonianTerm> terms = {bilinear_hamiltonian(space, 0.034, 0.0)};
  const std::vector<CollapseChannel> channels = decoherence_channels(space, p, true);
  const QuantumState in = fock_state(space, {1, 1}).densified();
  const QuantumState out = lindblad_evolve(in, terms, channels, 20.0, default_timestep(0.034, p));

  REQUIRE(std::abs(out.rho().trace().real() - 1.0) < kEvolutionTol);
  REQUIRE((out.rho() - out.rho().adjoint()).cwiseAbs().maxCoeff() == 0.0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(out.rho());
  REQUIRE(es.eigenvalues().minCoeff() > -kPositivityTol);
}

TEST_CASE("pure loss decays the population at exactly 1/T1") {
  const ModeSpace space = ModeSpace::two_mode(3, 3);
  DeviceParams p = default_device_params();
  p.tphi_a = std::numeric_limits<double>::infinity();
  p.tphi_b = std::numeric_limits<double>::infinity();
  const std::vector<CollapseChannel> channels = decoherence_channels(space, p, false);
  const QuantumState in = fock_state(space, {2, 0}).densified();
  const double t = 30.0;
  const QuantumState out = lindblad_evolve(in, {}, channels, t, 0.01);
  REQUIRE(mean_occupation(out, 0) == Catch::Approx(2.0 * std::exp(-t / 450.0)).margin(1e-8));
  REQUIRE(mean_occupation(out, 1) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("integrator guards reject oversized steps and pure inputs") {
  const ModeSpace space = ModeSpace::two_mode(2, 2);
  const std::vector<HamiltonianTerm> terms = {bilinear_hamiltonian(space, 5.0, 0.0)};
  const QuantumState dense = fock_state(space, {1, 0}).densified();
  REQUIRE_THROWS_AS(lindblad_evolve(dense, terms, {}, 1.0, 0.5), Error);  // dt * scale >> 0.1
  REQUIRE_THROWS_AS(lindblad_evolve(fock_state(space, {1, 0}), terms, {}, 1.0, 0.001), Error);
  REQUIRE_THROWS_AS(lindblad_evolve(dense, terms, {}, -1.0, 0.001), Error);
}

TEST_CASE("default timestep resolves coupling, dephasing and the cap") {
  DeviceParams p = default_device_params();
  REQUIRE(default_timestep(0.034, p) == Catch::Approx(0.01 / 0.034).margin(1e-15));
  REQUIRE(default_timestep(0.0, p) == Catch::Approx(0.5).margin(1e-15));
  p.tphi_a = 200.0;
  REQUIRE(default_timestep(0.034, p) == Catch::Approx(0.2).margin(1e-15));
}
