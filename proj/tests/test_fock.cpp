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
#include <complex>

#include "bosim/fock.hpp"
#include "oracle.hpp"

using namespace bosim;

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

}  // namespace

TEST_CASE("mode space flattening is A-major and range checked") {
  const ModeSpace space = ModeSpace::two_mode(4, 6);
  REQUIRE(space.total_dim() == 24);
  REQUIRE(space.flatten({1, 2}) == 8);
  REQUIRE(space.flatten({3, 5}) == 23);
  const std::vector<int> occ = space.unflatten(8);
  REQUIRE(occ[0] == 1);
  REQUIRE(occ[1] == 2);
  for (int idx = 0; idx < space.total_dim(); ++idx)
    REQUIRE(space.flatten(space.unflatten(idx)) == idx);
  REQUIRE_THROWS_AS(space.flatten({4, 0}), Error);
  REQUIRE_THROWS_AS(space.flatten({0, -1}), Error);
}

TEST_CASE("ladder and number operators match the reference loops") {
  for (int dim : {2, 3, 7}) {
    REQUIRE((annihilation_op(dim) - oracle::lowering(dim)).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((creation_op(dim) - oracle::raising(dim)).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((number_op(dim) - oracle::number(dim)).cwiseAbs().maxCoeff() == 0.0);
    // canonical commutator holds except in the top level
    const OperatorMatrix comm =
        annihilation_op(dim) * creation_op(dim) - creation_op(dim) * annihilation_op(dim);
    for (int n = 0; n < dim - 1; ++n) REQUIRE(std::abs(comm(n, n) - 1.0) < kConstructionTol);
  }
}

TEST_CASE("tensor puts the first factor on the slow index") {
  const OperatorMatrix a = oracle::lowering(3);
  const OperatorMatrix b = oracle::number(4);
  const OperatorMatrix t = tensor(a, b);
  REQUIRE((t - oracle::kron(a, b)).cwiseAbs().maxCoeff() == 0.0);

  const ModeSpace space = ModeSpace::two_mode(3, 4);
  const QuantumState s = fock_state(space, {2, 3});
  REQUIRE(real_expectation(s, lift(number_op(4), space, 1)) == Catch::Approx(3.0).margin(1e-14));
  REQUIRE(real_expectation(s, lift(number_op(3), space, 0)) == Catch::Approx(2.0).margin(1e-14));
}

TEST_CASE("coherent amplitudes match the closed form") {
  const Complex alpha(0.8, 0.3);
  const Vector c = coherent_amplitudes(12, alpha);
  for (int n = 0; n < 7; ++n) {
    const Complex expected = std::exp(-0.5 * std::norm(alpha)) * std::pow(alpha, n) / std::sqrt(factorial(n));
    REQUIRE(std::abs(c(n) - expected) < 1e-13);
  }
}

TEST_CASE("coherent state renormalizes and records leakage") {
  const QuantumState s = coherent_state(20, Complex(1.0, 0.0));
  REQUIRE(std::abs(s.amplitudes().norm() - 1.0) < kConstructionTol);
  // at dim 20 the alpha=1 tail underflows below double resolution
  REQUIRE(s.leakage() >= 0.0);
  REQUIRE(s.leakage() < 1e-12);
  const QuantumState tight = coherent_state(12, Complex(1.0, 0.0));
  REQUIRE(tight.leakage() > 0.0);
  REQUIRE(tight.leakage() < 1e-8);
  REQUIRE(mean_occupation(s, 0) == Catch::Approx(1.0).margin(1e-10));
  REQUIRE_THROWS_AS(coherent_state(4, Complex(2.0, 0.0)), Error);
}

TEST_CASE("coherent overlap reproduces the Gaussian law") {
  const Complex alpha(0.9, -0.2);
  const Complex beta(0.3, 0.5);
  const Vector ca = coherent_amplitudes(40, alpha);
  const Vector cb = coherent_amplitudes(40, beta);
  const double got = std::norm(ca.dot(cb));
  const double expected = std::exp(-std::norm(alpha - beta));
  REQUIRE(std::abs(got - expected) < 1e-12);
}

TEST_CASE("parity expectation of a coherent state is exp(-2|alpha|^2)") {
  const double a2 = 0.7;
  const QuantumState s = coherent_state(25, Complex(std::sqrt(a2), 0.0));
  const double got = real_expectation(s, parity_op(25));
  REQUIRE(std::abs(got - std::exp(-2.0 * a2)) < 1e-10);
}

TEST_CASE("partial trace of an entangled pair is maximally mixed") {
  const ModeSpace space = ModeSpace::two_mode(2, 2);
  Vector amps = Vector::Zero(4);
  amps(space.flatten({0, 1})) = 1.0 / std::sqrt(2.0);
  amps(space.flatten({1, 0})) = 1.0 / std::sqrt(2.0);
  const QuantumState bell = QuantumState::pure(space, amps);

  REQUIRE_THROWS_AS(partial_trace(bell, 0), Error);  // pure input is rejected
  const QuantumState reduced = partial_trace(bell.densified(), 0);
  const Matrix rho = reduced.rho();
  REQUIRE(rho.rows() == 2);
  REQUIRE(std::abs(rho(0, 0) - 0.5) < kConstructionTol);
  REQUIRE(std::abs(rho(1, 1) - 0.5) < kConstructionTol);
  REQUIRE(std::abs(rho(0, 1)) < kConstructionTol);
  REQUIRE(purity(reduced) == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("partial trace of a product state recovers the factors") {
  const QuantumState a = coherent_state(8, Complex(0.5, 0.1));
  const QuantumState b = fock_state(ModeSpace::single(5), {2});
  const QuantumState joint = product_state(a, b);
  REQUIRE(joint.is_pure());

  const QuantumState ra = partial_trace(joint.densified(), 0);
  const QuantumState rb = partial_trace(joint.densified(), 1);
  REQUIRE(state_fidelity(ra, a) == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(state_fidelity(rb, b) == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(mean_occupation(joint, 1) == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("random density states are normalized and positive") {
  const Matrix rho = oracle::random_density(6, 6, 17);
  REQUIRE(std::abs(rho.trace().real() - 1.0) < 1e-12);
  const QuantumState s = QuantumState::density(ModeSpace::single(6), rho);
  REQUIRE(!s.is_pure());
  REQUIRE(purity(s) > 0.0);
  REQUIRE(purity(s) < 1.0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
  REQUIRE(es.eigenvalues().minCoeff() > -kPositivityTol);
}

TEST_CASE("apply_unitary preserves norm and populations sum to one") {
  const ModeSpace space = ModeSpace::two_mode(3, 3);
  const QuantumState s = fock_state(space, {1, 1});
  const Matrix u = oracle::expm(Complex(0.0, -1.0) * oracle::exchange_hamiltonian(3, 3, 0.02, 0.3));
  const QuantumState moved = apply_unitary(s, u);
  REQUIRE(moved.norm_error() < kEvolutionTol);
  REQUIRE(moved.populations().sum() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("top level population flags truncation pressure") {
  const ModeSpace space = ModeSpace::two_mode(3, 4);
  const QuantumState edge = fock_state(space, {2, 1});
  REQUIRE(top_level_population(edge, 0) == Catch::Approx(1.0).margin(1e-14));
  REQUIRE(top_level_population(edge, 1) == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("state fidelity works for pure and density inputs") {
  const ModeSpace space = ModeSpace::single(4);
  const QuantumState zero = fock_state(space, {0});
  const QuantumState one = fock_state(space, {1});
  Vector amps = Vector::Zero(4);
  amps(0) = std::sqrt(0.3);
  amps(1) = std::sqrt(0.7);
  const QuantumState mix = QuantumState::pure(space, amps);
  REQUIRE(state_fidelity(mix, zero) == Catch::Approx(0.3).margin(1e-12));
  REQUIRE(state_fidelity(mix.densified(), one) == Catch::Approx(0.7).margin(1e-12));
}

TEST_CASE("fock_state rejects occupations outside the space") {
  const ModeSpace space = ModeSpace::two_mode(3, 3);
  REQUIRE_THROWS_AS(fock_state(space, {3, 0}), Error);
  REQUIRE_THROWS_AS(fock_state(space, {0, 5}), Error);
}
