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
//
// Reference implementations used to cross-check the library. Everything here
// is deliberately written from first principles (dense loops, Taylor series,
// quadrature, finite differences) and never calls the code under test, so a
// shared bug cannot hide on both sides of an assertion.

#ifndef BOSIM_TESTS_ORACLE_HPP
#define BOSIM_TESTS_ORACLE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// --- dense ladder operators, built by explicit loops -------------------------

inline Matrix lowering(int dim) {
  Matrix a = Matrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

inline Matrix raising(int dim) { return lowering(dim).adjoint(); }

inline Matrix number(int dim) {
  Matrix n = Matrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

// Kronecker product with the first factor on the slow index.
inline Matrix kron(const Matrix& x, const Matrix& y) {
  Matrix out(x.rows() * y.rows(), x.cols() * y.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
  return out;
}

// --- matrix exponential: scaling and squaring + Taylor -----------------------

inline Matrix expm(const Matrix& m) {
  const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();  // induced inf-norm
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Matrix t = m / std::pow(2.0, squarings);

  Matrix result = Matrix::Identity(m.rows(), m.cols());
  Matrix term = Matrix::Identity(m.rows(), m.cols());
  for (int k = 1; k <= 64; ++k) {
    term = (term * t) / static_cast<double>(k);
    result += term;
    if (term.cwiseAbs().maxCoeff() < 1e-20) break;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

// --- Lindblad superoperator as an explicit D^2 x D^2 matrix ------------------
//
// Column-major vec: vec(A rho B) = (B^T kron A) vec(rho). The first kron
// factor acts on the column index, i.e. kron here is (B^T, A) with B^T slow.

struct Channel {
  Matrix op;
  double rate = 0.0;
};

inline Matrix liouvillian(const Matrix& h, const std::vector<Channel>& channels) {
  const Eigen::Index d = h.rows();
  const Matrix id = Matrix::Identity(d, d);
  const Complex i(0.0, 1.0);
  Matrix l = -i * (kron(id, h) - kron(h.transpose(), id));
  for (const Channel& c : channels) {
    const Matrix ldag_l = c.op.adjoint() * c.op;
    l += c.rate * (kron(c.op.conjugate(), c.op) - 0.5 * kron(id, ldag_l) -
                   0.5 * kron(ldag_l.transpose(), id));
  }
  return l;
}

inline Matrix evolve_density(const Matrix& rho0, const Matrix& h, const std::vector<Channel>& channels,
                             double t) {
  const Eigen::Index d = rho0.rows();
  const Matrix u = expm(liouvillian(h, channels) * t);
  Vector v(d * d);
  for (Eigen::Index c = 0; c < d; ++c)
    for (Eigen::Index r = 0; r < d; ++r) v(c * d + r) = rho0(r, c);
  const Vector w = u * v;
  Matrix rho(d, d);
  for (Eigen::Index c = 0; c < d; ++c)
    for (Eigen::Index r = 0; r < d; ++r) rho(r, c) = w(c * d + r);
  return rho;
}

// --- two-mode exchange coupling from raw loops --------------------------------
//
// H/hbar = 2 pi g (e^{i phi} a b^dag + e^{-i phi} a^dag b), mode A slow.

inline Matrix exchange_hamiltonian(int dim_a, int dim_b, double g, double phi) {
  const Matrix a = kron(lowering(dim_a), Matrix::Identity(dim_b, dim_b));
  const Matrix b = kron(Matrix::Identity(dim_a, dim_a), lowering(dim_b));
  const Complex phase = std::polar(1.0, phi);
  const double two_pi = 6.283185307179586476925286766559;
  return two_pi * g * (phase * a * b.adjoint() + std::conj(phase) * a.adjoint() * b);
}

inline Vector beamsplitter_state(const Vector& psi, int dim_a, int dim_b, double theta, double phi) {
  const double two_pi = 6.283185307179586476925286766559;
  const double g = 1.0;                 // time carries the angle
  const double t = theta / (two_pi * g);
  const Matrix h = exchange_hamiltonian(dim_a, dim_b, g, phi);
  return expm(Complex(0.0, -1.0) * h * t) * psi;
}

// --- quadrature ---------------------------------------------------------------

inline double trapezoid(const std::function<double(double)>& f, double lo, double hi, int panels) {
  double sum = 0.5 * (f(lo) + f(hi));
  for (int k = 1; k < panels; ++k) sum += f(lo + (hi - lo) * k / panels);
  return sum * (hi - lo) / panels;
}

// --- central finite differences ------------------------------------------------

inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// --- seeded random states -------------------------------------------------------

inline Vector random_pure(int dim, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim);
  for (int k = 0; k < dim; ++k) v(k) = Complex(normal(gen), normal(gen));
  return v / v.norm();
}

// Ginibre construction: G G^dag / tr, full rank, strictly positive for
// rank >= dim almost surely.
inline Matrix random_density(int dim, int rank, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(dim, rank);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < rank; ++c) g(r, c) = Complex(normal(gen), normal(gen));
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return rho;
}

}  // namespace oracle

#endif
