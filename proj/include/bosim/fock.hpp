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

#ifndef BOSIM_FOCK_HPP
#define BOSIM_FOCK_HPP

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bosim/error.hpp"

namespace bosim {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

// Dense complex operator on a truncated Fock space (or a tensor product of them).
using OperatorMatrix = Eigen::MatrixXcd;

inline constexpr double kDefaultLeakageTolerance = 1e-6;

// Tolerance ladder used throughout: construction identities are exact to
// 1e-12, evolved quantities to 1e-10, positivity/trace drift to 1e-8.
inline constexpr double kConstructionTol = 1e-12;
inline constexpr double kEvolutionTol = 1e-10;
inline constexpr double kPositivityTol = 1e-8;

// A truncated multimode Fock space. Mode 0 ("Alice") is the slowest index in
// the flattened basis: index = n0 * d1 * ... + n1 * ... + n_last.
class ModeSpace {
 public:
  explicit ModeSpace(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) fail(ErrorCode::InvalidSpace, "mode space needs at least one mode");
    total_ = 1;
    for (int d : dims_) {
      if (d < 1) fail(ErrorCode::InvalidDimension, "mode dimension must be >= 1, got " + std::to_string(d));
      total_ *= d;
    }
  }

  static ModeSpace single(int dim) { return ModeSpace(std::vector<int>{dim}); }
  static ModeSpace two_mode(int dim_a, int dim_b) { return ModeSpace(std::vector<int>{dim_a, dim_b}); }

  int num_modes() const { return static_cast<int>(dims_.size()); }
  int dim(int mode) const { return dims_.at(static_cast<size_t>(mode)); }
  int total_dim() const { return total_; }
  const std::vector<int>& dims() const { return dims_; }

  int flatten(std::span<const int> occ) const {
    if (static_cast<int>(occ.size()) != num_modes())
      fail(ErrorCode::InvalidSpace, "occupation list length does not match mode count");
    int idx = 0;
    for (int m = 0; m < num_modes(); ++m) {
      if (occ[static_cast<size_t>(m)] < 0 || occ[static_cast<size_t>(m)] >= dims_[static_cast<size_t>(m)])
        fail(ErrorCode::OutOfTruncation, "occupation " + std::to_string(occ[static_cast<size_t>(m)]) +
                                             " exceeds truncation of mode " + std::to_string(m));
      idx = idx * dims_[static_cast<size_t>(m)] + occ[static_cast<size_t>(m)];
    }
    return idx;
  }

  int flatten(std::initializer_list<int> occ) const { return flatten(std::span<const int>(occ.begin(), occ.size())); }

  std::vector<int> unflatten(int index) const {
    std::vector<int> occ(static_cast<size_t>(num_modes()));
    for (int m = num_modes() - 1; m >= 0; --m) {
      occ[static_cast<size_t>(m)] = index % dims_[static_cast<size_t>(m)];
      index /= dims_[static_cast<size_t>(m)];
    }
    return occ;
  }

  bool operator==(const ModeSpace& other) const { return dims_ == other.dims_; }
  bool operator!=(const ModeSpace& other) const { return !(*this == other); }

 private:
  std::vector<int> dims_;
  int total_ = 0;
};

// Immutable state on a ModeSpace: either a pure amplitude vector or a density
// matrix. `leakage` carries probability weight removed by truncation guards.
class QuantumState {
 public:
  enum class Kind { Pure, Density };

  static QuantumState pure(ModeSpace space, Vector amplitudes, double leakage = 0.0) {
    if (amplitudes.size() != space.total_dim())
      fail(ErrorCode::DimensionMismatch, "amplitude vector does not match space dimension");
    return QuantumState(std::move(space), std::move(amplitudes), leakage);
  }

  static QuantumState density(ModeSpace space, Matrix rho, double leakage = 0.0) {
    if (rho.rows() != space.total_dim() || rho.cols() != space.total_dim())
      fail(ErrorCode::DimensionMismatch, "density matrix does not match space dimension");
    return QuantumState(std::move(space), std::move(rho), leakage);
  }

  Kind kind() const { return kind_; }
  bool is_pure() const { return kind_ == Kind::Pure; }
  const ModeSpace& space() const { return space_; }
  double leakage() const { return leakage_; }

  const Vector& amplitudes() const {
    if (!is_pure()) fail(ErrorCode::InvalidSpace, "amplitudes() called on a density state");
    return vec_;
  }

  const Matrix& rho() const {
    if (is_pure()) fail(ErrorCode::PureStateInput, "rho() called on a pure state, densify first");
    return mat_;
  }

  QuantumState densified() const {
    if (!is_pure()) return *this;
    Matrix rho = vec_ * vec_.adjoint();
    return density(space_, std::move(rho), leakage_);
  }

  Matrix density_matrix() const { return is_pure() ? Matrix(vec_ * vec_.adjoint()) : mat_; }

  QuantumState with_leakage(double leakage) const {
    QuantumState out = *this;
    out.leakage_ = leakage;
    return out;
  }

  // Diagonal of the density matrix in the flattened Fock basis.
  Eigen::VectorXd populations() const {
    if (is_pure()) return vec_.cwiseAbs2();
    return mat_.diagonal().real();
  }

  double norm_error() const {
    if (is_pure()) return std::abs(vec_.squaredNorm() - 1.0);
    return std::abs(mat_.trace().real() - 1.0);
  }

 private:
  QuantumState(ModeSpace space, Vector vec, double leakage)
      : kind_(Kind::Pure), space_(std::move(space)), vec_(std::move(vec)), leakage_(leakage) {}
  QuantumState(ModeSpace space, Matrix mat, double leakage)
      : kind_(Kind::Density), space_(std::move(space)), mat_(std::move(mat)), leakage_(leakage) {}

  Kind kind_;
  ModeSpace space_;
  Vector vec_;
  Matrix mat_;
  double leakage_ = 0.0;
};

inline bool is_hermitian(const OperatorMatrix& m, double tol = kConstructionTol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

inline OperatorMatrix annihilation_op(int dim) {
  if (dim < 2) fail(ErrorCode::InvalidDimension, "annihilation operator needs dim >= 2");
  OperatorMatrix a = OperatorMatrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

inline OperatorMatrix creation_op(int dim) { return annihilation_op(dim).adjoint(); }

inline OperatorMatrix number_op(int dim) {
  if (dim < 1) fail(ErrorCode::InvalidDimension, "number operator needs dim >= 1");
  OperatorMatrix n = OperatorMatrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

inline OperatorMatrix identity_op(int dim) {
  if (dim < 1) fail(ErrorCode::InvalidDimension, "identity needs dim >= 1");
  return OperatorMatrix::Identity(dim, dim);
}

// Photon-number parity (-1)^n. Squares to the identity exactly.
inline OperatorMatrix parity_op(int dim) {
  if (dim < 1) fail(ErrorCode::InvalidDimension, "parity needs dim >= 1");
  OperatorMatrix p = OperatorMatrix::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) p(n, n) = (n % 2 == 0) ? 1.0 : -1.0;
  return p;
}

// Kronecker product with the first factor as the slow (major) index.
inline OperatorMatrix tensor(const OperatorMatrix& a, const OperatorMatrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols())
    fail(ErrorCode::InvalidSpace, "tensor factors must be square");
  const int da = static_cast<int>(a.rows());
  const int db = static_cast<int>(b.rows());
  OperatorMatrix out(da * db, da * db);
  for (int i = 0; i < da; ++i)
    for (int j = 0; j < da; ++j) out.block(i * db, j * db, db, db) = a(i, j) * b;
  return out;
}

// Embeds a single-mode operator into the full space, identity elsewhere.
inline OperatorMatrix lift(const OperatorMatrix& op, const ModeSpace& space, int mode) {
  if (mode < 0 || mode >= space.num_modes()) fail(ErrorCode::InvalidSpace, "lift: mode index out of range");
  if (op.rows() != space.dim(mode)) fail(ErrorCode::DimensionMismatch, "lift: operator does not match mode dimension");
  OperatorMatrix out = (mode == 0) ? op : identity_op(space.dim(0));
  for (int m = 1; m < space.num_modes(); ++m) out = tensor(out, (m == mode) ? op : identity_op(space.dim(m)));
  return out;
}

inline QuantumState fock_state(const ModeSpace& space, std::span<const int> occupations) {
  Vector v = Vector::Zero(space.total_dim());
  v(space.flatten(occupations)) = 1.0;
  return QuantumState::pure(space, std::move(v));
}

inline QuantumState fock_state(const ModeSpace& space, std::initializer_list<int> occupations) {
  std::vector<int> occ(occupations);
  return fock_state(space, std::span<const int>(occ));
}

// Truncated coherent-state series, not renormalized. The dropped tail is the
// caller's leakage.
inline Vector coherent_amplitudes(int dim, Complex alpha) {
  if (dim < 1) fail(ErrorCode::InvalidDimension, "coherent amplitudes need dim >= 1");
  Vector v(dim);
  Complex c = std::exp(Complex(-0.5 * std::norm(alpha), 0.0));
  v(0) = c;
  for (int n = 1; n < dim; ++n) {
    c *= alpha / std::sqrt(static_cast<double>(n));
    v(n) = c;
  }
  return v;
}

// Single-mode coherent state. The truncated tail weight is recorded as
// leakage; if it exceeds the tolerance the truncation is rejected outright.
inline QuantumState coherent_state(int dim, Complex alpha, double leakage_tolerance = kDefaultLeakageTolerance) {
  Vector v = coherent_amplitudes(dim, alpha);
  const double kept = v.squaredNorm();
  const double leak = 1.0 - kept;
  if (leak > leakage_tolerance)
    fail(ErrorCode::TruncationTooSmall, "coherent state |alpha|^2=" + std::to_string(std::norm(alpha)) +
                                            " leaks " + std::to_string(leak) + " at dim " + std::to_string(dim));
  v /= std::sqrt(kept);
  return QuantumState::pure(ModeSpace::single(dim), std::move(v), leak);
}

// Traces out all modes except `keep`. Pure inputs are rejected: densify
// explicitly, the reduced state of an entangled pure state is mixed.
inline QuantumState partial_trace(const QuantumState& state, int keep) {
  if (state.is_pure()) fail(ErrorCode::PureStateInput, "partial_trace needs a density state, densify first");
  const ModeSpace& space = state.space();
  if (keep < 0 || keep >= space.num_modes()) fail(ErrorCode::InvalidSpace, "partial_trace: mode index out of range");
  const int dk = space.dim(keep);
  Matrix out = Matrix::Zero(dk, dk);
  const int total = space.total_dim();
  for (int i = 0; i < total; ++i) {
    const std::vector<int> oi = space.unflatten(i);
    for (int j = 0; j < total; ++j) {
      const std::vector<int> oj = space.unflatten(j);
      bool same_rest = true;
      for (int m = 0; m < space.num_modes(); ++m) {
        if (m != keep && oi[static_cast<size_t>(m)] != oj[static_cast<size_t>(m)]) {
          same_rest = false;
          break;
        }
      }
      if (same_rest) out(oi[static_cast<size_t>(keep)], oj[static_cast<size_t>(keep)]) += state.rho()(i, j);
    }
  }
  return QuantumState::density(ModeSpace::single(dk), std::move(out), state.leakage());
}

inline QuantumState apply_unitary(const QuantumState& state, const Matrix& u) {
  if (u.rows() != state.space().total_dim() || u.cols() != u.rows())
    fail(ErrorCode::DimensionMismatch, "unitary does not match state dimension");
  if (state.is_pure()) return QuantumState::pure(state.space(), u * state.amplitudes(), state.leakage());
  return QuantumState::density(state.space(), u * state.rho() * u.adjoint(), state.leakage());
}

inline Complex expectation(const QuantumState& state, const OperatorMatrix& op) {
  if (op.rows() != state.space().total_dim() || op.cols() != op.rows())
    fail(ErrorCode::DimensionMismatch, "operator does not match state dimension");
  if (state.is_pure()) return state.amplitudes().dot(op * state.amplitudes());
  return (op * state.rho()).trace();
}

inline double real_expectation(const QuantumState& state, const OperatorMatrix& op) {
  return expectation(state, op).real();
}

inline double population(const QuantumState& state, std::span<const int> occ) {
  const int idx = state.space().flatten(occ);
  if (state.is_pure()) return std::norm(state.amplitudes()(idx));
  return state.rho()(idx, idx).real();
}

inline double population(const QuantumState& state, std::initializer_list<int> occ) {
  std::vector<int> v(occ);
  return population(state, std::span<const int>(v));
}

// Probability weight sitting in the highest Fock level of one mode. The
// truncation guards compare this against the leakage tolerance.
inline double top_level_population(const QuantumState& state, int mode) {
  const ModeSpace& space = state.space();
  if (mode < 0 || mode >= space.num_modes()) fail(ErrorCode::InvalidSpace, "mode index out of range");
  const Eigen::VectorXd pops = state.populations();
  const int top = space.dim(mode) - 1;
  double total = 0.0;
  for (int i = 0; i < space.total_dim(); ++i) {
    if (space.unflatten(i)[static_cast<size_t>(mode)] == top) total += pops(i);
  }
  return total;
}

inline double mean_occupation(const QuantumState& state, int mode) {
  const ModeSpace& space = state.space();
  if (mode < 0 || mode >= space.num_modes()) fail(ErrorCode::InvalidSpace, "mode index out of range");
  const Eigen::VectorXd pops = state.populations();
  double total = 0.0;
  for (int i = 0; i < space.total_dim(); ++i)
    total += pops(i) * static_cast<double>(space.unflatten(i)[static_cast<size_t>(mode)]);
  return total;
}

// Product of two single-mode states on the combined two-mode space. Pure
// factors stay pure; a mixed factor forces a density result.
inline QuantumState product_state(const QuantumState& a, const QuantumState& b) {
  if (a.space().num_modes() != 1 || b.space().num_modes() != 1)
    fail(ErrorCode::InvalidSpace, "product_state combines single-mode states");
  ModeSpace joint = ModeSpace::two_mode(a.space().dim(0), b.space().dim(0));
  const double leak = a.leakage() + b.leakage();
  if (a.is_pure() && b.is_pure()) {
    const int da = a.space().dim(0), db = b.space().dim(0);
    Vector v(da * db);
    for (int i = 0; i < da; ++i)
      for (int j = 0; j < db; ++j) v(i * db + j) = a.amplitudes()(i) * b.amplitudes()(j);
    return QuantumState::pure(std::move(joint), std::move(v), leak);
  }
  Matrix rho = tensor(a.density_matrix(), b.density_matrix());
  return QuantumState::density(std::move(joint), std::move(rho), leak);
}

// Fidelity <ref|rho|ref> against a pure reference.
inline double state_fidelity(const QuantumState& state, const QuantumState& pure_ref) {
  if (!pure_ref.is_pure()) fail(ErrorCode::InvalidSpace, "reference must be pure");
  if (state.space() != pure_ref.space()) fail(ErrorCode::DimensionMismatch, "fidelity: spaces differ");
  if (state.is_pure()) return std::norm(pure_ref.amplitudes().dot(state.amplitudes()));
  return (pure_ref.amplitudes().adjoint() * state.rho() * pure_ref.amplitudes())(0).real();
}

inline double purity(const QuantumState& state) {
  if (state.is_pure()) return 1.0;
  return (state.rho() * state.rho()).trace().real();
}

}  // namespace bosim

#endif
