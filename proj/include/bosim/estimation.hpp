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

#ifndef BOSIM_ESTIMATION_HPP
#define BOSIM_ESTIMATION_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bosim/device.hpp"
#include "bosim/error.hpp"

namespace bosim {

// Decay parameters are fitted as rates (1/us) so that the lossless limit sits
// at an interior point of parameter space instead of tau -> infinity.
enum class FitModelKind {
  DecayingSinusoid,  // y = A e^{-r1 t} [1 + e^{-rphi t} sin(2 pi f t + phi0)]/2 + c
  Exponential,       // y = A e^{-r t} + c
};

inline std::vector<std::string> fit_parameter_names(FitModelKind kind) {
  if (kind == FitModelKind::DecayingSinusoid)
    return {"amplitude", "rate1_per_us", "rate_phi_per_us", "frequency_mhz", "phase_rad", "offset"};
  return {"amplitude", "rate_per_us", "offset"};
}

inline void eval_fit_model(FitModelKind kind, const Eigen::VectorXd& p, std::span<const double> t,
                           Eigen::VectorXd* y, Eigen::MatrixXd* jac) {
  const int n = static_cast<int>(t.size());
  if (kind == FitModelKind::DecayingSinusoid) {
    const double a = p(0), r1 = p(1), rphi = p(2), f = p(3), phi0 = p(4), c = p(5);
    if (y) y->resize(n);
    if (jac) jac->resize(n, 6);
    for (int i = 0; i < n; ++i) {
      const double ti = t[static_cast<size_t>(i)];
      const double e1 = std::exp(-r1 * ti);
      const double e2 = std::exp(-rphi * ti);
      const double s = std::sin(kTwoPi * f * ti + phi0);
      const double cth = std::cos(kTwoPi * f * ti + phi0);
      const double body = 0.5 * e1 * (1.0 + e2 * s);
      if (y) (*y)(i) = a * body + c;
      if (jac) {
        (*jac)(i, 0) = body;
        (*jac)(i, 1) = -ti * a * body;
        (*jac)(i, 2) = -0.5 * ti * a * e1 * e2 * s;
        (*jac)(i, 3) = kPi * ti * a * e1 * e2 * cth;
        (*jac)(i, 4) = 0.5 * a * e1 * e2 * cth;
        (*jac)(i, 5) = 1.0;
      }
    }
    return;
  }
  const double a = p(0), r = p(1), c = p(2);
  if (y) y->resize(n);
  if (jac) jac->resize(n, 3);
  for (int i = 0; i < n; ++i) {
    const double ti = t[static_cast<size_t>(i)];
    const double e = std::exp(-r * ti);
    if (y) (*y)(i) = a * e + c;
    if (jac) {
      (*jac)(i, 0) = e;
      (*jac)(i, 1) = -ti * a * e;
      (*jac)(i, 2) = 1.0;
    }
  }
}

struct FitResult {
  FitModelKind kind = FitModelKind::Exponential;
  std::vector<std::string> names;
  Eigen::VectorXd values;
  Eigen::MatrixXd covariance;  // Gauss-Newton approximation, rate parametrization
  double rss = 0.0;
  int iterations = 0;
  bool converged = false;

  double value(const std::string& name) const {
    for (size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return values(static_cast<int>(i));
    fail(ErrorCode::InvalidParams, "unknown fit parameter '" + name + "'");
  }

  // 1/rate, +inf when the fitted rate is indistinguishable from zero.
  double decay_time(const std::string& rate_name) const {
    const double r = value(rate_name);
    if (std::abs(r) < 1e-12) return std::numeric_limits<double>::infinity();
    return 1.0 / r;
  }
};

namespace detail {

inline FitResult levenberg_marquardt(FitModelKind kind, std::span<const double> t, std::span<const double> y,
                                     Eigen::VectorXd p) {
  const int n = static_cast<int>(t.size());
  const int k = static_cast<int>(p.size());
  Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);

  Eigen::VectorXd model, resid;
  Eigen::MatrixXd jac;
  auto residuals = [&](const Eigen::VectorXd& params, Eigen::VectorXd& out) {
    eval_fit_model(kind, params, t, &model, nullptr);
    out = model - yv;
    return out.squaredNorm();
  };

  double rss = residuals(p, resid);
  double lambda = 1e-3;
  bool converged = false;
  int iter = 0;
  const int max_iter = 500;
  for (; iter < max_iter; ++iter) {
    eval_fit_model(kind, p, t, &model, &jac);
    const Eigen::VectorXd grad = jac.transpose() * resid;
    if (grad.cwiseAbs().maxCoeff() < 1e-9 * std::max(1.0, rss)) {
      converged = true;
      break;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    Eigen::VectorXd damping = jtj.diagonal();
    const double floor = 1e-12 * std::max(1.0, damping.maxCoeff());
    for (int i = 0; i < k; ++i) damping(i) = std::max(damping(i), floor);

    bool stepped = false;
    for (int tries = 0; tries < 60; ++tries) {
      Eigen::MatrixXd lhs = jtj;
      lhs.diagonal() += lambda * damping;
      const Eigen::VectorXd delta = lhs.ldlt().solve(-grad);
      Eigen::VectorXd trial = p + delta;
      Eigen::VectorXd trial_resid;
      const double trial_rss = residuals(trial, trial_resid);
      if (std::isfinite(trial_rss) && trial_rss <= rss) {
        const double drop = rss - trial_rss;
        p = trial;
        resid = trial_resid;
        const bool tiny = drop <= 1e-10 * std::max(rss, 1e-30);
        rss = trial_rss;
        lambda = std::max(lambda * 0.3, 1e-14);
        stepped = true;
        if (tiny) converged = true;
        break;
      }
      lambda *= 3.0;
      if (lambda > 1e14) break;
    }
    if (converged || !stepped) {
      if (!stepped && rss <= 1e-20 * std::max(1.0, yv.squaredNorm())) converged = true;
      break;
    }
  }

  FitResult out;
  out.kind = kind;
  out.names = fit_parameter_names(kind);
  out.values = p;
  out.rss = rss;
  out.iterations = iter;
  out.converged = converged;
  eval_fit_model(kind, p, t, &model, &jac);
  Eigen::MatrixXd jtj = jac.transpose() * jac;
  const double dof = std::max(1, n - k);
  const double sigma2 = rss / dof;
  out.covariance = sigma2 * jtj.completeOrthogonalDecomposition().pseudoInverse();
  return out;
}

inline void check_fit_inputs(std::span<const double> t, std::span<const double> y, size_t min_points) {
  if (t.size() != y.size()) fail(ErrorCode::InvalidDataset, "t and y lengths differ");
  if (t.size() < min_points)
    fail(ErrorCode::FitFailed, "need at least " + std::to_string(min_points) + " points");
  double lo = y[0], hi = y[0];
  for (double v : y) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi - lo <= 1e-12 * std::max(1.0, std::abs(hi)))
    fail(ErrorCode::FitDegenerate, "input signal is constant");
}

// Coarse frequency seed: direct discrete spectrum of the detrended signal,
// refined by parabolic interpolation around the magnitude peak.
inline double seed_frequency(std::span<const double> t, std::span<const double> y) {
  const int n = static_cast<int>(t.size());
  const double span = t[static_cast<size_t>(n - 1)] - t[0];
  if (span <= 0) fail(ErrorCode::InvalidDataset, "time axis must be increasing");
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= n;

  const int half = std::max(2, n / 2);
  std::vector<double> mag(static_cast<size_t>(half), 0.0);
  for (int kk = 1; kk < half; ++kk) {
    const double f = kk / (span * static_cast<double>(n) / (n - 1.0));
    double re = 0.0, im = 0.0;
    for (int i = 0; i < n; ++i) {
      const double ph = kTwoPi * f * t[static_cast<size_t>(i)];
      re += (y[static_cast<size_t>(i)] - mean) * std::cos(ph);
      im -= (y[static_cast<size_t>(i)] - mean) * std::sin(ph);
    }
    mag[static_cast<size_t>(kk)] = std::hypot(re, im);
  }
  int best = 1;
  for (int kk = 2; kk < half; ++kk)
    if (mag[static_cast<size_t>(kk)] > mag[static_cast<size_t>(best)]) best = kk;

  double shift = 0.0;
  if (best > 1 && best + 1 < half) {
    const double m0 = mag[static_cast<size_t>(best - 1)], m1 = mag[static_cast<size_t>(best)],
                 m2 = mag[static_cast<size_t>(best + 1)];
    const double denom = m0 - 2.0 * m1 + m2;
    if (std::abs(denom) > 1e-30) shift = std::clamp(0.5 * (m0 - m2) / denom, -0.5, 0.5);
  }
  const double bin = 1.0 / (span * static_cast<double>(n) / (n - 1.0));
  return (best + shift) * bin;
}

inline double seed_decay_rate(std::span<const double> t, std::span<const double> y, double offset) {
  const size_t n = t.size();
  const size_t mid = n / 2;
  double m1 = 0.0, m2 = 0.0, t1 = 0.0, t2 = 0.0;
  for (size_t i = 0; i < mid; ++i) m1 = std::max(m1, y[i] - offset);
  for (size_t i = mid; i < n; ++i) m2 = std::max(m2, y[i] - offset);
  for (size_t i = 0; i < mid; ++i) t1 += t[i];
  for (size_t i = mid; i < n; ++i) t2 += t[i];
  t1 /= std::max<size_t>(1, mid);
  t2 /= std::max<size_t>(1, n - mid);
  if (m1 <= 0.0 || m2 <= 0.0 || t2 <= t1) return 0.0;
  return std::max(0.0, std::log(m1 / m2) / (t2 - t1));
}

}  // namespace detail

// Fits y = A e^{-r1 t} [1 + e^{-rphi t} sin(2 pi f t + phi0)]/2 + c.
// Frequency is seeded from a direct spectrum scan, decay from the envelope of
// the two data halves; both phase branches of the first sample are tried and
// the better minimum kept.
inline FitResult fit_decaying_sinusoid(std::span<const double> t, std::span<const double> y) {
  detail::check_fit_inputs(t, y, 8);
  double lo = y[0], hi = y[0];
  for (double v : y) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double c0 = lo;
  const double a0 = hi - lo;
  const double f0 = detail::seed_frequency(t, y);
  const double r0 = detail::seed_decay_rate(t, y, c0);
  const double s0 = std::clamp(2.0 * (y[0] - c0) / a0 - 1.0, -1.0, 1.0);

  FitResult best;
  bool have = false;
  for (const double phi0 : {std::asin(s0), kPi - std::asin(s0)}) {
    Eigen::VectorXd p(6);
    p << a0, r0, r0, f0, phi0, c0;
    FitResult fit = detail::levenberg_marquardt(FitModelKind::DecayingSinusoid, t, y, p);
    if (!have || fit.rss < best.rss) {
      best = fit;
      have = true;
    }
  }
  if (!best.converged)
    fail(ErrorCode::FitFailed, "oscillation fit did not converge after " + std::to_string(best.iterations) +
                                   " iterations, rss=" + std::to_string(best.rss));
  return best;
}

// Fits y = A e^{-r t} + c.
inline FitResult fit_exponential(std::span<const double> t, std::span<const double> y) {
  detail::check_fit_inputs(t, y, 4);
  double lo = y[0], hi = y[0];
  for (double v : y) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const bool decaying = y.front() >= y.back();
  const double c0 = decaying ? lo : hi;
  const double a0 = y.front() - c0;
  const double r0 = std::max(detail::seed_decay_rate(t, y, c0), 1e-6);
  Eigen::VectorXd p(3);
  p << (a0 == 0.0 ? hi - lo : a0), r0, c0;
  FitResult fit = detail::levenberg_marquardt(FitModelKind::Exponential, t, y, p);
  if (!fit.converged)
    fail(ErrorCode::FitFailed, "exponential fit did not converge after " + std::to_string(fit.iterations) +
                                   " iterations, rss=" + std::to_string(fit.rss));
  return fit;
}

// Largest relative deviation between the analytic Jacobian and central finite
// differences at the given parameter point.
inline double gradient_check(FitModelKind kind, const Eigen::VectorXd& p, std::span<const double> t) {
  Eigen::MatrixXd jac;
  eval_fit_model(kind, p, t, nullptr, &jac);
  double worst = 0.0;
  Eigen::VectorXd yp, ym;
  for (int j = 0; j < p.size(); ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(p(j)));
    Eigen::VectorXd pp = p, pm = p;
    pp(j) += h;
    pm(j) -= h;
    eval_fit_model(kind, pp, t, &yp, nullptr);
    eval_fit_model(kind, pm, t, &ym, nullptr);
    for (int i = 0; i < static_cast<int>(t.size()); ++i) {
      const double num = (yp(i) - ym(i)) / (2.0 * h);
      const double ana = jac(i, j);
      worst = std::max(worst, std::abs(num - ana) / std::max({std::abs(num), std::abs(ana), 1.0}));
    }
  }
  return worst;
}

// Composite decoherence time of the interference: 1/(1/(2 tau1) + 1/tau_phi).
// Either argument may be +inf to disable that channel.
inline double bs_decoherence_time(double tau1, double tau_phi) {
  if (!(tau1 > 0.0) || !(tau_phi > 0.0)) fail(ErrorCode::InvalidParams, "decay times must be positive");
  const double rate = 0.5 / tau1 + 1.0 / tau_phi;
  if (rate == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / rate;
}

// Fractional fidelity loss of one 50:50 pulse: duration over decoherence time.
inline double bs_infidelity(double t_bs, double tau_bs) {
  if (t_bs < 0.0) fail(ErrorCode::InvalidParams, "pulse duration must be nonnegative");
  if (!(tau_bs > 0.0)) fail(ErrorCode::InvalidParams, "decoherence time must be positive");
  return t_bs / tau_bs;
}

// Interference contrast of a two-photon coincidence dip:
// (P11(0) - min P11)/P11(0), computed on normalized data.
inline double hom_contrast(std::span<const double> t, std::span<const double> p11) {
  if (t.size() != p11.size() || t.size() < 3) fail(ErrorCode::InvalidDataset, "contrast needs matched columns");
  size_t base = 0;
  for (size_t i = 1; i < t.size(); ++i)
    if (t[i] < t[base]) base = i;
  if (std::abs(t[base]) > 1e-9) fail(ErrorCode::InvalidDataset, "missing t=0 baseline");
  const double baseline = p11[base];
  if (baseline <= 0.0) fail(ErrorCode::InvalidDataset, "baseline coincidence is not positive");
  double lowest = baseline;
  for (double v : p11) lowest = std::min(lowest, v);
  return (baseline - lowest) / baseline;
}

}  // namespace bosim

#endif
