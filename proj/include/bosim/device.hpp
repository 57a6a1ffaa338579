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

#ifndef BOSIM_DEVICE_HPP
#define BOSIM_DEVICE_HPP

#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bosim/error.hpp"
#include "bosim/fock.hpp"

namespace bosim {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

// Static device description. Frequencies and dispersive shifts are cyclic
// (MHz), times are in microseconds, so frequency * time is dimensionless and
// the 2*pi shows up only inside evolution.
struct DeviceParams {
  double omega_a = 5554.0;  // memory A frequency, MHz
  double omega_b = 6543.0;  // memory B frequency, MHz
  double omega_ge = 5901.0; // coupler g-e frequency, MHz

  double chi_ac = 0.62;  // dispersive shift, memory A to coupler, MHz
  double chi_bc = 0.26;  // dispersive shift, memory B to coupler, MHz
  double chi_1 = 1.01;   // dispersive shift, memory A to its ancilla, MHz

  // Self/cross Kerr while the conversion drives are on, MHz.
  double chi_aa = 0.008;
  double chi_bb = 0.005;
  double chi_ab = 0.001;
  // Undriven (bare) Kerr, MHz.
  double bare_chi_aa = 0.004;
  double bare_chi_bb = 0.002;
  double bare_chi_ab = 0.001;

  double alpha = 74.0;         // coupler anharmonicity, MHz
  double kappa_tilde = 0.0032; // effective coupler linewidth, MHz

  double t1_a = 450.0;   // us
  double t1_b = 450.0;   // us
  double tphi_a = 1125.0; // pure-dephasing time, us
  double tphi_b = 1125.0; // us

  double readout_scale = 0.82;   // multiplicative state-prep-and-measurement factor
  double parity_contrast = 0.94; // parity-meter contrast
  double p_exc = 0.01;           // coupler excitation probability per conversion pulse
  double p_exc_slope = 0.1;      // p_exc per unit |xi1*xi2|

  double drive_detuning_1 = 157.0;    // first conversion tone detuning from omega_ge, MHz
  double selective_pulse_time = 4.8;  // number-selective pulse length, us
  double drive_ring_time = 0.1;       // drive ring-up/down time, us
  double drive_dephasing_multiplier = 1.0;  // extra dephasing factor while drives are on

  double leakage_tolerance = 1e-6;

  void validate() const;
};

// One conversion tone: complex amplitude (MHz) and drive frequency (MHz).
struct DriveTone {
  Complex epsilon{0.0, 0.0};
  double omega_d = 0.0;
  double ring_time = 0.1;  // us
};

// Linear-response amplitude of the coupler under one tone:
// xi = -i eps / (kappa/2 + i (omega_ge - omega_d)).
inline Complex drive_amplitude(const DriveTone& tone, const DeviceParams& p) {
  const Complex denom(0.5 * p.kappa_tilde, p.omega_ge - tone.omega_d);
  if (std::abs(denom) == 0.0)
    fail(ErrorCode::ResonantDriveUndefined, "tone on resonance with an undamped coupler");
  return Complex(0.0, -1.0) * tone.epsilon / denom;
}

// Drive-induced frequency shift of the pumped transition. `far_detuned`
// replaces the delta/(delta+alpha) factor by 1.
inline double stark_shift(Complex xi, const DeviceParams& p, double delta, bool far_detuned = false) {
  double factor = 1.0;
  if (!far_detuned) {
    if (delta + p.alpha == 0.0) fail(ErrorCode::InvalidDetunings, "stark shift singular at delta = -alpha");
    factor = delta / (delta + p.alpha);
  }
  return -2.0 * p.alpha * std::norm(xi) * factor;
}

// Bilinear conversion rate produced by a tone pair, cyclic MHz. The relative
// drive phase is carried separately; this is the magnitude.
inline double coupling_strength(const DeviceParams& p, Complex xi1, Complex xi2) {
  if (p.chi_ac <= 0.0 || p.chi_bc <= 0.0)
    fail(ErrorCode::InvalidParams, "coupling strength needs positive dispersive shifts");
  return std::sqrt(p.chi_ac * p.chi_bc) * std::abs(xi1) * std::abs(xi2);
}

// Finite-anharmonicity correction to the conversion rate:
// g_corrected = g / (1 + 2 alpha / (delta + d2 + da + db)).
inline double coupling_correction(double g, const DeviceParams& p, double delta, double d2, double da, double db) {
  const double sum = delta + d2 + da + db;
  if (sum == 0.0) fail(ErrorCode::SingularCorrection, "detuning sum vanishes");
  const double denom = 1.0 + 2.0 * p.alpha / sum;
  if (denom == 0.0) fail(ErrorCode::SingularCorrection, "correction denominator vanishes");
  return g / denom;
}

// Decay inherited through a hybridized ancilla: kappa = |lambda/Delta|^2 * gamma.
inline double inverse_purcell(double lambda, double detuning, double gamma) {
  if (detuning == 0.0) fail(ErrorCode::InvalidDetunings, "inverse Purcell rate undefined on resonance");
  if (gamma < 0.0) fail(ErrorCode::InvalidParams, "decay rate must be nonnegative");
  const double r = lambda / detuning;
  return r * r * gamma;
}

// Length of a 50:50 pulse: theta = pi/4 at t = 1/(8 g).
inline double bs_duration(double g_mhz) {
  if (g_mhz <= 0.0) fail(ErrorCode::InvalidCoupling, "bs duration needs g > 0");
  return 1.0 / (8.0 * g_mhz);
}

inline void DeviceParams::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorCode::ConfigError, what);
  };
  require(omega_a > 0 && omega_b > 0 && omega_ge > 0, "mode frequencies must be positive");
  require(chi_ac > 0 && chi_bc > 0 && chi_1 > 0, "dispersive shifts must be positive");
  require(alpha > 0, "anharmonicity must be positive");
  require(kappa_tilde >= 0, "kappa_tilde must be nonnegative");
  require(t1_a > 0 && t1_b > 0, "T1 times must be positive");
  require(tphi_a > 0 && tphi_b > 0, "dephasing times must be positive");
  require(readout_scale > 0 && readout_scale <= 1, "readout_scale must lie in (0, 1]");
  require(parity_contrast > 0 && parity_contrast <= 1, "parity_contrast must lie in (0, 1]");
  require(p_exc >= 0 && p_exc < 1, "p_exc must lie in [0, 1)");
  require(p_exc_slope >= 0, "p_exc_slope must be nonnegative");
  require(selective_pulse_time >= 0, "selective_pulse_time must be nonnegative");
  require(drive_ring_time >= 0, "drive_ring_time must be nonnegative");
  require(drive_dephasing_multiplier >= 0, "drive_dephasing_multiplier must be nonnegative");
  require(leakage_tolerance > 0, "leakage_tolerance must be positive");

  // The number-selective pulse frequencies omega_ge - n chi_ac - m chi_bc
  // must be distinct for n, m <= 10, otherwise joint readout is ambiguous.
  std::vector<double> freqs;
  freqs.reserve(121);
  for (int n = 0; n <= 10; ++n)
    for (int m = 0; m <= 10; ++m) freqs.push_back(omega_ge - n * chi_ac - m * chi_bc);
  for (size_t i = 0; i < freqs.size(); ++i)
    for (size_t j = i + 1; j < freqs.size(); ++j)
      if (std::abs(freqs[i] - freqs[j]) < 1e-9)
        fail(ErrorCode::ConfigError, "selective pulse frequencies collide for photon numbers <= 10");
}

inline DeviceParams default_device_params() {
  DeviceParams p;
  p.validate();
  return p;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

struct ConfigEntry {
  double value = 0.0;
  int line = 0;
  std::string unit;  // first token of the trailing comment, if any
};

}  // namespace detail

// Reads the flat `key = value # unit, description` device file. Unknown keys,
// duplicate keys, malformed numbers and unit mismatches are reported with
// their line number. Dephasing may be given either directly (tphi_a/tphi_b)
// or through t2_a/t2_b with 1/T2 = 1/(2 T1) + 1/Tphi.
inline DeviceParams load_device_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigError, "cannot open device config '" + path + "'");

  static const std::map<std::string, std::string> expected_unit = {
      {"omega_a", "MHz"}, {"omega_b", "MHz"}, {"omega_ge", "MHz"},
      {"chi_ac", "MHz"}, {"chi_bc", "MHz"}, {"chi_1", "MHz"},
      {"chi_aa", "MHz"}, {"chi_bb", "MHz"}, {"chi_ab", "MHz"},
      {"bare_chi_aa", "MHz"}, {"bare_chi_bb", "MHz"}, {"bare_chi_ab", "MHz"},
      {"alpha", "MHz"}, {"kappa_tilde", "MHz"},
      {"t1_a", "us"}, {"t1_b", "us"}, {"t2_a", "us"}, {"t2_b", "us"},
      {"tphi_a", "us"}, {"tphi_b", "us"},
      {"readout_scale", "dimensionless"}, {"parity_contrast", "dimensionless"},
      {"p_exc", "dimensionless"}, {"p_exc_slope", "dimensionless"},
      {"drive_detuning_1", "MHz"}, {"selective_pulse_time", "us"},
      {"drive_ring_time", "us"}, {"drive_dephasing_multiplier", "dimensionless"},
      {"leakage_tolerance", "dimensionless"},
  };

  std::map<std::string, detail::ConfigEntry> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string comment;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      comment = detail::trim(line.substr(hash + 1));
      line = line.substr(0, hash);
    }
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::ConfigError, path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value_text = detail::trim(line.substr(eq + 1));
    if (key.empty() || value_text.empty())
      fail(ErrorCode::ConfigError, path + ":" + std::to_string(lineno) + ": empty key or value");
    if (!expected_unit.count(key))
      fail(ErrorCode::ConfigError, path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (entries.count(key))
      fail(ErrorCode::ConfigError, path + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");

    detail::ConfigEntry e;
    e.line = lineno;
    try {
      size_t consumed = 0;
      e.value = std::stod(value_text, &consumed);
      if (consumed != value_text.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      fail(ErrorCode::ConfigError, path + ":" + std::to_string(lineno) + ": bad number '" + value_text + "'");
    }
    if (!comment.empty()) {
      std::istringstream cs(comment);
      std::string unit;
      cs >> unit;
      while (!unit.empty() && (unit.back() == ',' || unit.back() == ';')) unit.pop_back();
      if (unit == "MHz" || unit == "us" || unit == "dimensionless") {
        if (unit != expected_unit.at(key))
          fail(ErrorCode::ConfigError, path + ":" + std::to_string(lineno) + ": key '" + key + "' expects " +
                                           expected_unit.at(key) + ", comment says " + unit);
        e.unit = unit;
      }
    }
    entries[key] = e;
  }

  DeviceParams p;
  auto take = [&entries](const std::string& key, double& dst) {
    auto it = entries.find(key);
    if (it != entries.end()) {
      dst = it->second.value;
      entries.erase(it);
      return true;
    }
    return false;
  };

  for (const std::string& key : {"omega_a", "omega_b", "omega_ge", "chi_ac", "chi_bc", "chi_1", "alpha"}) {
    double* dst = nullptr;
    if (key == "omega_a") dst = &p.omega_a;
    else if (key == "omega_b") dst = &p.omega_b;
    else if (key == "omega_ge") dst = &p.omega_ge;
    else if (key == "chi_ac") dst = &p.chi_ac;
    else if (key == "chi_bc") dst = &p.chi_bc;
    else if (key == "chi_1") dst = &p.chi_1;
    else dst = &p.alpha;
    if (!take(key, *dst)) fail(ErrorCode::ConfigError, path + ": missing required key '" + key + "'");
  }

  take("chi_aa", p.chi_aa);
  take("chi_bb", p.chi_bb);
  take("chi_ab", p.chi_ab);
  take("bare_chi_aa", p.bare_chi_aa);
  take("bare_chi_bb", p.bare_chi_bb);
  take("bare_chi_ab", p.bare_chi_ab);
  take("kappa_tilde", p.kappa_tilde);
  if (!take("t1_a", p.t1_a)) fail(ErrorCode::ConfigError, path + ": missing required key 't1_a'");
  if (!take("t1_b", p.t1_b)) fail(ErrorCode::ConfigError, path + ": missing required key 't1_b'");

  // Dephasing: direct tphi or via t2, but not both for the same mode.
  auto dephasing = [&](const std::string& mode, double t1, double& tphi) {
    const std::string t2_key = "t2_" + mode;
    const std::string tphi_key = "tphi_" + mode;
    const bool has_t2 = entries.count(t2_key) > 0;
    const bool has_tphi = entries.count(tphi_key) > 0;
    if (has_t2 && has_tphi)
      fail(ErrorCode::ConfigError, path + ": give either '" + t2_key + "' or '" + tphi_key + "', not both");
    if (has_tphi) {
      take(tphi_key, tphi);
      return;
    }
    if (!has_t2) fail(ErrorCode::ConfigError, path + ": missing '" + t2_key + "' or '" + tphi_key + "'");
    double t2 = 0.0;
    take(t2_key, t2);
    if (t2 <= 0) fail(ErrorCode::ConfigError, path + ": " + t2_key + " must be positive");
    const double inv_tphi = 1.0 / t2 - 1.0 / (2.0 * t1);
    if (inv_tphi < 0)
      fail(ErrorCode::ConfigError, path + ": " + t2_key + " exceeds 2*t1, dephasing rate would be negative");
    tphi = (inv_tphi == 0.0) ? std::numeric_limits<double>::infinity() : 1.0 / inv_tphi;
  };
  dephasing("a", p.t1_a, p.tphi_a);
  dephasing("b", p.t1_b, p.tphi_b);

  take("readout_scale", p.readout_scale);
  take("parity_contrast", p.parity_contrast);
  take("p_exc", p.p_exc);
  take("p_exc_slope", p.p_exc_slope);
  take("drive_detuning_1", p.drive_detuning_1);
  take("selective_pulse_time", p.selective_pulse_time);
  take("drive_ring_time", p.drive_ring_time);
  take("drive_dephasing_multiplier", p.drive_dephasing_multiplier);
  take("leakage_tolerance", p.leakage_tolerance);

  if (!entries.empty())
    fail(ErrorCode::ConfigError, path + ":" + std::to_string(entries.begin()->second.line) +
                                     ": key '" + entries.begin()->first + "' not consumed");
  p.validate();
  return p;
}

}  // namespace bosim

#endif
