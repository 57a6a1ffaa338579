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

#ifndef BOSIM_COMMANDS_HPP
#define BOSIM_COMMANDS_HPP

#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bosim/dataset.hpp"
#include "bosim/device.hpp"
#include "bosim/error.hpp"
#include "bosim/estimation.hpp"
#include "bosim/interferometry.hpp"
#include "bosim/measurement.hpp"
#include "bosim/program.hpp"
#include "bosim/sampling.hpp"
#include "bosim/version.hpp"

namespace bosim {

// Exit codes: 0 success, 2 usage error, 3 config error, 4 numerical guard.
inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::IoError:
      return 3;
    case ErrorCode::StepTooLarge:
    case ErrorCode::TruncationTooSmall:
    case ErrorCode::OutOfTruncation:
    case ErrorCode::AllDiscarded:
    case ErrorCode::FitFailed:
    case ErrorCode::FitDegenerate:
      return 4;
    default:
      return 2;
  }
}

namespace cli_detail {

using nlohmann::json;

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  os << content;
  if (!os) fail(ErrorCode::IoError, "failed writing '" + path + "'");
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

inline DeviceParams load_params(const std::string& config_path) {
  if (config_path.empty()) return default_device_params();
  return load_device_config(config_path);
}

inline std::string prepare_out_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!dir.empty()) fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create output directory '" + dir + "': " + ec.message());
  return dir.empty() ? std::string(".") : dir;
}

inline std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).generic_string();
}

struct ManifestInfo {
  std::string command;
  std::vector<std::string> argv;
  std::string config_path;
  std::string program_path;
  std::vector<std::string> outputs;
  std::uint64_t seed = 1;
};

// The manifest stores the argument vector verbatim and no timestamps, so a
// replay reproduces the run byte for byte.
inline void write_manifest(const std::string& path, const ManifestInfo& info) {
  json j;
  j["argv"] = info.argv;
  j["command"] = info.command;
  j["config_path"] = info.config_path;
  j["program_path"] = info.program_path;
  j["outputs"] = info.outputs;
  j["seed"] = info.seed;
  j["versions"] = {{"bosim", BOSIM_VERSION_STRING}, {"manifest", 1}};
  write_text_file(path, j.dump(2) + "\n");
}

// Matches probability columns named [m<k>_]P<na>_<nb>; returns the prefix so
// that columns from one measurement sample from one multinomial draw.
inline bool parse_prob_column(const std::string& name, std::string* prefix) {
  std::string_view s = name;
  std::string pfx;
  if (s.size() > 2 && s[0] == 'm') {
    size_t i = 1;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i > 1 && i < s.size() && s[i] == '_') {
      pfx = std::string(s.substr(0, i + 1));
      s = s.substr(i + 1);
    }
  }
  if (s.size() < 4 || s[0] != 'P') return false;
  size_t i = 1;
  const size_t digits_start = i;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i == digits_start || i >= s.size() || s[i] != '_') return false;
  ++i;
  const size_t second_start = i;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i == second_start || i != s.size()) return false;
  *prefix = pfx;
  return true;
}

inline bool is_two_outcome_column(const std::string& name) {
  for (const char* suffix : {"parity_a", "parity_b", "overlap", "overlap_raw", "overlap_scaled"})
    if (name.ends_with(suffix)) return true;
  return false;
}

// Replaces exact probabilities by frequencies from a seeded multinomial draw.
// Joint-probability groups draw one multinomial per row (with an implicit
// complement category when the group sums below one); parity-like columns in
// [-1, 1] draw a two-outcome sample each.
inline void apply_shot_noise(Dataset* ds, std::int64_t shots, std::uint64_t seed) {
  if (shots <= 0) return;
  Rng rng(seed);

  std::vector<std::pair<std::string, std::vector<size_t>>> groups;  // insertion order
  std::vector<size_t> two_outcome;
  for (size_t c = 0; c < ds->columns.size(); ++c) {
    std::string prefix;
    if (parse_prob_column(ds->columns[c], &prefix)) {
      bool found = false;
      for (auto& g : groups)
        if (g.first == prefix) {
          g.second.push_back(c);
          found = true;
        }
      if (!found) groups.push_back({prefix, {c}});
    } else if (is_two_outcome_column(ds->columns[c])) {
      two_outcome.push_back(c);
    }
  }

  for (auto& row : ds->rows) {
    for (const auto& g : groups) {
      std::vector<double> probs;
      probs.reserve(g.second.size() + 1);
      double total = 0.0;
      for (size_t c : g.second) {
        const double p = std::max(0.0, row[c]);
        probs.push_back(p);
        total += p;
      }
      if (total < 1.0) probs.push_back(1.0 - total);  // unobserved remainder
      const std::vector<std::int64_t> counts = sample_counts(probs, shots, rng);
      for (size_t k = 0; k < g.second.size(); ++k)
        row[g.second[k]] = static_cast<double>(counts[k]) / static_cast<double>(shots);
    }
    for (size_t c : two_outcome) {
      const double p = std::clamp(0.5 * (1.0 + row[c]), 0.0, 1.0);
      const std::vector<std::int64_t> counts = sample_counts({p, 1.0 - p}, shots, rng);
      row[c] = 2.0 * static_cast<double>(counts[0]) / static_cast<double>(shots) - 1.0;
    }
  }
}

inline std::vector<int> parse_dims_text(const std::string& text) {
  const size_t comma = text.find(',');
  if (comma == std::string::npos || comma == 0 || comma + 1 >= text.size())
    fail(ErrorCode::InvalidDimension, "--dims expects two comma-separated values, e.g. 6,6");
  int a = 0, b = 0;
  try {
    size_t used = 0;
    a = std::stoi(text.substr(0, comma), &used);
    if (used != comma) throw std::invalid_argument(text);
    b = std::stoi(text.substr(comma + 1), &used);
    if (used != text.size() - comma - 1) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    fail(ErrorCode::InvalidDimension, "--dims expects two comma-separated integers, got '" + text + "'");
  }
  return {a, b};
}

struct CommonOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::string mode_str;   // empty = command default
  std::string dims_str;   // empty = command default
  double g = 0.034;
  double dt = 0.0;
  std::int64_t shots = 0;
  std::uint64_t seed = 1;

  std::optional<GateMode> mode() const {
    if (mode_str.empty()) return std::nullopt;
    return mode_str == "physical" ? GateMode::Physical : GateMode::Ideal;
  }
  GateMode mode_or(GateMode fallback) const { return mode().value_or(fallback); }
  bool has_dims() const { return !dims_str.empty(); }
  std::vector<int> dims_or(std::vector<int> fallback) const {
    return dims_str.empty() ? fallback : parse_dims_text(dims_str);
  }
};

inline void add_common_options(CLI::App* sub, CommonOptions* c) {
  sub->add_option("--config", c->config_path, "device parameter file (default: built-in values)");
  sub->add_option("--out", c->out_dir, "output directory")->capture_default_str();
  sub->add_option("--mode", c->mode_str, "gate fidelity model")->check(CLI::IsMember({"ideal", "physical"}));
  sub->add_option("--dims", c->dims_str, "Fock truncation per mode, e.g. 6,6");
  sub->add_option("--g", c->g, "conversion rate, cyclic MHz")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--dt", c->dt, "integrator step override, us")->check(CLI::NonNegativeNumber);
  sub->add_option("--shots", c->shots, "sample N shots per point instead of exact probabilities")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--seed", c->seed, "shot-sampling seed")->capture_default_str();
}

inline json fit_report_json(const FitResult& fit) {
  json j;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["rss"] = number_or_null(fit.rss);
  json params;
  for (size_t i = 0; i < fit.names.size(); ++i)
    params[fit.names[i]] = number_or_null(fit.values(static_cast<int>(i)));
  j["parameters"] = params;
  return j;
}

inline std::string brief(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// rabi: single-excitation exchange sweep P10/P01 vs drive time, plus the
// decaying-sinusoid fit and derived pulse figures.
// ---------------------------------------------------------------------------

struct RabiFlags {
  double t_max = 30.0;
  int steps = 121;
};

inline int cmd_rabi(const CommonOptions& c, const RabiFlags& f, const std::vector<std::string>& argv,
                    std::ostream& out) {
  const DeviceParams params = load_params(c.config_path);
  const std::string dir = prepare_out_dir(c.out_dir);

  Program prog;
  prog.dims = c.dims_or({4, 4});
  prog.mode = c.mode_or(GateMode::Ideal);
  prog.sweep = SweepClause{"t", 0.0, f.t_max, f.steps, 0};
  Instruction prep;
  prep.kind = InstructionKind::PrepareFock;
  prep.fock_a = 1;
  prep.fock_b = 0;
  Instruction bs;
  bs.kind = InstructionKind::Beamsplitter;
  bs.has_duration = true;
  bs.duration.placeholder = true;
  Instruction meas;
  meas.kind = InstructionKind::Measure;
  meas.measure = MeasureKind::Joint;
  prog.instructions = {prep, bs, meas};

  ExecOptions opts;
  opts.g_mhz = c.g;
  opts.dt = c.dt;
  Dataset full = sweep_dataset(prog, params, opts);
  apply_shot_noise(&full, c.shots, c.seed);

  const std::vector<double> t = full.column("t");
  const std::vector<double> p10 = full.column("P1_0");
  const std::vector<double> p01 = full.column("P0_1");
  Dataset ds;
  ds.columns = {"t", "P10", "P01", "P10_plus_P01"};
  for (size_t i = 0; i < t.size(); ++i) ds.add_row({t[i], p10[i], p01[i], p10[i] + p01[i]});
  const std::string csv_path = join_path(dir, "rabi.csv");
  write_csv_file(ds, csv_path);

  json report;
  report["mode"] = gate_mode_name(prog.mode);
  report["g_input_mhz"] = c.g;
  try {
    const FitResult fit = fit_decaying_sinusoid(t, p10);
    report["fit"] = fit_report_json(fit);
    const double f_mhz = fit.value("frequency_mhz");
    const double tau1 = fit.decay_time("rate1_per_us");
    const double tau_phi = fit.decay_time("rate_phi_per_us");
    const double g_fit = 0.5 * f_mhz;
    report["f_mhz"] = number_or_null(f_mhz);
    report["g_fit_mhz"] = number_or_null(g_fit);
    report["tau1_us"] = number_or_null(tau1);
    report["tau_phi_us"] = number_or_null(tau_phi);
    if (g_fit > 0.0 && tau1 > 0.0 && tau_phi > 0.0) {
      const double t_bs = bs_duration(g_fit);
      const double tau_bs = bs_decoherence_time(tau1, tau_phi);
      report["t_bs_us"] = number_or_null(t_bs);
      report["tau_bs_us"] = number_or_null(tau_bs);
      report["infidelity"] = number_or_null(bs_infidelity(t_bs, tau_bs));
      out << "rabi: f=" << brief(f_mhz) << " MHz, g=" << brief(g_fit) << " MHz, tau_bs=" << brief(tau_bs)
          << " us, infidelity=" << brief(bs_infidelity(t_bs, tau_bs)) << "\n";
    } else {
      out << "rabi: f=" << brief(f_mhz) << " MHz, g=" << brief(g_fit) << " MHz\n";
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::FitFailed && e.code() != ErrorCode::FitDegenerate &&
        e.code() != ErrorCode::InvalidDataset)
      throw;
    report["fit_error"] = e.what();
    out << "rabi: fit skipped (" << e.what() << ")\n";
  }
  const std::string fit_path = join_path(dir, "rabi_fit.json");
  write_text_file(fit_path, report.dump(2) + "\n");

  ManifestInfo info{"rabi", argv, c.config_path, "", {"rabi.csv", "rabi_fit.json"}, c.seed};
  write_manifest(join_path(dir, "rabi_manifest.json"), info);
  out << "rabi: wrote " << csv_path << " (" << ds.rows.size() << " rows), " << fit_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// hom: two-photon coincidence dip and revival vs drive time, with contrast.
// ---------------------------------------------------------------------------

struct HomFlags {
  double t_max = 10.0;
  int steps = 121;
};

inline int cmd_hom(const CommonOptions& c, const HomFlags& f, const std::vector<std::string>& argv,
                   std::ostream& out) {
  const DeviceParams params = load_params(c.config_path);
  const std::string dir = prepare_out_dir(c.out_dir);

  Program prog;
  prog.dims = c.dims_or({4, 4});
  prog.mode = c.mode_or(GateMode::Ideal);
  prog.sweep = SweepClause{"t", 0.0, f.t_max, f.steps, 0};
  Instruction prep;
  prep.kind = InstructionKind::PrepareFock;
  prep.fock_a = 1;
  prep.fock_b = 1;
  Instruction bs;
  bs.kind = InstructionKind::Beamsplitter;
  bs.has_duration = true;
  bs.duration.placeholder = true;
  Instruction meas;
  meas.kind = InstructionKind::Measure;
  meas.measure = MeasureKind::Joint;
  prog.instructions = {prep, bs, meas};

  ExecOptions opts;
  opts.g_mhz = c.g;
  opts.dt = c.dt;
  Dataset full = sweep_dataset(prog, params, opts);
  apply_shot_noise(&full, c.shots, c.seed);

  const std::vector<double> t = full.column("t");
  const std::vector<double> p11 = full.column("P1_1");
  const std::vector<double> p20 = full.column("P2_0");
  const std::vector<double> p02 = full.column("P0_2");
  const std::vector<double> surv = full.column("survival");

  const bool physical = prog.mode == GateMode::Physical;
  Dataset ds;
  ds.columns = {"t", "P11", "P20", "P02", "P20_plus_P02", "P11_distinguishable"};
  std::vector<double> p11_norm(t.size());
  for (size_t i = 0; i < t.size(); ++i) {
    const double theta = kTwoPi * c.g * t[i];
    const double cls = std::pow(std::cos(theta), 4) + std::pow(std::sin(theta), 4);
    ds.add_row({t[i], p11[i], p20[i], p02[i], p20[i] + p02[i], cls});
    const double scale = physical ? params.readout_scale * surv[i] : 1.0;
    p11_norm[i] = scale > 0.0 ? p11[i] / scale : 0.0;
  }
  const std::string csv_path = join_path(dir, "hom.csv");
  write_csv_file(ds, csv_path);

  json report;
  report["mode"] = gate_mode_name(prog.mode);
  report["g_input_mhz"] = c.g;
  report["t_bs_us"] = bs_duration(c.g);
  try {
    const double contrast = hom_contrast(t, p11_norm);
    double lo = p11_norm[0], hi = p11_norm[0], t_min = t[0];
    for (size_t i = 0; i < t.size(); ++i) {
      if (p11_norm[i] < lo) {
        lo = p11_norm[i];
        t_min = t[i];
      }
      hi = std::max(hi, p11_norm[i]);
    }
    report["contrast"] = contrast;  // (baseline - min)/baseline
    report["visibility"] = (hi + lo) > 0.0 ? (hi - lo) / (hi + lo) : 0.0;
    report["dip_depth"] = p11_norm[0] - lo;
    report["baseline_p11"] = p11_norm[0];
    report["min_p11"] = lo;
    report["t_at_min_us"] = t_min;
    report["distinguishable_floor"] = 0.5;
    out << "hom: contrast=" << brief(contrast) << ", min P11=" << brief(lo) << " at t=" << brief(t_min) << " us\n";
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InvalidDataset) throw;
    report["contrast_error"] = e.what();
  }
  const std::string report_path = join_path(dir, "hom_report.json");
  write_text_file(report_path, report.dump(2) + "\n");

  ManifestInfo info{"hom", argv, c.config_path, "", {"hom.csv", "hom_report.json"}, c.seed};
  write_manifest(join_path(dir, "hom_manifest.json"), info);
  out << "hom: wrote " << csv_path << " (" << ds.rows.size() << " rows), " << report_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// overlap: swap-test state overlap of two coherent states over an
// (alpha, relative phase) grid, raw and contrast-scaled, with references.
// ---------------------------------------------------------------------------

struct OverlapFlags {
  double alpha_max = 1.7320508075688772;  // |alpha|^2 up to 3
  int alpha_steps = 7;
  int phase_steps = 13;
};

inline int cmd_overlap(const CommonOptions& c, const OverlapFlags& f, const std::vector<std::string>& argv,
                       std::ostream& out) {
  const DeviceParams params = load_params(c.config_path);
  const std::string dir = prepare_out_dir(c.out_dir);
  const std::vector<int> dims = c.dims_or({20, 20});
  const GateMode mode = c.mode_or(GateMode::Ideal);

  Dataset ds;
  ds.columns = {"alpha", "dphi", "overlap_ideal", "overlap_raw", "overlap_scaled", "overlap_analytic"};
  double worst_vs_analytic = 0.0;
  for (int ia = 0; ia < f.alpha_steps; ++ia) {
    const double alpha = f.alpha_steps == 1 ? 0.0 : f.alpha_max * ia / (f.alpha_steps - 1);
    for (int ip = 0; ip < f.phase_steps; ++ip) {
      const double dphi = f.phase_steps == 1 ? 0.0 : kTwoPi * ip / (f.phase_steps - 1);
      const QuantumState sa = coherent_state(dims[0], Complex(alpha, 0.0), params.leakage_tolerance);
      const QuantumState sb = coherent_state(dims[1], std::polar(alpha, dphi), params.leakage_tolerance);
      const OverlapEstimate est = overlap_via_parity(sa, sb, params, mode, c.g, c.dt);
      const double analytic = std::exp(-2.0 * alpha * alpha * (1.0 - std::cos(dphi)));
      worst_vs_analytic = std::max(worst_vs_analytic, std::abs(est.raw - analytic));
      ds.add_row({alpha, dphi, est.ideal_value, est.raw, est.value, analytic});
    }
  }
  apply_shot_noise(&ds, c.shots, c.seed);
  const std::string csv_path = join_path(dir, "overlap.csv");
  write_csv_file(ds, csv_path);

  ManifestInfo info{"overlap", argv, c.config_path, "", {"overlap.csv"}, c.seed};
  write_manifest(join_path(dir, "overlap_manifest.json"), info);
  out << "overlap: wrote " << csv_path << " (" << ds.rows.size() << " rows), max |raw - analytic| = "
      << brief(worst_vs_analytic) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// mz: populations along the cascaded interferometer
// BS - DPS - BS - BS - DPS - BS, sampled on a cumulative-drive-time grid by
// executing the sequence clipped at each grid point.
// ---------------------------------------------------------------------------

struct MzFlags {
  int points = 241;
  double dps_phi = 0.5 * kPi;
  bool skip_dps = false;
};

inline int cmd_mz(const CommonOptions& c, const MzFlags& f, const std::vector<std::string>& argv, std::ostream& out) {
  const DeviceParams params = load_params(c.config_path);
  const std::string dir = prepare_out_dir(c.out_dir);
  const std::vector<int> dims = c.dims_or({4, 4});
  const GateMode mode = c.mode_or(GateMode::Ideal);
  const ModeSpace space = ModeSpace::two_mode(dims[0], dims[1]);

  struct Segment {
    bool is_bs;
    double angle;
    double duration;
  };
  const double bs_time = bs_duration(c.g);                       // theta = pi/4
  const double dps_time = f.dps_phi / (kTwoPi * params.chi_1);   // phase accrual time
  std::vector<Segment> segments;
  auto push_bs = [&] { segments.push_back({true, 0.25 * kPi, bs_time}); };
  auto push_dps = [&] {
    if (!f.skip_dps && f.dps_phi > 0.0) segments.push_back({false, f.dps_phi, dps_time});
  };
  push_bs();
  push_dps();
  push_bs();
  push_bs();
  push_dps();
  push_bs();

  double total = 0.0;
  for (const auto& s : segments) total += s.duration;

  Dataset ds;
  ds.columns = {"t", "P11", "P20", "P02", "survival"};
  for (int k = 0; k < f.points; ++k) {
    const double t = f.points == 1 ? 0.0 : total * k / (f.points - 1);
    QuantumState state = fock_state(space, {1, 1});
    double survival = 1.0;
    double remaining = t;
    for (const auto& seg : segments) {
      if (remaining <= 0.0) break;
      const double frac = std::min(1.0, remaining / seg.duration);
      const double angle = seg.angle * frac;
      if (seg.is_bs) {
        auto [next, rec] = beamsplitter(state, {angle, 0.0, mode}, c.g, params, c.dt);
        state = std::move(next);
        if (mode == GateMode::Physical) survival *= (1.0 - params.p_exc * frac);
      } else {
        auto [next, rec] = dps(state, angle, params, mode, c.dt);
        state = std::move(next);
      }
      remaining -= seg.duration * frac;
    }
    JointNumberDistribution dist = joint_number_probs(state, params, mode == GateMode::Physical);
    double scale = mode == GateMode::Physical ? survival : 1.0;
    ds.add_row({t, dist.probs(1, 1) * scale, dist.probs(2, 0) * scale, dist.probs(0, 2) * scale, survival});
  }
  apply_shot_noise(&ds, c.shots, c.seed);
  const std::string csv_path = join_path(dir, "mz.csv");
  write_csv_file(ds, csv_path);

  ManifestInfo info{"mz", argv, c.config_path, "", {"mz.csv"}, c.seed};
  write_manifest(join_path(dir, "mz_manifest.json"), info);
  out << "mz: wrote " << csv_path << " (" << ds.rows.size() << " rows, total drive " << brief(total) << " us)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// multiphoton: four-outcome sweep of the 2+1 photon input, plus the ideal
// coherent-splitting report (mean photon numbers after one and two 50:50s).
// ---------------------------------------------------------------------------

struct MultiphotonFlags {
  double t_max = 15.0;
  int steps = 121;
  double alpha = 1.4142135623730951;  // sqrt(2)
};

inline int cmd_multiphoton(const CommonOptions& c, const MultiphotonFlags& f, const std::vector<std::string>& argv,
                           std::ostream& out) {
  const DeviceParams params = load_params(c.config_path);
  const std::string dir = prepare_out_dir(c.out_dir);

  Program prog;
  prog.dims = c.dims_or({6, 6});
  if (prog.dims[0] < 5 || prog.dims[1] < 5)
    fail(ErrorCode::InvalidDimension, "multiphoton sweep needs dims >= 5,5");
  prog.mode = c.mode_or(GateMode::Ideal);
  prog.sweep = SweepClause{"t", 0.0, f.t_max, f.steps, 0};
  Instruction prep;
  prep.kind = InstructionKind::PrepareState21;
  Instruction bs;
  bs.kind = InstructionKind::Beamsplitter;
  bs.has_duration = true;
  bs.duration.placeholder = true;
  Instruction meas;
  meas.kind = InstructionKind::Measure;
  meas.measure = MeasureKind::Joint;
  prog.instructions = {prep, bs, meas};

  ExecOptions opts;
  opts.g_mhz = c.g;
  opts.dt = c.dt;
  Dataset full = sweep_dataset(prog, params, opts);
  apply_shot_noise(&full, c.shots, c.seed);

  Dataset ds;
  ds.columns = {"t", "P30", "P21", "P12", "P03"};
  {
    const std::vector<double> t = full.column("t");
    const std::vector<double> p30 = full.column("P3_0");
    const std::vector<double> p21 = full.column("P2_1");
    const std::vector<double> p12 = full.column("P1_2");
    const std::vector<double> p03 = full.column("P0_3");
    for (size_t i = 0; i < t.size(); ++i) ds.add_row({t[i], p30[i], p21[i], p12[i], p03[i]});
  }
  const std::string csv_path = join_path(dir, "multiphoton.csv");
  write_csv_file(ds, csv_path);

  // Coherent splitting runs ideal: the claim is about the exact unitary.
  int cdim = 0;
  for (int trial : {16, 24, 32, 48, 64}) {
    const Vector v = coherent_amplitudes(trial, Complex(f.alpha, 0.0));
    if (1.0 - v.squaredNorm() <= params.leakage_tolerance) {
      cdim = trial;
      break;
    }
  }
  if (cdim == 0)
    fail(ErrorCode::TruncationTooSmall, "coherent amplitude " + std::to_string(f.alpha) + " needs dim > 64");
  const QuantumState sa = coherent_state(cdim, Complex(f.alpha, 0.0), params.leakage_tolerance);
  const QuantumState joint = product_state(sa, fock_state(ModeSpace::single(cdim), {0}));
  const QuantumState after1 = ideal_beamsplitter(joint, 0.25 * kPi);
  const QuantumState after2 = ideal_beamsplitter(after1, 0.25 * kPi);

  json report;
  report["alpha"] = f.alpha;
  report["coherent_dim"] = cdim;
  report["nbar_a_after_1bs"] = mean_occupation(after1, 0);
  report["nbar_b_after_1bs"] = mean_occupation(after1, 1);
  report["nbar_a_after_2bs"] = mean_occupation(after2, 0);
  report["nbar_b_after_2bs"] = mean_occupation(after2, 1);
  const std::string report_path = join_path(dir, "multiphoton_report.json");
  write_text_file(report_path, report.dump(2) + "\n");

  ManifestInfo info{"multiphoton", argv, c.config_path, "", {"multiphoton.csv", "multiphoton_report.json"}, c.seed};
  write_manifest(join_path(dir, "multiphoton_manifest.json"), info);
  out << "multiphoton: wrote " << csv_path << " (" << ds.rows.size() << " rows), " << report_path << "\n";
  out << "multiphoton: nbar after 1 BS = (" << brief(mean_occupation(after1, 0)) << ", "
      << brief(mean_occupation(after1, 1)) << "), after 2 BS = (" << brief(mean_occupation(after2, 0)) << ", "
      << brief(mean_occupation(after2, 1)) << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// calibrate: drive-strength table of conversion rate, corrected rate, pulse
// time, decoherence figures and Stark shifts.
// ---------------------------------------------------------------------------

struct CalibrateFlags {
  double xi_min = 0.0;
  double xi_max = 0.15;
  int xi_steps = 16;
  double delta1 = 157.0;
  bool delta1_set = false;
  double delta2 = 1148.0;
  double delta_a = -347.0;
  double delta_b = 642.0;
};

inline int cmd_calibrate(const CommonOptions& c, const CalibrateFlags& f, const std::vector<std::string>& argv,
                         std::ostream& out) {
  const DeviceParams params = load_params(c.config_path);
  const std::string dir = prepare_out_dir(c.out_dir);
  const double delta1 = f.delta1_set ? f.delta1 : params.drive_detuning_1;

  const double tau1_eff = 2.0 / (1.0 / params.t1_a + 1.0 / params.t1_b);
  const double tau_phi_eff = 1.0 / (1.0 / params.tphi_a + 1.0 / params.tphi_b);
  const double tau_bs = bs_decoherence_time(tau1_eff, tau_phi_eff);

  Dataset ds;
  ds.columns = {"xi_product",  "g_mhz",       "g_corrected_mhz", "t_bs_us", "tau_bs_us",
                "infidelity",  "stark_1_mhz", "stark_2_mhz",     "p_exc",   "total_infidelity"};
  for (int i = 0; i < f.xi_steps; ++i) {
    const double xiprod =
        f.xi_steps == 1 ? f.xi_min : f.xi_min + (f.xi_max - f.xi_min) * i / (f.xi_steps - 1);
    if (xiprod <= 0.0) {
      ds.add_row({0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0});
      continue;
    }
    const Complex xi(std::sqrt(xiprod), 0.0);
    const double g = coupling_strength(params, xi, xi);
    const double g_corr = coupling_correction(g, params, delta1, f.delta2, f.delta_a, f.delta_b);
    const double t_bs = bs_duration(g_corr);
    const double infid = bs_infidelity(t_bs, tau_bs);
    const double stark1 = stark_shift(xi, params, delta1, false);
    const double stark2 = stark_shift(xi, params, 0.0, true);
    const double p_exc = params.p_exc_slope * xiprod;
    ds.add_row({xiprod, g, g_corr, t_bs, tau_bs, infid, stark1, stark2, p_exc, infid + p_exc});
  }
  const std::string csv_path = join_path(dir, "calibrate.csv");
  write_csv_file(ds, csv_path);

  ManifestInfo info{"calibrate", argv, c.config_path, "", {"calibrate.csv"}, c.seed};
  write_manifest(join_path(dir, "calibrate_manifest.json"), info);
  out << "calibrate: wrote " << csv_path << " (" << ds.rows.size() << " rows), tau_bs=" << brief(tau_bs) << " us\n";
  return 0;
}

// ---------------------------------------------------------------------------
// run: execute a program file. Sweep programs yield a CSV; straight-line
// programs yield a JSON trace of measurements and gate records.
// ---------------------------------------------------------------------------

inline json joint_to_json(const JointNumberDistribution& dist) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < dist.probs.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index cc = 0; cc < dist.probs.cols(); ++cc) row.push_back(dist.probs(r, cc));
    rows.push_back(row);
  }
  json j;
  j["probs"] = rows;
  j["spam_applied"] = dist.spam_applied;
  j["survival"] = dist.survival;
  j["survival_included"] = dist.survival_included;
  return j;
}

inline int cmd_run(const CommonOptions& c, const std::string& program_path, const std::vector<std::string>& argv,
                   std::ostream& out) {
  namespace fs = std::filesystem;
  Program prog = parse_program_file(program_path);
  std::string config = c.config_path;
  if (config.empty() && !prog.config_path.empty()) {
    fs::path p = prog.config_path;
    if (p.is_relative()) p = fs::path(program_path).parent_path() / p;
    config = p.generic_string();
  }
  const DeviceParams params = load_params(config);
  const std::string dir = prepare_out_dir(c.out_dir);
  const std::string stem = fs::path(program_path).stem().string();

  ExecOptions opts;
  opts.mode_override = c.mode();
  if (c.has_dims()) opts.dims_override = parse_dims_text(c.dims_str);
  opts.g_mhz = c.g;
  opts.dt = c.dt;

  std::vector<std::string> outputs;
  std::string primary_path;
  if (prog.sweep) {
    Dataset ds = sweep_dataset(prog, params, opts);
    apply_shot_noise(&ds, c.shots, c.seed);
    primary_path = join_path(dir, stem + ".csv");
    write_csv_file(ds, primary_path);
    outputs.push_back(stem + ".csv");
    out << "run: wrote " << primary_path << " (" << ds.rows.size() << " rows)\n";
  } else {
    const ExecutionTrace trace = execute(prog, params, opts);
    json j;
    j["total_duration_us"] = trace.total_duration_us;
    j["survival"] = trace.survival;
    json gates = json::array();
    for (const auto& g : trace.gates)
      gates.push_back({{"gate", g.gate},
                       {"duration_us", g.duration_us},
                       {"p_exc", g.p_exc},
                       {"leakage", g.leakage}});
    j["gates"] = gates;
    json ms = json::array();
    for (const auto& m : trace.measurements) {
      json e;
      e["instruction_index"] = m.instruction_index;
      switch (m.kind) {
        case MeasureKind::Joint:
          e["kind"] = "joint";
          e["joint"] = joint_to_json(m.joint);
          break;
        case MeasureKind::ParityA:
        case MeasureKind::ParityB:
          e["kind"] = m.kind == MeasureKind::ParityA ? "parity_a" : "parity_b";
          e["value"] = m.value;
          e["raw"] = m.raw;
          break;
        case MeasureKind::Overlap:
          e["kind"] = "overlap";
          e["value"] = m.value;
          e["raw"] = m.raw;
          break;
      }
      e["survival"] = m.survival;
      ms.push_back(e);
    }
    j["measurements"] = ms;
    primary_path = join_path(dir, stem + "_trace.json");
    write_text_file(primary_path, j.dump(2) + "\n");
    outputs.push_back(stem + "_trace.json");
    out << "run: wrote " << primary_path << " (" << trace.measurements.size() << " measurements)\n";
  }

  ManifestInfo info{"run", argv, config, program_path, outputs, c.seed};
  write_manifest(join_path(dir, stem + "_manifest.json"), info);
  return 0;
}

inline int cli_main_impl(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// replay: re-execute the argument vector stored in a manifest. Outputs land
// in the same --out directory and must reproduce byte for byte.
inline int cmd_replay(const std::string& manifest_path, std::ostream& out, std::ostream& err) {
  json m;
  try {
    m = json::parse(read_text_file(manifest_path));
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigError, "manifest '" + manifest_path + "' is not valid JSON: " + e.what());
  }
  if (!m.contains("argv") || !m["argv"].is_array() || m["argv"].empty())
    fail(ErrorCode::ConfigError, "manifest '" + manifest_path + "' has no argv");
  std::vector<std::string> argv;
  for (const auto& a : m["argv"]) {
    if (!a.is_string()) fail(ErrorCode::ConfigError, "manifest argv must be strings");
    argv.push_back(a.get<std::string>());
  }
  if (argv[0] == "replay") fail(ErrorCode::ConfigError, "manifest replays a replay; refusing");
  out << "replay: " << manifest_path << "\n";
  return cli_main_impl(argv, out, err);
}

inline int cli_main_impl(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"deterministic simulator for programmable interference between two cavity memories"};
  app.name("bosim");
  app.require_subcommand(1);

  int rc = 0;

  CommonOptions rabi_common;
  RabiFlags rabi_flags;
  auto* rabi = app.add_subcommand("rabi", "single-excitation exchange sweep with decaying-sinusoid fit");
  add_common_options(rabi, &rabi_common);
  rabi->add_option("--t-max", rabi_flags.t_max, "sweep end, us")->check(CLI::PositiveNumber)->capture_default_str();
  rabi->add_option("--steps", rabi_flags.steps, "grid points")->check(CLI::PositiveNumber)->capture_default_str();
  rabi->callback([&] { rc = cmd_rabi(rabi_common, rabi_flags, args, out); });

  CommonOptions hom_common;
  HomFlags hom_flags;
  auto* hom = app.add_subcommand("hom", "two-photon coincidence dip and revival with contrast report");
  add_common_options(hom, &hom_common);
  hom->add_option("--t-max", hom_flags.t_max, "sweep end, us")->check(CLI::PositiveNumber)->capture_default_str();
  hom->add_option("--steps", hom_flags.steps, "grid points")->check(CLI::PositiveNumber)->capture_default_str();
  hom->callback([&] { rc = cmd_hom(hom_common, hom_flags, args, out); });

  CommonOptions ov_common;
  OverlapFlags ov_flags;
  auto* ov = app.add_subcommand("overlap", "swap-test overlap of coherent states over an (alpha, phase) grid");
  add_common_options(ov, &ov_common);
  ov->add_option("--alpha-max", ov_flags.alpha_max, "largest coherent amplitude")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  ov->add_option("--alpha-steps", ov_flags.alpha_steps, "amplitude grid points")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ov->add_option("--phase-steps", ov_flags.phase_steps, "phase grid points over [0, 2pi]")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ov->callback([&] { rc = cmd_overlap(ov_common, ov_flags, args, out); });

  CommonOptions mz_common;
  MzFlags mz_flags;
  auto* mz = app.add_subcommand("mz", "cascaded interferometer populations vs cumulative drive time");
  add_common_options(mz, &mz_common);
  mz->add_option("--points", mz_flags.points, "grid points")->check(CLI::PositiveNumber)->capture_default_str();
  mz->add_option("--dps-phi", mz_flags.dps_phi, "per-photon phase of each DPS, rad")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  mz->add_flag("--skip-dps", mz_flags.skip_dps, "drop both phase gates (plain double interferometer)");
  mz->callback([&] { rc = cmd_mz(mz_common, mz_flags, args, out); });

  CommonOptions mp_common;
  MultiphotonFlags mp_flags;
  auto* mp = app.add_subcommand("multiphoton", "2+1 photon sweep and ideal coherent-splitting report");
  add_common_options(mp, &mp_common);
  mp->add_option("--t-max", mp_flags.t_max, "sweep end, us")->check(CLI::PositiveNumber)->capture_default_str();
  mp->add_option("--steps", mp_flags.steps, "grid points")->check(CLI::PositiveNumber)->capture_default_str();
  mp->add_option("--alpha", mp_flags.alpha, "coherent amplitude for the splitting report")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  mp->callback([&] { rc = cmd_multiphoton(mp_common, mp_flags, args, out); });

  CommonOptions cal_common;
  CalibrateFlags cal_flags;
  auto* cal = app.add_subcommand("calibrate", "drive-strength table: rates, pulse times, Stark shifts");
  add_common_options(cal, &cal_common);
  cal->add_option("--xi-min", cal_flags.xi_min, "smallest |xi1*xi2|")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cal->add_option("--xi-max", cal_flags.xi_max, "largest |xi1*xi2|")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cal->add_option("--xi-steps", cal_flags.xi_steps, "grid points")->check(CLI::PositiveNumber)->capture_default_str();
  auto* d1 = cal->add_option("--delta1", cal_flags.delta1, "near tone detuning, MHz (default: config value)");
  cal->add_option("--delta2", cal_flags.delta2, "far tone detuning, MHz")->capture_default_str();
  cal->add_option("--delta-a", cal_flags.delta_a, "memory A detuning from the near tone, MHz")
      ->capture_default_str();
  cal->add_option("--delta-b", cal_flags.delta_b, "memory B detuning from the near tone, MHz")
      ->capture_default_str();
  cal->callback([&] {
    cal_flags.delta1_set = d1->count() > 0;
    rc = cmd_calibrate(cal_common, cal_flags, args, out);
  });

  CommonOptions run_common;
  std::string run_path;
  auto* run = app.add_subcommand("run", "execute a program file (sweep -> CSV, straight-line -> JSON trace)");
  add_common_options(run, &run_common);
  run->add_option("program", run_path, "program file")->required()->check(CLI::ExistingFile);
  run->callback([&] { rc = cmd_run(run_common, run_path, args, out); });

  std::string replay_path;
  auto* replay = app.add_subcommand("replay", "re-run the command stored in a manifest");
  replay->add_option("manifest", replay_path, "manifest file")->required()->check(CLI::ExistingFile);
  replay->callback([&] { rc = cmd_replay(replay_path, out, err); });

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.push_back("bosim");
  for (const auto& a : args) argv_storage.push_back(a);
  std::vector<const char*> argv;
  argv.reserve(argv_storage.size());
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}

}  // namespace cli_detail

// Entry point taking the arguments after the binary name. All output goes to
// the supplied streams so tests can drive the CLI in-process.
inline int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return cli_detail::cli_main_impl(args, out, err);
}

}  // namespace bosim

#endif
