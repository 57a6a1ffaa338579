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

#ifndef BOSIM_PROGRAM_HPP
#define BOSIM_PROGRAM_HPP

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bosim/dataset.hpp"
#include "bosim/device.hpp"
#include "bosim/error.hpp"
#include "bosim/evolution.hpp"
#include "bosim/fock.hpp"
#include "bosim/interferometry.hpp"
#include "bosim/measurement.hpp"

namespace bosim {

// ---------------------------------------------------------------------------
// Experiment description language. One instruction per line, `key=value`
// arguments, `#` comments, angles accept pi-literals (`0.25pi`). A `sweep`
// clause introduces a single placeholder usable as `$name` in numeric slots.
// ---------------------------------------------------------------------------

enum class InstructionKind {
  PrepareFock,
  PrepareCoherent,
  PrepareState21,
  Beamsplitter,
  Dps,
  Displace,
  Wait,
  Measure,
  Set,
};

enum class MeasureKind { Joint, ParityA, ParityB, Overlap };

inline const char* instruction_name(InstructionKind kind) {
  switch (kind) {
    case InstructionKind::PrepareFock:
    case InstructionKind::PrepareCoherent:
    case InstructionKind::PrepareState21:
      return "prepare";
    case InstructionKind::Beamsplitter:
      return "bs";
    case InstructionKind::Dps:
      return "dps";
    case InstructionKind::Displace:
      return "displace";
    case InstructionKind::Wait:
      return "wait";
    case InstructionKind::Measure:
      return "measure";
    case InstructionKind::Set:
      return "set";
  }
  return "?";
}

inline const char* gate_mode_name(GateMode mode) { return mode == GateMode::Ideal ? "ideal" : "physical"; }

// Numeric argument: a literal value or the sweep placeholder.
struct Arg {
  double value = 0.0;
  bool placeholder = false;
  bool operator==(const Arg&) const = default;
};

struct Instruction {
  InstructionKind kind = InstructionKind::Wait;
  int line = 0;

  int fock_a = 0, fock_b = 0;               // prepare fock
  Arg alpha_a, phase_a, alpha_b, phase_b;   // prepare coherent; displace uses the a-slots
  Arg theta, duration, phi;                 // bs / dps
  bool has_theta = false;
  bool has_duration = false;
  bool has_mode_override = false;
  GateMode mode_override = GateMode::Ideal;
  int target_mode = 0;                      // displace / measure parity
  Arg wait_time;
  MeasureKind measure = MeasureKind::Joint;
  std::string set_param;
  Arg set_value;
};

struct SweepClause {
  std::string name;
  double start = 0.0;
  double stop = 0.0;
  int steps = 1;
  int line = 0;
};

struct Program {
  std::vector<int> dims{6, 6};
  GateMode mode = GateMode::Ideal;
  std::string config_path;
  std::optional<SweepClause> sweep;
  std::vector<Instruction> instructions;
};

// Structural equality ignoring source locations, for round-trip checks.
inline bool same_instruction(const Instruction& x, const Instruction& y) {
  return x.kind == y.kind && x.fock_a == y.fock_a && x.fock_b == y.fock_b && x.alpha_a == y.alpha_a &&
         x.phase_a == y.phase_a && x.alpha_b == y.alpha_b && x.phase_b == y.phase_b && x.theta == y.theta &&
         x.duration == y.duration && x.phi == y.phi && x.has_theta == y.has_theta &&
         x.has_duration == y.has_duration && x.has_mode_override == y.has_mode_override &&
         (!x.has_mode_override || x.mode_override == y.mode_override) && x.target_mode == y.target_mode &&
         x.wait_time == y.wait_time && x.measure == y.measure && x.set_param == y.set_param &&
         x.set_value == y.set_value;
}

inline bool same_program(const Program& a, const Program& b) {
  if (a.dims != b.dims || a.mode != b.mode || a.config_path != b.config_path) return false;
  if (a.sweep.has_value() != b.sweep.has_value()) return false;
  if (a.sweep && (a.sweep->name != b.sweep->name || a.sweep->start != b.sweep->start ||
                  a.sweep->stop != b.sweep->stop || a.sweep->steps != b.sweep->steps))
    return false;
  if (a.instructions.size() != b.instructions.size()) return false;
  for (size_t i = 0; i < a.instructions.size(); ++i)
    if (!same_instruction(a.instructions[i], b.instructions[i])) return false;
  return true;
}

namespace detail {

struct Token {
  std::string text;
  int col = 0;  // 1-based
};

[[noreturn]] inline void parse_fail(int line, int col, const std::string& what) {
  fail(ErrorCode::ParseError, "line " + std::to_string(line) + ", col " + std::to_string(col) + ": " + what);
}

inline std::vector<Token> lex_line(const std::string& line) {
  std::vector<Token> tokens;
  size_t i = 0;
  while (i < line.size()) {
    if (line[i] == '#') break;
    if (std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
      continue;
    }
    const size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) && line[i] != '#') ++i;
    tokens.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
  }
  return tokens;
}

inline bool parse_plain_double(std::string_view s, double* out) {
  if (s.empty()) return false;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, *out);
  return ec == std::errc() && ptr == end;
}

// Accepts plain decimals and pi-literals: `pi`, `-pi`, `0.25pi`, `2pi`.
inline bool parse_number_token(std::string_view s, double* out) {
  if (s.size() >= 2 && s.substr(s.size() - 2) == "pi") {
    const std::string_view head = s.substr(0, s.size() - 2);
    if (head.empty() || head == "+") {
      *out = kPi;
      return true;
    }
    if (head == "-") {
      *out = -kPi;
      return true;
    }
    double v = 0.0;
    if (!parse_plain_double(head, &v)) return false;
    *out = v * kPi;
    return true;
  }
  return parse_plain_double(s, out);
}

inline bool parse_int_token(std::string_view s, int* out) {
  if (s.empty()) return false;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, *out);
  return ec == std::errc() && ptr == end;
}

inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

struct PlaceholderRef {
  std::string name;
  int line = 0;
  int col = 0;
};

inline Arg parse_arg(const Token& tok, int line, std::vector<PlaceholderRef>* refs) {
  if (!tok.text.empty() && tok.text[0] == '$') {
    const std::string_view name = std::string_view(tok.text).substr(1);
    if (!is_identifier(name)) parse_fail(line, tok.col, "bad-argument: malformed placeholder '" + tok.text + "'");
    refs->push_back({std::string(name), line, tok.col});
    Arg a;
    a.placeholder = true;
    return a;
  }
  Arg a;
  if (!parse_number_token(tok.text, &a.value) || !std::isfinite(a.value))
    parse_fail(line, tok.col, "bad-argument: expected a number, got '" + tok.text + "'");
  return a;
}

struct KeyVal {
  std::string key;
  Token value;
};

// Splits instruction arguments into `key=value` pairs and positional tokens.
inline void split_args(const std::vector<Token>& tokens, size_t first, int line, std::vector<KeyVal>* kv,
                       std::vector<Token>* positional) {
  for (size_t i = first; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    const size_t eq = t.text.find('=');
    if (eq == std::string::npos) {
      positional->push_back(t);
      continue;
    }
    const std::string key = t.text.substr(0, eq);
    if (!is_identifier(key)) parse_fail(line, t.col, "bad-argument: malformed argument '" + t.text + "'");
    Token value{t.text.substr(eq + 1), t.col + static_cast<int>(eq) + 1};
    if (value.text.empty()) parse_fail(line, value.col, "bad-argument: missing value for '" + key + "='");
    for (const auto& seen : *kv)
      if (seen.key == key) parse_fail(line, t.col, "bad-argument: duplicate argument '" + key + "='");
    kv->push_back({key, std::move(value)});
  }
}

inline const Token* find_key(const std::vector<KeyVal>& kv, const std::string& key) {
  for (const auto& e : kv)
    if (e.key == key) return &e.value;
  return nullptr;
}

inline void reject_unknown_keys(const std::vector<KeyVal>& kv, std::initializer_list<const char*> allowed, int line,
                                const char* instr) {
  for (const auto& e : kv) {
    bool ok = false;
    for (const char* a : allowed)
      if (e.key == a) ok = true;
    if (!ok)
      parse_fail(line, e.value.col, "bad-argument: '" + std::string(instr) + "' does not take '" + e.key + "='");
  }
}

inline GateMode parse_mode_token(const Token& tok, int line) {
  if (tok.text == "ideal") return GateMode::Ideal;
  if (tok.text == "physical") return GateMode::Physical;
  parse_fail(line, tok.col, "bad-argument: mode must be 'ideal' or 'physical', got '" + tok.text + "'");
}

inline int parse_cavity_token(const Token& tok, int line) {
  if (tok.text == "a") return 0;
  if (tok.text == "b") return 1;
  parse_fail(line, tok.col, "bad-argument: cavity must be 'a' or 'b', got '" + tok.text + "'");
}

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

inline Program parse_program(const std::string& text) {
  Program prog;
  bool saw_dims = false, saw_mode = false, saw_config = false, saw_instruction = false;
  std::vector<detail::PlaceholderRef> refs;

  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::vector<detail::Token> tokens = detail::lex_line(raw);
    if (tokens.empty()) continue;
    const detail::Token& head = tokens[0];

    auto require_header_position = [&](const char* name) {
      if (saw_instruction)
        detail::parse_fail(lineno, head.col, "bad-argument: header '" + std::string(name) +
                                                 "' must precede instructions");
    };

    if (head.text == "dims") {
      require_header_position("dims");
      if (saw_dims) detail::parse_fail(lineno, head.col, "bad-argument: duplicate 'dims' header");
      if (tokens.size() != 3) detail::parse_fail(lineno, head.col, "bad-argument: expected 'dims A B'");
      std::vector<int> dims(2);
      for (int k = 0; k < 2; ++k) {
        const detail::Token& t = tokens[static_cast<size_t>(k + 1)];
        if (!detail::parse_int_token(t.text, &dims[static_cast<size_t>(k)]) || dims[static_cast<size_t>(k)] < 1)
          detail::parse_fail(lineno, t.col, "bad-argument: dimension must be a positive integer, got '" + t.text + "'");
      }
      prog.dims = dims;
      saw_dims = true;
      continue;
    }
    if (head.text == "mode") {
      require_header_position("mode");
      if (saw_mode) detail::parse_fail(lineno, head.col, "bad-argument: duplicate 'mode' header");
      if (tokens.size() != 2) detail::parse_fail(lineno, head.col, "bad-argument: expected 'mode ideal|physical'");
      prog.mode = detail::parse_mode_token(tokens[1], lineno);
      saw_mode = true;
      continue;
    }
    if (head.text == "config") {
      require_header_position("config");
      if (saw_config) detail::parse_fail(lineno, head.col, "bad-argument: duplicate 'config' header");
      if (tokens.size() != 2) detail::parse_fail(lineno, head.col, "bad-argument: expected 'config PATH'");
      prog.config_path = tokens[1].text;
      saw_config = true;
      continue;
    }
    if (head.text == "sweep") {
      if (prog.sweep) detail::parse_fail(lineno, head.col, "duplicate-sweep: a sweep clause is already declared");
      if (tokens.size() != 8 || tokens[2].text != "from" || tokens[4].text != "to" || tokens[6].text != "steps")
        detail::parse_fail(lineno, head.col, "bad-argument: expected 'sweep NAME from A to B steps N'");
      SweepClause sweep;
      if (!detail::is_identifier(tokens[1].text))
        detail::parse_fail(lineno, tokens[1].col, "bad-argument: sweep variable must be an identifier");
      sweep.name = tokens[1].text;
      if (!detail::parse_number_token(tokens[3].text, &sweep.start) || !std::isfinite(sweep.start))
        detail::parse_fail(lineno, tokens[3].col, "bad-argument: expected a number, got '" + tokens[3].text + "'");
      if (!detail::parse_number_token(tokens[5].text, &sweep.stop) || !std::isfinite(sweep.stop))
        detail::parse_fail(lineno, tokens[5].col, "bad-argument: expected a number, got '" + tokens[5].text + "'");
      if (!detail::parse_int_token(tokens[7].text, &sweep.steps) || sweep.steps < 1)
        detail::parse_fail(lineno, tokens[7].col, "bad-argument: steps must be a positive integer (empty grid)");
      sweep.line = lineno;
      prog.sweep = sweep;
      continue;
    }

    Instruction ins;
    ins.line = lineno;
    std::vector<detail::KeyVal> kv;
    std::vector<detail::Token> positional;
    detail::split_args(tokens, 1, lineno, &kv, &positional);

    if (head.text == "prepare") {
      if (positional.empty())
        detail::parse_fail(lineno, head.col, "bad-argument: expected 'prepare fock|coherent|state-21 ...'");
      const detail::Token& sub = positional[0];
      if (sub.text == "fock") {
        ins.kind = InstructionKind::PrepareFock;
        detail::reject_unknown_keys(kv, {}, lineno, "prepare fock");
        if (positional.size() != 3)
          detail::parse_fail(lineno, sub.col, "bad-argument: expected 'prepare fock N M'");
        if (!detail::parse_int_token(positional[1].text, &ins.fock_a) || ins.fock_a < 0)
          detail::parse_fail(lineno, positional[1].col,
                             "bad-argument: photon count must be a nonnegative integer, got '" + positional[1].text +
                                 "'");
        if (!detail::parse_int_token(positional[2].text, &ins.fock_b) || ins.fock_b < 0)
          detail::parse_fail(lineno, positional[2].col,
                             "bad-argument: photon count must be a nonnegative integer, got '" + positional[2].text +
                                 "'");
      } else if (sub.text == "coherent") {
        ins.kind = InstructionKind::PrepareCoherent;
        if (positional.size() != 1)
          detail::parse_fail(lineno, positional[1].col, "bad-argument: 'prepare coherent' takes key=value arguments");
        detail::reject_unknown_keys(kv, {"alpha_a", "alpha_b", "phase_a", "phase_b"}, lineno, "prepare coherent");
        const detail::Token* aa = detail::find_key(kv, "alpha_a");
        const detail::Token* ab = detail::find_key(kv, "alpha_b");
        if (!aa || !ab)
          detail::parse_fail(lineno, sub.col, "bad-argument: 'prepare coherent' needs alpha_a= and alpha_b=");
        ins.alpha_a = detail::parse_arg(*aa, lineno, &refs);
        ins.alpha_b = detail::parse_arg(*ab, lineno, &refs);
        if (const detail::Token* t = detail::find_key(kv, "phase_a")) ins.phase_a = detail::parse_arg(*t, lineno, &refs);
        if (const detail::Token* t = detail::find_key(kv, "phase_b")) ins.phase_b = detail::parse_arg(*t, lineno, &refs);
      } else if (sub.text == "state-21") {
        ins.kind = InstructionKind::PrepareState21;
        detail::reject_unknown_keys(kv, {}, lineno, "prepare state-21");
        if (positional.size() != 1)
          detail::parse_fail(lineno, positional[1].col, "bad-argument: 'prepare state-21' takes no arguments");
      } else {
        detail::parse_fail(lineno, sub.col, "bad-argument: unknown preparation '" + sub.text + "'");
      }
    } else if (head.text == "bs") {
      ins.kind = InstructionKind::Beamsplitter;
      if (!positional.empty())
        detail::parse_fail(lineno, positional[0].col, "bad-argument: 'bs' takes key=value arguments");
      detail::reject_unknown_keys(kv, {"theta", "t", "phi", "mode"}, lineno, "bs");
      const detail::Token* th = detail::find_key(kv, "theta");
      const detail::Token* du = detail::find_key(kv, "t");
      if (th && du) detail::parse_fail(lineno, du->col, "bad-argument: give exactly one of theta= or t=");
      if (!th && !du) detail::parse_fail(lineno, head.col, "bad-argument: 'bs' needs theta= or t=");
      if (th) {
        ins.theta = detail::parse_arg(*th, lineno, &refs);
        ins.has_theta = true;
      } else {
        ins.duration = detail::parse_arg(*du, lineno, &refs);
        ins.has_duration = true;
        if (!ins.duration.placeholder && ins.duration.value < 0.0)
          detail::parse_fail(lineno, du->col, "bad-argument: drive duration must be nonnegative");
      }
      if (const detail::Token* t = detail::find_key(kv, "phi")) ins.phi = detail::parse_arg(*t, lineno, &refs);
      if (const detail::Token* t = detail::find_key(kv, "mode")) {
        ins.mode_override = detail::parse_mode_token(*t, lineno);
        ins.has_mode_override = true;
      }
    } else if (head.text == "dps") {
      ins.kind = InstructionKind::Dps;
      if (!positional.empty())
        detail::parse_fail(lineno, positional[0].col, "bad-argument: 'dps' takes key=value arguments");
      detail::reject_unknown_keys(kv, {"phi", "mode"}, lineno, "dps");
      const detail::Token* ph = detail::find_key(kv, "phi");
      if (!ph) detail::parse_fail(lineno, head.col, "bad-argument: 'dps' needs phi=");
      ins.phi = detail::parse_arg(*ph, lineno, &refs);
      if (const detail::Token* t = detail::find_key(kv, "mode")) {
        ins.mode_override = detail::parse_mode_token(*t, lineno);
        ins.has_mode_override = true;
      }
    } else if (head.text == "displace") {
      ins.kind = InstructionKind::Displace;
      if (!positional.empty())
        detail::parse_fail(lineno, positional[0].col, "bad-argument: 'displace' takes key=value arguments");
      detail::reject_unknown_keys(kv, {"mode", "alpha", "phase"}, lineno, "displace");
      const detail::Token* md = detail::find_key(kv, "mode");
      const detail::Token* al = detail::find_key(kv, "alpha");
      if (!md || !al) detail::parse_fail(lineno, head.col, "bad-argument: 'displace' needs mode= and alpha=");
      ins.target_mode = detail::parse_cavity_token(*md, lineno);
      ins.alpha_a = detail::parse_arg(*al, lineno, &refs);
      if (const detail::Token* t = detail::find_key(kv, "phase")) ins.phase_a = detail::parse_arg(*t, lineno, &refs);
    } else if (head.text == "wait") {
      ins.kind = InstructionKind::Wait;
      if (!kv.empty())
        detail::parse_fail(lineno, kv[0].value.col, "bad-argument: 'wait' takes one positional duration");
      if (positional.size() != 1) detail::parse_fail(lineno, head.col, "bad-argument: expected 'wait T'");
      ins.wait_time = detail::parse_arg(positional[0], lineno, &refs);
      if (!ins.wait_time.placeholder && ins.wait_time.value < 0.0)
        detail::parse_fail(lineno, positional[0].col, "bad-argument: wait duration must be nonnegative");
    } else if (head.text == "measure") {
      ins.kind = InstructionKind::Measure;
      if (!kv.empty())
        detail::parse_fail(lineno, kv[0].value.col, "bad-argument: 'measure' takes positional arguments");
      if (positional.empty())
        detail::parse_fail(lineno, head.col, "bad-argument: expected 'measure joint|parity a|b|overlap'");
      const detail::Token& sub = positional[0];
      if (sub.text == "joint") {
        if (positional.size() != 1)
          detail::parse_fail(lineno, positional[1].col, "bad-argument: 'measure joint' takes no arguments");
        ins.measure = MeasureKind::Joint;
      } else if (sub.text == "parity") {
        if (positional.size() != 2)
          detail::parse_fail(lineno, sub.col, "bad-argument: expected 'measure parity a|b'");
        ins.target_mode = detail::parse_cavity_token(positional[1], lineno);
        ins.measure = ins.target_mode == 0 ? MeasureKind::ParityA : MeasureKind::ParityB;
      } else if (sub.text == "overlap") {
        if (positional.size() != 1)
          detail::parse_fail(lineno, positional[1].col, "bad-argument: 'measure overlap' takes no arguments");
        ins.measure = MeasureKind::Overlap;
      } else {
        detail::parse_fail(lineno, sub.col, "bad-argument: unknown measurement '" + sub.text + "'");
      }
    } else if (head.text == "set") {
      ins.kind = InstructionKind::Set;
      if (!positional.empty())
        detail::parse_fail(lineno, positional[0].col, "bad-argument: 'set' takes one key=value argument");
      if (kv.size() != 1) detail::parse_fail(lineno, head.col, "bad-argument: expected 'set g=VALUE'");
      if (kv[0].key != "g")
        detail::parse_fail(lineno, kv[0].value.col, "bad-argument: unknown parameter '" + kv[0].key + "'");
      ins.set_param = kv[0].key;
      ins.set_value = detail::parse_arg(kv[0].value, lineno, &refs);
      if (!ins.set_value.placeholder && ins.set_value.value <= 0.0)
        detail::parse_fail(lineno, kv[0].value.col, "bad-argument: coupling must be positive");
    } else {
      detail::parse_fail(lineno, head.col, "unknown-instruction: '" + head.text + "'");
    }

    prog.instructions.push_back(std::move(ins));
    saw_instruction = true;
  }

  if (prog.sweep) {
    for (const auto& ref : refs)
      if (ref.name != prog.sweep->name)
        detail::parse_fail(ref.line, ref.col, "unresolved-placeholder: '$" + ref.name +
                                                  "' does not match sweep variable '$" + prog.sweep->name + "'");
    if (refs.empty())
      detail::parse_fail(prog.sweep->line, 1, "unresolved-placeholder: sweep variable '$" + prog.sweep->name +
                                                  "' is never referenced");
  } else if (!refs.empty()) {
    detail::parse_fail(refs[0].line, refs[0].col,
                       "unresolved-placeholder: '$" + refs[0].name + "' used without a sweep clause");
  }
  return prog;
}

inline Program parse_program_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::IoError, "cannot open program '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_program(ss.str());
}

// Canonical form: headers first, then the sweep clause, then instructions with
// arguments in a fixed order. Numbers print as %.17g so a reparse reproduces
// the exact same doubles.
inline std::string print_program(const Program& prog) {
  auto arg_text = [&](const Arg& a) -> std::string {
    if (a.placeholder) {
      if (!prog.sweep) fail(ErrorCode::InvalidParams, "placeholder argument without a sweep clause");
      return "$" + prog.sweep->name;
    }
    return detail::format_g17(a.value);
  };

  std::ostringstream os;
  os << "dims " << prog.dims[0] << ' ' << prog.dims[1] << '\n';
  os << "mode " << gate_mode_name(prog.mode) << '\n';
  if (!prog.config_path.empty()) os << "config " << prog.config_path << '\n';
  if (prog.sweep)
    os << "sweep " << prog.sweep->name << " from " << detail::format_g17(prog.sweep->start) << " to "
       << detail::format_g17(prog.sweep->stop) << " steps " << prog.sweep->steps << '\n';
  for (const Instruction& ins : prog.instructions) {
    switch (ins.kind) {
      case InstructionKind::PrepareFock:
        os << "prepare fock " << ins.fock_a << ' ' << ins.fock_b;
        break;
      case InstructionKind::PrepareCoherent:
        os << "prepare coherent alpha_a=" << arg_text(ins.alpha_a) << " phase_a=" << arg_text(ins.phase_a)
           << " alpha_b=" << arg_text(ins.alpha_b) << " phase_b=" << arg_text(ins.phase_b);
        break;
      case InstructionKind::PrepareState21:
        os << "prepare state-21";
        break;
      case InstructionKind::Beamsplitter:
        os << "bs ";
        if (ins.has_theta)
          os << "theta=" << arg_text(ins.theta);
        else
          os << "t=" << arg_text(ins.duration);
        os << " phi=" << arg_text(ins.phi);
        if (ins.has_mode_override) os << " mode=" << gate_mode_name(ins.mode_override);
        break;
      case InstructionKind::Dps:
        os << "dps phi=" << arg_text(ins.phi);
        if (ins.has_mode_override) os << " mode=" << gate_mode_name(ins.mode_override);
        break;
      case InstructionKind::Displace:
        os << "displace mode=" << (ins.target_mode == 0 ? 'a' : 'b') << " alpha=" << arg_text(ins.alpha_a)
           << " phase=" << arg_text(ins.phase_a);
        break;
      case InstructionKind::Wait:
        os << "wait " << arg_text(ins.wait_time);
        break;
      case InstructionKind::Measure:
        os << "measure ";
        switch (ins.measure) {
          case MeasureKind::Joint:
            os << "joint";
            break;
          case MeasureKind::ParityA:
            os << "parity a";
            break;
          case MeasureKind::ParityB:
            os << "parity b";
            break;
          case MeasureKind::Overlap:
            os << "overlap";
            break;
        }
        break;
      case InstructionKind::Set:
        os << "set " << ins.set_param << '=' << arg_text(ins.set_value);
        break;
    }
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Executor.
// ---------------------------------------------------------------------------

struct MeasurementRecord {
  int instruction_index = 0;  // 0-based into Program::instructions
  MeasureKind kind = MeasureKind::Joint;
  JointNumberDistribution joint;  // filled for Joint
  double value = 0.0;             // parity / contrast-scaled overlap
  double raw = 0.0;
  double survival = 1.0;  // survival probability accumulated so far
};

struct ExecutionTrace {
  std::vector<GateRecord> gates;
  std::vector<MeasurementRecord> measurements;
  double total_duration_us = 0.0;
  double survival = 1.0;
  std::optional<QuantumState> final_state;
};

struct ExecOptions {
  std::optional<GateMode> mode_override;        // e.g. CLI --mode
  std::optional<std::vector<int>> dims_override;
  double g_mhz = 0.034;                         // initial conversion rate, changeable via `set g=`
  double dt = 0.0;                              // 0 selects the per-gate default step
  std::optional<double> sweep_value;
};

namespace detail {

// Free evolution between drives: bare Kerr shifts plus undriven decoherence.
inline QuantumState idle_evolve(const QuantumState& state, double t, const DeviceParams& params, double dt) {
  if (t <= 0.0) return state;
  const std::vector<HamiltonianTerm> terms = {kerr_hamiltonian(state.space(), params.bare_chi_aa,
                                                               params.bare_chi_bb, params.bare_chi_ab)};
  const std::vector<CollapseChannel> channels = decoherence_channels(state.space(), params, false);
  const double chi_max = std::max({params.bare_chi_aa, params.bare_chi_bb, params.bare_chi_ab});
  const double step = dt > 0.0 ? dt : default_timestep(std::max(chi_max, 0.02), params);
  return lindblad_evolve(state.densified(), terms, channels, t, step);
}

}  // namespace detail

inline ExecutionTrace execute(const Program& prog, const DeviceParams& params, const ExecOptions& opts = {}) {
  std::vector<int> dims = opts.dims_override.value_or(prog.dims);
  if (dims.size() != 2) fail(ErrorCode::InvalidSpace, "executor needs exactly two modes");
  const GateMode mode = opts.mode_override.value_or(prog.mode);
  if (prog.sweep && !opts.sweep_value)
    fail(ErrorCode::InvalidParams,
         "program sweeps '$" + prog.sweep->name + "'; supply a value or use sweep_dataset");
  if (!prog.sweep && opts.sweep_value) fail(ErrorCode::InvalidParams, "sweep value given but program has no sweep");
  double g = opts.g_mhz;
  if (!(g > 0.0)) fail(ErrorCode::InvalidCoupling, "initial coupling must be positive");

  const ModeSpace space = ModeSpace::two_mode(dims[0], dims[1]);
  QuantumState state = fock_state(space, {0, 0});
  ExecutionTrace trace;

  auto resolve = [&](const Arg& a) { return a.placeholder ? *opts.sweep_value : a.value; };
  auto push_gate = [&](GateRecord rec) {
    trace.total_duration_us += rec.duration_us;
    trace.survival *= (1.0 - rec.p_exc);
    trace.gates.push_back(std::move(rec));
  };

  for (size_t i = 0; i < prog.instructions.size(); ++i) {
    const Instruction& ins = prog.instructions[i];
    const GateMode eff = ins.has_mode_override ? ins.mode_override : mode;
    try {
      switch (ins.kind) {
        case InstructionKind::PrepareFock: {
          state = fock_state(space, {ins.fock_a, ins.fock_b});
          push_gate({"prepare.fock", 0.0, 0.0, 0.0});
          break;
        }
        case InstructionKind::PrepareCoherent: {
          const Complex aa = std::polar(resolve(ins.alpha_a), resolve(ins.phase_a));
          const Complex ab = std::polar(resolve(ins.alpha_b), resolve(ins.phase_b));
          QuantumState sa = coherent_state(space.dim(0), aa, params.leakage_tolerance);
          QuantumState sb = coherent_state(space.dim(1), ab, params.leakage_tolerance);
          state = product_state(sa, sb);
          push_gate({"prepare.coherent", 0.0, 0.0, state.leakage()});
          break;
        }
        case InstructionKind::PrepareState21: {
          auto [prepared, records] = prepare_21(space, params, g, eff, opts.dt);
          state = std::move(prepared);
          for (auto& rec : records) push_gate(std::move(rec));
          break;
        }
        case InstructionKind::Beamsplitter: {
          BeamsplitterSpec spec;
          spec.phi = resolve(ins.phi);
          spec.mode = eff;
          if (ins.has_theta) {
            spec.theta = resolve(ins.theta);
          } else {
            const double t = resolve(ins.duration);
            if (t < 0.0) fail(ErrorCode::InvalidParams, "drive duration must be nonnegative");
            spec.theta = kTwoPi * g * t;
          }
          auto [out, rec] = beamsplitter(state, spec, g, params, opts.dt);
          state = std::move(out);
          push_gate(std::move(rec));
          break;
        }
        case InstructionKind::Dps: {
          auto [out, rec] = dps(state, resolve(ins.phi), params, eff, opts.dt);
          state = std::move(out);
          push_gate(std::move(rec));
          break;
        }
        case InstructionKind::Displace: {
          const Complex alpha = std::polar(resolve(ins.alpha_a), resolve(ins.phase_a));
          auto [out, rec] = displace(state, ins.target_mode, alpha, params.leakage_tolerance);
          state = std::move(out);
          push_gate(std::move(rec));
          break;
        }
        case InstructionKind::Wait: {
          const double t = resolve(ins.wait_time);
          if (t < 0.0) fail(ErrorCode::InvalidParams, "wait duration must be nonnegative");
          if (eff == GateMode::Physical && t > 0.0) {
            state = detail::idle_evolve(state, t, params, opts.dt);
            GateRecord rec{"wait", t, 0.0, 0.0};
            rec.leakage = detail::check_truncation(state, params.leakage_tolerance, "wait");
            push_gate(std::move(rec));
          } else {
            push_gate({"wait", 0.0, 0.0, 0.0});
          }
          break;
        }
        case InstructionKind::Measure: {
          if (eff == GateMode::Physical && params.selective_pulse_time > 0.0) {
            state = detail::idle_evolve(state, params.selective_pulse_time, params, opts.dt);
            GateRecord rec{"measure.idle", params.selective_pulse_time, 0.0, 0.0};
            rec.leakage = detail::check_truncation(state, params.leakage_tolerance, "measure");
            push_gate(std::move(rec));
          }
          MeasurementRecord rec;
          rec.instruction_index = static_cast<int>(i);
          rec.kind = ins.measure;
          rec.survival = trace.survival;
          if (ins.measure == MeasureKind::Joint) {
            JointNumberDistribution dist = joint_number_probs(state, params, eff == GateMode::Physical);
            if (eff == GateMode::Physical) {
              dist.probs *= trace.survival;
              dist.survival = trace.survival;
              dist.survival_included = true;
            }
            rec.joint = std::move(dist);
          } else if (ins.measure == MeasureKind::Overlap) {
            // swap-test meter on the reduced states; embed to one truncation
            // so unequal dims still compare
            const QuantumState dense = state.densified();
            const int common = std::max(space.dim(0), space.dim(1));
            const OverlapEstimate est =
                overlap_via_parity(detail::embed_single_mode(partial_trace(dense, 0), common),
                                   detail::embed_single_mode(partial_trace(dense, 1), common), params, eff,
                                   g, opts.dt);
            rec.raw = est.raw;
            rec.value = est.value;
          } else {
            const int target = ins.measure == MeasureKind::ParityB ? 1 : 0;
            rec.raw = parity_expectation(state, target, params, false);
            rec.value = eff == GateMode::Physical ? params.parity_contrast * rec.raw : rec.raw;
          }
          trace.measurements.push_back(std::move(rec));
          break;
        }
        case InstructionKind::Set: {
          const double v = resolve(ins.set_value);
          if (!(v > 0.0)) fail(ErrorCode::InvalidParams, "coupling must be positive");
          g = v;
          break;
        }
      }
    } catch (const Error& e) {
      fail(e.code(), "instruction " + std::to_string(i + 1) + " (line " + std::to_string(ins.line) + ", " +
                         instruction_name(ins.kind) + "): " + e.what());
    }
  }
  trace.final_state = std::move(state);
  return trace;
}

inline std::vector<double> sweep_grid(const SweepClause& sweep) {
  if (sweep.steps < 1) fail(ErrorCode::InvalidParams, "empty sweep grid");
  std::vector<double> grid(static_cast<size_t>(sweep.steps));
  if (sweep.steps == 1) {
    grid[0] = sweep.start;
    return grid;
  }
  for (int i = 0; i < sweep.steps; ++i)
    grid[static_cast<size_t>(i)] = sweep.start + (sweep.stop - sweep.start) * i / (sweep.steps - 1);
  grid.back() = sweep.stop;
  return grid;
}

// One row per grid point: the swept value, every measurement in program order
// (joint grids flattened to P{na}_{nb} columns), and the accumulated physical
// duration. Multiple measurements get m1_, m2_, ... column prefixes.
inline Dataset sweep_dataset(const Program& prog, const DeviceParams& params, const ExecOptions& opts = {}) {
  if (!prog.sweep) fail(ErrorCode::InvalidParams, "program has no sweep clause");
  const std::vector<double> grid = sweep_grid(*prog.sweep);
  const std::vector<int> dims = opts.dims_override.value_or(prog.dims);
  if (dims.size() != 2) fail(ErrorCode::InvalidSpace, "executor needs exactly two modes");

  int measure_count = 0;
  for (const auto& ins : prog.instructions)
    if (ins.kind == InstructionKind::Measure) ++measure_count;

  Dataset ds;
  ds.columns.push_back(prog.sweep->name);
  int mi = 0;
  for (const auto& ins : prog.instructions) {
    if (ins.kind != InstructionKind::Measure) continue;
    ++mi;
    const std::string prefix = measure_count > 1 ? "m" + std::to_string(mi) + "_" : "";
    switch (ins.measure) {
      case MeasureKind::Joint:
        for (int na = 0; na < dims[0]; ++na)
          for (int nb = 0; nb < dims[1]; ++nb)
            ds.columns.push_back(prefix + "P" + std::to_string(na) + "_" + std::to_string(nb));
        ds.columns.push_back(prefix + "survival");
        break;
      case MeasureKind::ParityA:
        ds.columns.push_back(prefix + "parity_a");
        break;
      case MeasureKind::ParityB:
        ds.columns.push_back(prefix + "parity_b");
        break;
      case MeasureKind::Overlap:
        ds.columns.push_back(prefix + "overlap");
        ds.columns.push_back(prefix + "overlap_raw");
        break;
    }
  }
  ds.columns.push_back("duration_us");

  for (double value : grid) {
    ExecOptions point = opts;
    point.sweep_value = value;
    const ExecutionTrace trace = execute(prog, params, point);
    std::vector<double> row;
    row.reserve(ds.columns.size());
    row.push_back(value);
    for (const auto& rec : trace.measurements) {
      switch (rec.kind) {
        case MeasureKind::Joint:
          for (int na = 0; na < dims[0]; ++na)
            for (int nb = 0; nb < dims[1]; ++nb) row.push_back(rec.joint.probs(na, nb));
          row.push_back(rec.survival);
          break;
        case MeasureKind::ParityA:
        case MeasureKind::ParityB:
          row.push_back(rec.value);
          break;
        case MeasureKind::Overlap:
          row.push_back(rec.value);
          row.push_back(rec.raw);
          break;
      }
    }
    row.push_back(trace.total_duration_us);
    ds.add_row(row);
  }
  return ds;
}

}  // namespace bosim

#endif
