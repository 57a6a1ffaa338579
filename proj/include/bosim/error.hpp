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

#ifndef BOSIM_ERROR_HPP
#define BOSIM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace bosim {

// Every failure mode in the library maps to one of these codes so callers
// (and the CLI exit-code mapping) can dispatch without string matching.
enum class ErrorCode {
  InvalidDimension,
  OutOfTruncation,
  TruncationTooSmall,
  ResonantDriveUndefined,
  SingularCorrection,
  InvalidParams,
  InvalidDetunings,
  InvalidCoupling,
  InvalidSpace,
  InvalidHamiltonian,
  StepTooLarge,
  PureStateInput,
  DimensionMismatch,
  AllDiscarded,
  FitFailed,
  FitDegenerate,
  InvalidDataset,
  ParseError,
  ConfigError,
  IoError,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidDimension: return "invalid-dimension";
    case ErrorCode::OutOfTruncation: return "out-of-truncation";
    case ErrorCode::TruncationTooSmall: return "truncation-too-small";
    case ErrorCode::ResonantDriveUndefined: return "resonant-drive-undefined";
    case ErrorCode::SingularCorrection: return "singular-correction";
    case ErrorCode::InvalidParams: return "invalid-params";
    case ErrorCode::InvalidDetunings: return "invalid-detunings";
    case ErrorCode::InvalidCoupling: return "invalid-coupling";
    case ErrorCode::InvalidSpace: return "invalid-space";
    case ErrorCode::InvalidHamiltonian: return "invalid-hamiltonian";
    case ErrorCode::StepTooLarge: return "step-too-large";
    case ErrorCode::PureStateInput: return "pure-state-input";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::AllDiscarded: return "all-discarded";
    case ErrorCode::FitFailed: return "fit-failed";
    case ErrorCode::FitDegenerate: return "fit-degenerate";
    case ErrorCode::InvalidDataset: return "invalid-dataset";
    case ErrorCode::ParseError: return "parse-error";
    case ErrorCode::ConfigError: return "config-error";
    case ErrorCode::IoError: return "io-error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + msg), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

}  // namespace bosim

#endif
