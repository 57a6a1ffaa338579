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

#ifndef BOSIM_SAMPLING_HPP
#define BOSIM_SAMPLING_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "bosim/error.hpp"

namespace bosim {

// mt19937_64 output mapped to [0,1) by hand. std::uniform_real_distribution
// is not pinned by the standard; (x >> 11) * 2^-53 is, so seeded streams are
// bit-identical across compilers and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

// Draws `shots` outcomes from the discrete distribution `probs` by inverse
// CDF walk, one uniform per shot. Probabilities must be nonnegative; they are
// normalized by their sum so that a slightly leaky distribution still samples.
inline std::vector<std::int64_t> sample_counts(const std::vector<double>& probs, std::int64_t shots, Rng& rng) {
  if (probs.empty()) fail(ErrorCode::InvalidParams, "empty distribution");
  if (shots < 0) fail(ErrorCode::InvalidParams, "shot count must be nonnegative");
  double total = 0.0;
  for (double p : probs) {
    if (p < -1e-12) fail(ErrorCode::InvalidParams, "negative probability in distribution");
    total += (p > 0.0 ? p : 0.0);
  }
  if (total <= 0.0) fail(ErrorCode::InvalidParams, "distribution sums to zero");

  std::vector<std::int64_t> counts(probs.size(), 0);
  for (std::int64_t s = 0; s < shots; ++s) {
    const double u = rng.uniform() * total;
    double acc = 0.0;
    size_t pick = probs.size() - 1;
    for (size_t i = 0; i < probs.size(); ++i) {
      acc += (probs[i] > 0.0 ? probs[i] : 0.0);
      if (u < acc) {
        pick = i;
        break;
      }
    }
    ++counts[pick];
  }
  return counts;
}

// Frequency estimates (count/shots) preserving the input layout.
inline std::vector<double> sampled_frequencies(const std::vector<double>& probs, std::int64_t shots, Rng& rng) {
  const auto counts = sample_counts(probs, shots, rng);
  std::vector<double> freq(counts.size(), 0.0);
  if (shots == 0) return freq;
  for (size_t i = 0; i < counts.size(); ++i)
    freq[i] = static_cast<double>(counts[i]) / static_cast<double>(shots);
  return freq;
}

}  // namespace bosim

#endif
