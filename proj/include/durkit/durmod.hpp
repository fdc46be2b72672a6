// Copyright 2026 durkit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <vector>

#include "durkit/rng.hpp"
#include "durkit/types.hpp"

// Duration modification at synthesis time. Two modes: a constant
// factor applied to every duration, and per-phoneme factors drawn from
// a mean-centered random walk so neighboring phonemes stretch or
// shrink together. Factors are clipped to an asymmetric window (wider
// above 1) and durations re-rounded to integers.

namespace durkit {

struct RandomWalkConfig {
  double sigma = 0.025;     // per-step stddev, >= 0
  double clip_lo = 0.9;     // <= 1
  double clip_hi = 1.2;     // >= 1
  std::uint64_t seed = 0;
  int min_duration = 0;     // floor applied after rounding

  void validate() const;    // throws DataError on bad ranges
};

struct ScaleSequence {
  std::vector<double> alphas;  // clipped, each in [clip_lo, clip_hi]
};

// Walk values before centering and clipping: w[k] = w[k-1] + N(0, sigma)
// starting from 0, one step per phoneme. Exposed for property tests.
std::vector<double> random_walk_steps(std::size_t n, double sigma, Rng& rng);

// Centered factors before clipping: 1 + w[k] - mean(w). The mean of
// the returned values is exactly 1 up to rounding error; a single
// value is exactly 1.
std::vector<double> center_walk(const std::vector<double>& walk);

// Full pipeline for n factors: walk, center, clip. Deterministic for a
// given (n, cfg.seed).
ScaleSequence random_walk_scales(std::size_t n, const RandomWalkConfig& cfg);

// round(d * alpha), half away from zero, floored at min_duration.
int scale_duration(int duration, double alpha, int min_duration);

// Every duration scaled by the same factor. alpha must be > 0.
AlignedUtterance constant_scale(const AlignedUtterance& utterance, double alpha,
                                int min_duration = 0);

// Per-phoneme random-walk scaling. The RNG stream is derived from
// (cfg.seed, utterance.id), so results are independent of processing
// order and job count. sigma = 0 reproduces the input exactly.
AlignedUtterance apply_random_walk(const AlignedUtterance& utterance,
                                   const RandomWalkConfig& cfg);

// Replaces predicted durations wholesale by the reference ones.
// The two utterances must carry identical phoneme sequences.
AlignedUtterance substitute_oracle(const AlignedUtterance& predicted,
                                   const AlignedUtterance& reference);

}  // namespace durkit
