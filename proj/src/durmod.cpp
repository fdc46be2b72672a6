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

#include "durkit/durmod.hpp"

#include <algorithm>
#include <cmath>

#include "durkit/error.hpp"

namespace durkit {

void RandomWalkConfig::validate() const {
  if (sigma < 0.0) fail("random walk sigma must be >= 0");
  if (!(clip_lo <= 1.0 && 1.0 <= clip_hi)) {
    fail("clip range must satisfy clip_lo <= 1 <= clip_hi");
  }
  if (min_duration < 0) fail("min_duration must be >= 0");
}

std::vector<double> random_walk_steps(std::size_t n, double sigma, Rng& rng) {
  std::vector<double> walk(n);
  double value = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    value += rng.gaussian(0.0, sigma);
    walk[k] = value;
  }
  return walk;
}

std::vector<double> center_walk(const std::vector<double>& walk) {
  std::vector<double> centered(walk.size());
  double total = 0.0;
  for (double w : walk) total += w;
  const double mean = total / static_cast<double>(walk.size());
  for (std::size_t k = 0; k < walk.size(); ++k) {
    centered[k] = 1.0 + (walk[k] - mean);
  }
  return centered;
}

ScaleSequence random_walk_scales(std::size_t n, const RandomWalkConfig& cfg) {
  cfg.validate();
  if (n == 0) fail("cannot draw scale factors for zero phonemes");
  Rng rng(cfg.seed);
  std::vector<double> alphas = center_walk(random_walk_steps(n, cfg.sigma, rng));
  for (double& a : alphas) a = std::clamp(a, cfg.clip_lo, cfg.clip_hi);
  return ScaleSequence{std::move(alphas)};
}

int scale_duration(int duration, double alpha, int min_duration) {
  const double scaled = static_cast<double>(duration) * alpha;
  const int rounded = static_cast<int>(std::llround(scaled));
  return std::max(rounded, min_duration);
}

AlignedUtterance constant_scale(const AlignedUtterance& utterance, double alpha,
                                int min_duration) {
  if (!(alpha > 0.0)) fail("constant scale factor must be > 0");
  AlignedUtterance scaled = utterance;
  for (int& d : scaled.durations) d = scale_duration(d, alpha, min_duration);
  return scaled;
}

AlignedUtterance apply_random_walk(const AlignedUtterance& utterance,
                                   const RandomWalkConfig& cfg) {
  cfg.validate();
  AlignedUtterance modified = utterance;
  if (utterance.phonemes.empty()) return modified;

  RandomWalkConfig per_utterance = cfg;
  per_utterance.seed = derive_seed(cfg.seed, utterance.id);
  const ScaleSequence scales =
      random_walk_scales(utterance.durations.size(), per_utterance);
  for (std::size_t n = 0; n < modified.durations.size(); ++n) {
    modified.durations[n] =
        scale_duration(modified.durations[n], scales.alphas[n], cfg.min_duration);
  }
  return modified;
}

AlignedUtterance substitute_oracle(const AlignedUtterance& predicted,
                                   const AlignedUtterance& reference) {
  if (predicted.phonemes != reference.phonemes) {
    fail("oracle substitution requires identical phoneme sequences ('" +
         predicted.id + "' vs '" + reference.id + "')");
  }
  AlignedUtterance substituted = predicted;
  substituted.durations = reference.durations;
  return substituted;
}

}  // namespace durkit
