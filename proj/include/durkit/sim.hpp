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
#include <filesystem>
#include <string>
#include <vector>

#include "durkit/rng.hpp"
#include "durkit/types.hpp"

// Desk-scale simulation: a planted per-phoneme "aligner" duration
// distribution, a narrowed "predictor" distribution drawn against the
// same phoneme sequences, and a sweep over constant and random-walk
// modification reporting mean KLd and corpus length per setting.

namespace durkit {

struct SimConfig {
  int phoneme_count = 40;
  int utterances = 2000;
  int utterance_length = 50;
  std::uint64_t seed = 1234;

  // Aligner-style duration minimum: 3 frames for HMM-like corpora,
  // 1 for CTC-like.
  int min_duration = 3;

  // Reference family over the excess above min_duration. Means are
  // spread linearly over [mean_min, mean_max] across phonemes;
  // dispersion d sets the excess variance to d * mean_excess^2 (a
  // negative binomial when that exceeds the Poisson limit, so the
  // right tail is heavy).
  std::string family = "negative_binomial";  // or "lognormal"
  double mean_min = 6.0;
  double mean_max = 14.0;
  double dispersion = 0.35;

  // Predictor narrowing relative to the reference distribution.
  double mean_shrink = 0.92;
  double variance_shrink = 0.25;

  double frame_shift_ms = kDefaultFrameShiftMs;

  // Sweep settings.
  std::vector<double> sigmas{0.0, 0.0125, 0.025, 0.0375, 0.05};
  std::vector<double> alphas{0.9, 1.0, 1.1, 1.2};
  double clip_lo = 0.9;
  double clip_hi = 1.2;
  double kld_epsilon = 0.5;

  void validate() const;
};

SimConfig load_sim_config(const std::filesystem::path& path);

struct SimCorpus {
  PhonemeInventory inventory;
  std::vector<AlignedUtterance> utterances;
};

// Duration draw targeting the given mean/variance of the excess over
// `minimum`. Used by both corpus generators; exposed for the
// law-of-large-numbers tests.
int sample_duration(Rng& rng, const std::string& family, double mean_excess,
                    double variance_excess, int minimum);

SimCorpus generate_reference(const SimConfig& config);

// Same phoneme sequences as the reference, durations drawn from the
// narrowed per-phoneme distributions.
std::vector<AlignedUtterance> generate_predictions(const SimCorpus& reference,
                                                   const SimConfig& config);

struct SweepRow {
  std::string mode;      // "none", "constant", "walk", "oracle"
  double parameter;      // alpha or sigma; NaN for none/oracle
  double data_hours;
  double length_ratio;   // modified frames / reference frames
  double mean_kld;       // vs the reference histograms
};

struct SweepReport {
  std::vector<SweepRow> rows;
  std::string to_csv() const;  // fixed formatting, bitwise stable
};

SweepReport run_sweep(const SimCorpus& reference,
                      const std::vector<AlignedUtterance>& predictions,
                      const SimConfig& config);

}  // namespace durkit
