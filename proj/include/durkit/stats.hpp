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

#include <map>
#include <span>
#include <string>
#include <vector>

#include "durkit/types.hpp"

// Duration distribution analytics: per-phoneme histograms, summary
// moments and the mean KL divergence between a predicted and a
// reference duration distribution.

namespace durkit {

struct PhonemeStats {
  std::uint64_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // population variance
};

struct DurationStats {
  std::map<int, PhonemeStats> per_phoneme;
  std::uint64_t total_occurrences = 0;
  std::int64_t total_frames = 0;
};

struct KldReport {
  std::map<int, double> per_phoneme;  // phonemes present in both corpora
  double mean = 0.0;                  // unweighted mean over per_phoneme
  double epsilon = 0.0;
  // Coverage: phonemes of one corpus absent from the other are left
  // out of the mean; listed here so reports can flag the gap.
  std::vector<int> ref_only;
  std::vector<int> pred_only;
};

DurationHistogram build_histograms(std::span<const AlignedUtterance> corpus,
                                   const PhonemeInventory& inventory);

// KLd(pred || ref) per phoneme over the union support of observed
// durations, with `epsilon` added to every support bin before
// normalization. `occurrence_weighted` switches the mean from the
// plain per-phoneme average to one weighted by reference occurrence
// counts. Throws when `ref` is empty.
KldReport kld(const DurationHistogram& pred, const DurationHistogram& ref,
              double epsilon = 0.5, bool occurrence_weighted = false);

DurationStats summary(std::span<const AlignedUtterance> corpus);

// Total-frame ratio of two corpora (numerator / denominator).
double corpus_length_ratio(std::span<const AlignedUtterance> numerator,
                           std::span<const AlignedUtterance> denominator);

// CSV rows "duration,count" for one phoneme, ascending by duration,
// with a header line. Throws when the symbol is not in the inventory;
// a known phoneme with no occurrences yields the header only.
std::string export_histogram_csv(const DurationHistogram& histogram,
                                 const PhonemeInventory& inventory,
                                 std::string_view symbol);

}  // namespace durkit
