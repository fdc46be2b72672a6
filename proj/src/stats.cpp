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

#include "durkit/stats.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "durkit/error.hpp"

namespace durkit {

DurationHistogram build_histograms(std::span<const AlignedUtterance> corpus,
                                   const PhonemeInventory& inventory) {
  DurationHistogram histogram;
  for (const auto& utterance : corpus) {
    validate_utterance(utterance, inventory);
    for (std::size_t n = 0; n < utterance.phonemes.size(); ++n) {
      histogram.add(utterance.phonemes[n], utterance.durations[n]);
    }
  }
  return histogram;
}

namespace {

// KL of one phoneme: both count maps smoothed by epsilon over the
// union support, normalized, then sum p * ln(p/q).
double phoneme_kld(const DurationHistogram::Counts& pred,
                   const DurationHistogram::Counts& ref, double epsilon) {
  std::set<int> support;
  for (const auto& [d, c] : pred) support.insert(d);
  for (const auto& [d, c] : ref) support.insert(d);

  double pred_total = 0.0;
  double ref_total = 0.0;
  for (const auto& [d, c] : pred) pred_total += static_cast<double>(c);
  for (const auto& [d, c] : ref) ref_total += static_cast<double>(c);
  const double bins = static_cast<double>(support.size());
  pred_total += epsilon * bins;
  ref_total += epsilon * bins;

  auto count_in = [](const DurationHistogram::Counts& counts, int d) {
    auto it = counts.find(d);
    return it == counts.end() ? 0.0 : static_cast<double>(it->second);
  };

  double divergence = 0.0;
  for (int d : support) {
    const double p = (count_in(pred, d) + epsilon) / pred_total;
    const double q = (count_in(ref, d) + epsilon) / ref_total;
    divergence += p * std::log(p / q);
  }
  return divergence;
}

}  // namespace

KldReport kld(const DurationHistogram& pred, const DurationHistogram& ref,
              double epsilon, bool occurrence_weighted) {
  if (!(epsilon > 0.0)) fail("smoothing epsilon must be > 0");
  if (ref.empty()) fail("reference histogram is empty");

  KldReport report;
  report.epsilon = epsilon;

  double total = 0.0;
  double weight_total = 0.0;
  for (const auto& [phoneme, ref_counts] : ref.all()) {
    const auto* pred_counts = pred.counts_for(phoneme);
    if (pred_counts == nullptr) {
      report.ref_only.push_back(phoneme);
      continue;
    }
    const double value = phoneme_kld(*pred_counts, ref_counts, epsilon);
    report.per_phoneme[phoneme] = value;
    const double weight =
        occurrence_weighted ? static_cast<double>(ref.occurrences(phoneme)) : 1.0;
    total += weight * value;
    weight_total += weight;
  }
  for (const auto& [phoneme, counts] : pred.all()) {
    if (ref.counts_for(phoneme) == nullptr) report.pred_only.push_back(phoneme);
  }
  report.mean = weight_total > 0.0 ? total / weight_total : 0.0;
  return report;
}

DurationStats summary(std::span<const AlignedUtterance> corpus) {
  struct Moments {
    std::uint64_t count = 0;
    double sum = 0.0;
    double sum_sq = 0.0;
  };
  std::map<int, Moments> moments;
  DurationStats stats;
  for (const auto& utterance : corpus) {
    for (std::size_t n = 0; n < utterance.phonemes.size(); ++n) {
      auto& m = moments[utterance.phonemes[n]];
      const double d = static_cast<double>(utterance.durations[n]);
      m.count += 1;
      m.sum += d;
      m.sum_sq += d * d;
      stats.total_occurrences += 1;
      stats.total_frames += utterance.durations[n];
    }
  }
  for (const auto& [phoneme, m] : moments) {
    PhonemeStats entry;
    entry.count = m.count;
    entry.mean = m.sum / static_cast<double>(m.count);
    entry.variance =
        m.sum_sq / static_cast<double>(m.count) - entry.mean * entry.mean;
    if (entry.variance < 0.0) entry.variance = 0.0;  // rounding guard
    stats.per_phoneme[phoneme] = entry;
  }
  return stats;
}

double corpus_length_ratio(std::span<const AlignedUtterance> numerator,
                           std::span<const AlignedUtterance> denominator) {
  std::int64_t num = 0;
  std::int64_t den = 0;
  for (const auto& utterance : numerator) num += utterance.total_frames();
  for (const auto& utterance : denominator) den += utterance.total_frames();
  if (den == 0) fail("denominator corpus has zero total frames");
  return static_cast<double>(num) / static_cast<double>(den);
}

std::string export_histogram_csv(const DurationHistogram& histogram,
                                 const PhonemeInventory& inventory,
                                 std::string_view symbol) {
  const int phoneme = inventory.id_of(symbol);
  std::ostringstream out;
  out << "duration,count\n";
  if (const auto* counts = histogram.counts_for(phoneme)) {
    for (const auto& [duration, count] : *counts) {
      out << duration << ',' << count << '\n';
    }
  }
  return out.str();
}

}  // namespace durkit
