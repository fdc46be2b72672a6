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

#include "durkit/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "durkit/error.hpp"
#include "durkit/kernels.hpp"

namespace durkit {

PhonemeInventory PhonemeInventory::create(
    std::vector<std::string> symbols, const std::string& space_symbol,
    const std::optional<std::string>& silence_symbol) {
  PhonemeInventory inv;
  inv.symbols_ = std::move(symbols);
  for (std::size_t i = 0; i < inv.symbols_.size(); ++i) {
    auto [it, inserted] =
        inv.index_.emplace(inv.symbols_[i], static_cast<int>(i));
    if (!inserted) fail("duplicate phoneme symbol: " + inv.symbols_[i]);
  }
  auto space_it = inv.index_.find(space_symbol);
  if (space_it == inv.index_.end()) {
    fail("inventory is missing the space token: " + space_symbol);
  }
  inv.space_id_ = space_it->second;
  if (silence_symbol.has_value()) {
    auto sil_it = inv.index_.find(*silence_symbol);
    if (sil_it == inv.index_.end()) {
      fail("inventory is missing the silence label: " + *silence_symbol);
    }
    inv.silence_id_ = sil_it->second;
  } else {
    inv.silence_id_ = inv.space_id_;
  }
  return inv;
}

PhonemeInventory PhonemeInventory::from_observed(
    const std::vector<std::string>& observed, const std::string& space_symbol) {
  std::set<std::string> unique(observed.begin(), observed.end());
  unique.insert(space_symbol);
  return create(std::vector<std::string>(unique.begin(), unique.end()),
                space_symbol);
}

int PhonemeInventory::id_of(std::string_view symbol) const {
  auto it = index_.find(std::string(symbol));
  if (it == index_.end()) fail("unknown phoneme symbol: " + std::string(symbol));
  return it->second;
}

std::optional<int> PhonemeInventory::find(std::string_view symbol) const {
  auto it = index_.find(std::string(symbol));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& PhonemeInventory::symbol(int id) const {
  if (!contains(id)) fail("phoneme id out of range: " + std::to_string(id));
  return symbols_[static_cast<std::size_t>(id)];
}

const AlignedUtterance& validate_utterance(const AlignedUtterance& utterance,
                                           const PhonemeInventory& inventory) {
  if (utterance.phonemes.size() != utterance.durations.size()) {
    fail("utterance '" + utterance.id + "': phoneme/duration length mismatch (" +
         std::to_string(utterance.phonemes.size()) + " vs " +
         std::to_string(utterance.durations.size()) + ")");
  }
  for (int p : utterance.phonemes) {
    if (!inventory.contains(p)) {
      fail("utterance '" + utterance.id +
           "': unknown phoneme id " + std::to_string(p));
    }
  }
  for (int d : utterance.durations) {
    if (d < 0) {
      fail("utterance '" + utterance.id + "': negative duration " +
           std::to_string(d));
    }
  }
  if (!(utterance.frame_shift_ms > 0.0)) {
    fail("utterance '" + utterance.id + "': non-positive frame shift");
  }
  return utterance;
}

double total_audio_hours(std::span<const AlignedUtterance> corpus) {
  double ms = 0.0;
  for (const auto& utterance : corpus) {
    ms += static_cast<double>(utterance.total_frames()) *
          utterance.frame_shift_ms;
  }
  return ms / 3.6e6;
}

const FeatureMatrix& validate_features(const FeatureMatrix& features) {
  if (features.rows() == 0 || features.cols() == 0) {
    fail("feature matrix is empty");
  }
  for (double v : features.data()) {
    if (!std::isfinite(v)) fail("feature matrix contains non-finite values");
  }
  return features;
}

const EmissionMatrix& validate_emissions(const EmissionMatrix& emissions,
                                         double tolerance) {
  if (emissions.rows() == 0 || emissions.cols() == 0) {
    fail("emission matrix is empty");
  }
  const std::size_t cols = emissions.cols();
  for (std::size_t t = 0; t < emissions.rows(); ++t) {
    const double* row = emissions.row(t);
    for (std::size_t s = 0; s < cols; ++s) {
      if (!std::isfinite(row[s])) {
        fail("emission matrix contains non-finite values at row " +
             std::to_string(t));
      }
    }
    const double shift = kernels::max_value(row, cols);
    double total = 0.0;
    for (std::size_t s = 0; s < cols; ++s) total += std::exp(row[s] - shift);
    const double log_norm = shift + std::log(total);
    if (std::abs(log_norm) > tolerance) {
      fail("emission row " + std::to_string(t) +
           " is not a normalized log-probability distribution (logsumexp = " +
           std::to_string(log_norm) + ")");
    }
  }
  return emissions;
}

void DurationHistogram::add(int phoneme, int duration, std::uint64_t count) {
  per_phoneme_[phoneme][duration] += count;
}

void DurationHistogram::merge(const DurationHistogram& other) {
  for (const auto& [phoneme, counts] : other.per_phoneme_) {
    auto& mine = per_phoneme_[phoneme];
    for (const auto& [duration, count] : counts) mine[duration] += count;
  }
}

const DurationHistogram::Counts* DurationHistogram::counts_for(
    int phoneme) const {
  auto it = per_phoneme_.find(phoneme);
  return it == per_phoneme_.end() ? nullptr : &it->second;
}

std::uint64_t DurationHistogram::occurrences(int phoneme) const {
  const Counts* counts = counts_for(phoneme);
  if (counts == nullptr) return 0;
  std::uint64_t total = 0;
  for (const auto& [duration, count] : *counts) total += count;
  return total;
}

}  // namespace durkit
