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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace durkit {

inline constexpr const char* kSpaceSymbol = "[space]";
inline constexpr double kDefaultFrameShiftMs = 12.5;

// Closed phoneme label set with dense integer ids assigned by position.
// Immutable after construction; files always store symbol strings, ids
// are an in-process representation only.
class PhonemeInventory {
 public:
  // `symbols` must be unique and contain `space_symbol`. When
  // `silence_symbol` is empty the silence label is the space token
  // itself (the usual case; a CTC-style set treats it as one label).
  static PhonemeInventory create(std::vector<std::string> symbols,
                                 const std::string& space_symbol = kSpaceSymbol,
                                 const std::optional<std::string>& silence_symbol = {});

  // Builds an inventory from the set of symbols observed in a corpus,
  // sorted for stable ids. The space token is always included.
  static PhonemeInventory from_observed(const std::vector<std::string>& observed,
                                        const std::string& space_symbol = kSpaceSymbol);

  int id_of(std::string_view symbol) const;        // throws on unknown symbol
  std::optional<int> find(std::string_view symbol) const;
  const std::string& symbol(int id) const;         // throws on out-of-range id
  bool contains(int id) const { return id >= 0 && id < static_cast<int>(symbols_.size()); }

  int space_id() const { return space_id_; }
  int silence_id() const { return silence_id_; }
  bool is_space(int id) const { return id == space_id_; }
  std::size_t size() const { return symbols_.size(); }
  const std::vector<std::string>& symbols() const { return symbols_; }

 private:
  PhonemeInventory() = default;

  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> index_;
  int space_id_ = -1;
  int silence_id_ = -1;
};

// Phoneme sequence with integer frame durations; the common currency
// between aligners, duration modification, statistics and upsampling.
struct AlignedUtterance {
  std::string id;
  std::vector<int> phonemes;    // inventory ids, length N
  std::vector<int> durations;   // frames, length N, each >= 0
  double frame_shift_ms = kDefaultFrameShiftMs;

  std::int64_t total_frames() const {
    std::int64_t t = 0;
    for (int d : durations) t += d;
    return t;
  }
};

// Checks the structural invariants and returns the utterance unchanged.
// Throws DataError on length mismatch, unknown phoneme id, negative
// duration, or non-positive frame shift. Zero durations are accepted
// for any phoneme here; aligner-specific minimums are enforced by the
// aligners themselves.
const AlignedUtterance& validate_utterance(const AlignedUtterance& utterance,
                                           const PhonemeInventory& inventory);

// Corpus length in hours: sum of frames * frame_shift_ms over all
// utterances, divided by 3.6e6 ms/h.
double total_audio_hours(std::span<const AlignedUtterance> corpus);

// Dense row-major matrix of doubles. Used both for acoustic feature
// matrices (T x D) and for emission log-posterior matrices (T x S).
// Files store float32 (see io.hpp); in memory everything is double.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double* row(std::size_t r) { return data_.data() + r * cols_; }
  const double* row(std::size_t r) const { return data_.data() + r * cols_; }

  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

using FeatureMatrix = Matrix;
using EmissionMatrix = Matrix;

// Feature matrices must be finite and non-empty.
const FeatureMatrix& validate_features(const FeatureMatrix& features);

// Emission matrices additionally carry per-row log-probabilities that
// must be normalized: logsumexp of every row within `tolerance` of 0.
// Flooring the blank column (ctc.hpp) deliberately breaks this, so the
// check runs on input matrices, not on derived ones.
const EmissionMatrix& validate_emissions(const EmissionMatrix& emissions,
                                         double tolerance = 1e-3);

// Per-phoneme counts of integer durations. Deterministic iteration
// order (std::map) so reports and exports are stable.
class DurationHistogram {
 public:
  using Counts = std::map<int, std::uint64_t>;  // duration -> count

  void add(int phoneme, int duration, std::uint64_t count = 1);

  // Commutative, associative merge; supports parallel partial builds.
  void merge(const DurationHistogram& other);

  const Counts* counts_for(int phoneme) const;
  std::uint64_t occurrences(int phoneme) const;
  bool empty() const { return per_phoneme_.empty(); }

  const std::map<int, Counts>& all() const { return per_phoneme_; }

 private:
  std::map<int, Counts> per_phoneme_;
};

}  // namespace durkit
