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

#include <span>
#include <vector>

#include "durkit/logmath.hpp"
#include "durkit/types.hpp"

// Forced alignment on a blank-interleaved label lattice: full-sum
// forward scoring for validation and best-path decoding for duration
// extraction. Labels are emission-column indices; mapping transcript
// symbols to columns is the caller's concern. All arithmetic is in the
// log domain with kLogZero as the impossible-path sentinel.

namespace durkit {

// Expanded sequence blank, y1, blank, y2, ..., yN, blank (2N+1
// positions). Legal transitions into position j: stay at j, advance
// from j-1, or skip from j-2 when j holds a label that differs from
// the label at j-2 (i.e. the blank between distinct labels is
// optional).
class CtcLattice {
 public:
  static CtcLattice build(std::span<const int> labels, int blank_index);

  std::size_t size() const { return expanded_.size(); }
  int column(std::size_t position) const { return expanded_[position]; }
  bool is_label(std::size_t position) const { return position % 2 == 1; }
  bool can_skip_into(std::size_t position) const { return skippable_[position]; }
  int blank_index() const { return blank_index_; }
  std::size_t num_labels() const { return expanded_.size() / 2; }

  // Shortest feasible frame count: one frame per label plus a blank
  // frame between equal neighbors.
  std::size_t min_frames() const { return min_frames_; }

 private:
  std::vector<int> expanded_;
  std::vector<bool> skippable_;
  int blank_index_ = -1;
  std::size_t min_frames_ = 0;
};

// log P(labels | emissions) summed over all legal paths.
// Throws when no legal path exists (T below the lattice minimum) or
// emissions contain non-finite values.
double ctc_forward_logprob(const EmissionMatrix& emissions,
                           std::span<const int> labels, int blank_index);

// Copy with the blank column replaced by log(blank_floor). Row
// normalization is intentionally not preserved; decoding is
// score-based. blank_floor must be in (0, 1].
EmissionMatrix floor_blank(const EmissionMatrix& emissions, int blank_index,
                           double blank_floor);

// After decoding, frames that the best path spends in blank positions
// are merged into a neighboring label segment so that every frame
// carries a label.
enum class BlankAttachment {
  kFollowing,  // blank run joins the next label (default)
  kPreceding,  // blank run joins the previous label
};

struct CtcViterbiResult {
  std::vector<int> durations;      // per label, each >= 1, sums to T
  double path_log_prob = kLogZero; // best-path score on floored emissions
  std::vector<int> frame_positions;  // lattice position per frame
};

// Floors the blank column, decodes the best path, and attributes
// every frame to a label. Throws on infeasible instances or a floor
// outside (0, 1].
CtcViterbiResult ctc_viterbi_align(
    const EmissionMatrix& emissions, std::span<const int> labels,
    int blank_index, double blank_floor = 1e-8,
    BlankAttachment attachment = BlankAttachment::kFollowing);

}  // namespace durkit
