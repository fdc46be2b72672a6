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

#include "durkit/ctc.hpp"

#include <algorithm>
#include <cmath>

#include "durkit/error.hpp"

namespace durkit {

namespace {

void check_emissions_finite(const EmissionMatrix& emissions) {
  if (emissions.rows() == 0 || emissions.cols() == 0) {
    fail("emission matrix is empty");
  }
  for (double v : emissions.data()) {
    if (!std::isfinite(v)) fail("emission matrix contains non-finite values");
  }
}

void check_labels(std::span<const int> labels, int blank_index,
                  std::size_t columns) {
  if (blank_index < 0 || blank_index >= static_cast<int>(columns)) {
    fail("blank index out of range: " + std::to_string(blank_index));
  }
  for (int label : labels) {
    if (label < 0 || label >= static_cast<int>(columns)) {
      fail("label index out of range: " + std::to_string(label));
    }
    if (label == blank_index) fail("labels must not contain the blank");
  }
}

}  // namespace

CtcLattice CtcLattice::build(std::span<const int> labels, int blank_index) {
  CtcLattice lattice;
  lattice.blank_index_ = blank_index;
  lattice.expanded_.reserve(2 * labels.size() + 1);
  lattice.expanded_.push_back(blank_index);
  for (int label : labels) {
    lattice.expanded_.push_back(label);
    lattice.expanded_.push_back(blank_index);
  }
  lattice.skippable_.assign(lattice.expanded_.size(), false);
  for (std::size_t j = 2; j < lattice.expanded_.size(); ++j) {
    lattice.skippable_[j] = lattice.is_label(j) &&
                            lattice.expanded_[j] != lattice.expanded_[j - 2];
  }
  std::size_t repeats = 0;
  for (std::size_t i = 1; i < labels.size(); ++i) {
    if (labels[i] == labels[i - 1]) ++repeats;
  }
  lattice.min_frames_ = labels.size() + repeats;
  return lattice;
}

namespace {

// Shared DP skeleton: Combine is log_add for the full sum and max for
// the best path. Backpointers are recorded only when requested.
template <typename Combine>
std::vector<double> lattice_pass(const EmissionMatrix& emissions,
                                 const CtcLattice& lattice, Combine combine,
                                 std::vector<std::vector<int>>* backpointers) {
  const std::size_t frames = emissions.rows();
  const std::size_t states = lattice.size();
  std::vector<double> previous(states, kLogZero);
  std::vector<double> current(states, kLogZero);
  if (backpointers != nullptr) {
    backpointers->assign(frames, std::vector<int>(states, -1));
  }

  previous[0] = emissions.at(0, lattice.column(0));
  if (states > 1) previous[1] = emissions.at(0, lattice.column(1));
  if (backpointers != nullptr) {
    (*backpointers)[0][0] = 0;
    if (states > 1) (*backpointers)[0][1] = 1;
  }

  for (std::size_t t = 1; t < frames; ++t) {
    for (std::size_t j = 0; j < states; ++j) {
      double best = previous[j];
      int from = static_cast<int>(j);
      if (j >= 1) {
        const double advance = previous[j - 1];
        const double combined = combine(best, advance, from,
                                        static_cast<int>(j - 1));
        best = combined;
      }
      if (j >= 2 && lattice.can_skip_into(j)) {
        best = combine(best, previous[j - 2], from, static_cast<int>(j - 2));
      }
      if (is_log_zero(best)) {
        current[j] = kLogZero;
        if (backpointers != nullptr) (*backpointers)[t][j] = -1;
      } else {
        current[j] = best + emissions.at(t, lattice.column(j));
        if (backpointers != nullptr) (*backpointers)[t][j] = from;
      }
    }
    std::swap(previous, current);
  }
  return previous;
}

}  // namespace

double ctc_forward_logprob(const EmissionMatrix& emissions,
                           std::span<const int> labels, int blank_index) {
  check_emissions_finite(emissions);
  check_labels(labels, blank_index, emissions.cols());
  const CtcLattice lattice = CtcLattice::build(labels, blank_index);
  if (emissions.rows() < lattice.min_frames()) {
    fail("infeasible: " + std::to_string(emissions.rows()) +
         " frames for a lattice needing at least " +
         std::to_string(lattice.min_frames()));
  }

  const std::vector<double> final_scores =
      lattice_pass(emissions, lattice,
                   [](double acc, double candidate, int&, int) {
                     return log_add(acc, candidate);
                   },
                   nullptr);

  double total = final_scores[lattice.size() - 1];
  if (lattice.size() > 1) {
    total = log_add(total, final_scores[lattice.size() - 2]);
  }
  if (is_log_zero(total)) fail("no legal path through the lattice");
  return total;
}

EmissionMatrix floor_blank(const EmissionMatrix& emissions, int blank_index,
                           double blank_floor) {
  check_emissions_finite(emissions);
  if (blank_index < 0 || blank_index >= static_cast<int>(emissions.cols())) {
    fail("blank index out of range: " + std::to_string(blank_index));
  }
  if (!(blank_floor > 0.0 && blank_floor <= 1.0)) {
    fail("blank floor must be in (0, 1]");
  }
  EmissionMatrix floored = emissions;
  const double log_floor = std::log(blank_floor);
  for (std::size_t t = 0; t < floored.rows(); ++t) {
    floored.at(t, blank_index) = log_floor;
  }
  return floored;
}

CtcViterbiResult ctc_viterbi_align(const EmissionMatrix& emissions,
                                   std::span<const int> labels,
                                   int blank_index, double blank_floor,
                                   BlankAttachment attachment) {
  check_emissions_finite(emissions);
  check_labels(labels, blank_index, emissions.cols());
  if (labels.empty()) fail("cannot align an empty label sequence");
  const CtcLattice lattice = CtcLattice::build(labels, blank_index);
  const std::size_t frames = emissions.rows();
  if (frames < lattice.min_frames()) {
    fail("infeasible: " + std::to_string(frames) +
         " frames for a lattice needing at least " +
         std::to_string(lattice.min_frames()));
  }

  const EmissionMatrix floored = floor_blank(emissions, blank_index, blank_floor);

  std::vector<std::vector<int>> backpointers;
  const std::vector<double> final_scores =
      lattice_pass(floored, lattice,
                   [](double acc, double candidate, int& from, int origin) {
                     if (candidate > acc) {
                       from = origin;
                       return candidate;
                     }
                     return acc;
                   },
                   &backpointers);

  std::size_t end_position = lattice.size() - 1;
  double best = final_scores[end_position];
  if (lattice.size() > 1 && final_scores[lattice.size() - 2] > best) {
    end_position = lattice.size() - 2;
    best = final_scores[end_position];
  }
  if (is_log_zero(best)) fail("no legal path through the lattice");

  std::vector<int> positions(frames);
  std::size_t position = end_position;
  for (std::size_t t = frames; t-- > 0;) {
    positions[t] = static_cast<int>(position);
    const int from = backpointers[t][position];
    position = static_cast<std::size_t>(from);
  }

  // Attribute frames to labels. Label k sits at lattice position
  // 2k + 1; the path visits label positions in order, so the first
  // frame of each label run splits the timeline.
  const std::size_t n_labels = lattice.num_labels();
  std::vector<int> first_frame(n_labels, -1);
  std::vector<int> last_frame(n_labels, -1);
  for (std::size_t t = 0; t < frames; ++t) {
    const int pos = positions[t];
    if (pos % 2 == 1) {
      const std::size_t k = static_cast<std::size_t>(pos) / 2;
      if (first_frame[k] < 0) first_frame[k] = static_cast<int>(t);
      last_frame[k] = static_cast<int>(t);
    }
  }

  CtcViterbiResult result;
  result.path_log_prob = best;
  result.frame_positions = std::move(positions);
  result.durations.assign(n_labels, 0);
  if (attachment == BlankAttachment::kFollowing) {
    // A blank run belongs to the label after it, so label k starts
    // right after label k-1's own last frame; trailing blanks fall
    // into the last label.
    for (std::size_t k = 0; k < n_labels; ++k) {
      const int start = k == 0 ? 0 : last_frame[k - 1] + 1;
      const int end =
          k + 1 < n_labels ? last_frame[k] + 1 : static_cast<int>(frames);
      result.durations[k] = end - start;
    }
  } else {
    // A blank run belongs to the label before it, so label k ends
    // where label k+1's own run begins; leading blanks fall into the
    // first label.
    for (std::size_t k = 0; k < n_labels; ++k) {
      const int start = k == 0 ? 0 : first_frame[k];
      const int end =
          k + 1 < n_labels ? first_frame[k + 1] : static_cast<int>(frames);
      result.durations[k] = end - start;
    }
  }
  return result;
}

}  // namespace durkit
