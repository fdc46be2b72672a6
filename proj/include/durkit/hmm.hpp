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
#include <span>
#include <string>
#include <vector>

#include "durkit/types.hpp"

// Monophone Gaussian-mixture HMM aligner. Topology: three emitting
// states per phoneme plus one shared silence state, strict
// left-to-right with self-loops and no skips inside a phoneme. Space
// tokens map to the silence state, which is optional at word
// boundaries: a best path may bypass it, in which case the space token
// is reported with duration zero.
//
// Training is Viterbi-style: frames are hard-assigned to states by the
// best path, then mixtures and transitions are re-estimated from the
// assigned frames (with soft component responsibilities inside each
// state). The first iteration estimates from the energy-based linear
// segmentation; further iterations realign with the current model.

namespace durkit {

// State numbering derived from an inventory: non-space phonemes get
// three consecutive states, the shared silence state comes last.
class HmmTopology {
 public:
  static constexpr int kStatesPerPhoneme = 3;

  explicit HmmTopology(const PhonemeInventory& inventory);

  std::size_t num_states() const { return num_states_; }
  int state_base(int phoneme) const;  // -1 for the space token
  int silence_state() const { return silence_state_; }
  bool is_silence_state(int state) const { return state == silence_state_; }
  int phoneme_of_state(int state) const;  // space id for the silence state
  int substate_of_state(int state) const; // 0..2, or 0 for silence

 private:
  std::vector<int> state_base_;
  int silence_state_ = -1;
  std::size_t num_states_ = 0;
  int space_id_ = -1;
};

struct GaussianMixture {
  std::vector<double> weights;  // per component, sums to 1
  Matrix means;                 // components x dims
  Matrix variances;             // components x dims, floored > 0

  std::size_t components() const { return weights.size(); }
  std::size_t dims() const { return means.cols(); }
};

class HmmModel {
 public:
  HmmModel(PhonemeInventory inventory, std::size_t feature_dim);

  const PhonemeInventory& inventory() const { return inventory_; }
  const HmmTopology& topology() const { return topology_; }
  std::size_t feature_dim() const { return feature_dim_; }
  std::size_t num_states() const { return topology_.num_states(); }

  const GaussianMixture& mixture(int state) const;
  GaussianMixture& mutable_mixture(int state);

  double loop_log_prob(int state) const;
  double exit_log_prob(int state) const;
  void set_loop_prob(int state, double probability);
  double loop_prob(int state) const { return loop_prob_[state]; }

  bool state_trained(int state) const { return trained_[state]; }
  void mark_trained(int state) { trained_[state] = true; }

  // True when every non-space phoneme of the sequence has trained
  // emitting states.
  bool covers(std::span<const int> phonemes) const;

  // Mixture weights sum to 1, variances are positive and finite.
  void check_invariants() const;

  // Rebuilds the cached inverse variances and per-component log
  // normalizers. Must be called after mutating mixtures.
  void finalize_scoring();

  // log p(frame | state) under the state's Gaussian mixture.
  double log_density(int state, const double* frame) const;

  std::string to_json_string() const;
  static HmmModel from_json_string(const std::string& text);

 private:
  PhonemeInventory inventory_;
  HmmTopology topology_;
  std::size_t feature_dim_ = 0;
  std::vector<GaussianMixture> mixtures_;   // per state
  std::vector<double> loop_prob_;           // per state
  std::vector<bool> trained_;

  // scoring cache, component-major per state
  struct ScoringCache {
    std::vector<double> log_const;  // per component
    Matrix inv_variances;           // components x dims
  };
  std::vector<ScoringCache> cache_;
};

void save_model(const std::filesystem::path& path, const HmmModel& model);
HmmModel load_model(const std::filesystem::path& path);

// One aligned stretch of frames for one transcript position.
// transcript_pos is -1 only in initialization alignments, for
// boundary silence that has no space token to attach to.
struct AlignmentSegment {
  int transcript_pos = -1;
  int phoneme = -1;
  int start = 0;
  int frames = 0;       // 0 when optional silence was skipped
  bool is_silence = false;
};

struct FrameAlignment {
  std::string utterance_id;
  std::vector<int> frame_states;          // model state per frame
  std::vector<AlignmentSegment> segments; // ordered by transcript position
  double log_prob = 0.0;                  // best-path score (alignments only)
};

// Chain of states an utterance must traverse: three mandatory nodes
// per non-space phoneme, one silence node per space token (optional
// when allow_optional_silence). Exposed for the exhaustive-path tests.
struct ChainNode {
  int transcript_pos;
  int state;
  bool optional;
};
std::vector<ChainNode> build_alignment_chain(std::span<const int> phonemes,
                                             const PhonemeInventory& inventory,
                                             const HmmTopology& topology,
                                             bool allow_optional_silence);

// Removes leading and trailing frames whose energy component lies
// below the utterance maximum plus threshold_db (threshold_db < 0;
// energy values are assumed log-scaled). Interior frames are kept.
// Throws when every frame is below the threshold.
FeatureMatrix trim_silence(const FeatureMatrix& features,
                           std::size_t energy_dim, double threshold_db);

// Energy-based initial alignment: boundary silence frames go to the
// silence state, the interior frames are split into equal (within one
// frame) runs per emitting state in transcript order.
FrameAlignment linear_segment_init(const FeatureMatrix& features,
                                   std::span<const int> phonemes,
                                   const PhonemeInventory& inventory,
                                   const HmmTopology& topology,
                                   std::size_t energy_dim,
                                   double threshold_db);

// Best state path under the left-to-right topology. Throws when the
// model does not cover the transcript or T is too short for the
// mandatory chain.
FrameAlignment viterbi_align(const HmmModel& model,
                             const FeatureMatrix& features,
                             std::span<const int> phonemes,
                             bool allow_optional_silence = true);

// Sums each phoneme's three states into one duration; space tokens
// whose silence was skipped appear with duration 0. The durations tile
// the utterance: they add up to the frame count.
AlignedUtterance extract_durations(const FrameAlignment& alignment,
                                   const PhonemeInventory& inventory,
                                   double frame_shift_ms = kDefaultFrameShiftMs);

struct TrainingUtterance {
  std::string id;
  FeatureMatrix features;
  std::vector<int> phonemes;
};

struct TrainOptions {
  int em_iters = 10;       // per mixture-size block; iteration 1 is the
                           // estimate from the linear segmentation
  int split_iters = 3;     // mixture doublings, each followed by em_iters
  int mixture_cap = 16;
  std::uint64_t seed = 0;
  double variance_floor_scale = 1e-3;  // times the global feature variance
  std::size_t energy_dim = 0;
  double silence_threshold_db = -50.0;
  bool allow_optional_silence = true;
  int jobs = 1;
};

// Objective trace: per realignment pass, the corpus per-frame log
// probability of the new alignment under the model that produced it.
// Non-decreasing within a block (fixed mixture size).
struct TrainLogEntry {
  int block = 0;          // 0 = single Gaussians, k = after k-th split
  int iteration = 0;      // realignment pass within the block
  double per_frame_log_prob = 0.0;
};

struct TrainResult {
  HmmModel model;
  std::vector<TrainLogEntry> log;
};

TrainResult train_monophone(std::span<const TrainingUtterance> corpus,
                            const PhonemeInventory& inventory,
                            const TrainOptions& options);

}  // namespace durkit
