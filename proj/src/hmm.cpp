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

#include "durkit/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "durkit/error.hpp"
#include "durkit/kernels.hpp"
#include "durkit/logmath.hpp"
#include "durkit/parallel.hpp"

namespace durkit {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;
constexpr double kMinStateOccupancy = 1e-2;
constexpr double kMinComponentOccupancy = 1e-3;

// Loop probabilities are bounded away from 0 and 1. Without the bound
// a state that once collapsed to single-frame stays keeps a near-zero
// loop probability, and the transition cost then locks the alignment
// into that degenerate solution no matter how well the state's
// Gaussian fits longer stays.
constexpr double kMinLoopProb = 0.2;

}  // namespace

// ---------------------------------------------------------------------------
// Topology

HmmTopology::HmmTopology(const PhonemeInventory& inventory) {
  space_id_ = inventory.space_id();
  state_base_.assign(inventory.size(), -1);
  int next = 0;
  for (std::size_t p = 0; p < inventory.size(); ++p) {
    if (static_cast<int>(p) == space_id_) continue;
    state_base_[p] = next;
    next += kStatesPerPhoneme;
  }
  silence_state_ = next;
  num_states_ = static_cast<std::size_t>(next) + 1;
}

int HmmTopology::state_base(int phoneme) const {
  return state_base_[static_cast<std::size_t>(phoneme)];
}

int HmmTopology::phoneme_of_state(int state) const {
  if (state == silence_state_) return space_id_;
  for (std::size_t p = 0; p < state_base_.size(); ++p) {
    if (state_base_[p] >= 0 && state >= state_base_[p] &&
        state < state_base_[p] + kStatesPerPhoneme) {
      return static_cast<int>(p);
    }
  }
  fail("state id out of range: " + std::to_string(state));
}

int HmmTopology::substate_of_state(int state) const {
  if (state == silence_state_) return 0;
  const int base = state_base(phoneme_of_state(state));
  return state - base;
}

// ---------------------------------------------------------------------------
// Model

HmmModel::HmmModel(PhonemeInventory inventory, std::size_t feature_dim)
    : inventory_(std::move(inventory)),
      topology_(inventory_),
      feature_dim_(feature_dim) {
  if (feature_dim == 0) fail("feature dimension must be positive");
  const std::size_t states = topology_.num_states();
  mixtures_.resize(states);
  for (auto& mixture : mixtures_) {
    mixture.weights.assign(1, 1.0);
    mixture.means = Matrix(1, feature_dim, 0.0);
    mixture.variances = Matrix(1, feature_dim, 1.0);
  }
  loop_prob_.assign(states, 0.5);
  trained_.assign(states, false);
  finalize_scoring();
}

const GaussianMixture& HmmModel::mixture(int state) const {
  return mixtures_[static_cast<std::size_t>(state)];
}

GaussianMixture& HmmModel::mutable_mixture(int state) {
  return mixtures_[static_cast<std::size_t>(state)];
}

double HmmModel::loop_log_prob(int state) const {
  return std::log(loop_prob_[static_cast<std::size_t>(state)]);
}

double HmmModel::exit_log_prob(int state) const {
  return std::log(1.0 - loop_prob_[static_cast<std::size_t>(state)]);
}

void HmmModel::set_loop_prob(int state, double probability) {
  loop_prob_[static_cast<std::size_t>(state)] =
      std::clamp(probability, kMinLoopProb, 1.0 - kMinLoopProb);
}

bool HmmModel::covers(std::span<const int> phonemes) const {
  for (int p : phonemes) {
    if (!inventory_.contains(p)) return false;
    if (inventory_.is_space(p)) continue;  // silence falls back gracefully
    const std::size_t base = static_cast<std::size_t>(topology_.state_base(p));
    for (int s = 0; s < HmmTopology::kStatesPerPhoneme; ++s) {
      if (!trained_[base + static_cast<std::size_t>(s)]) return false;
    }
  }
  return true;
}

void HmmModel::check_invariants() const {
  for (std::size_t state = 0; state < mixtures_.size(); ++state) {
    const auto& mixture = mixtures_[state];
    if (mixture.components() == 0) fail("state has an empty mixture");
    double weight_sum = 0.0;
    for (double w : mixture.weights) {
      if (!(w >= 0.0)) fail("negative mixture weight");
      weight_sum += w;
    }
    if (std::abs(weight_sum - 1.0) > 1e-9) {
      fail("mixture weights of state " + std::to_string(state) +
           " sum to " + std::to_string(weight_sum));
    }
    for (double v : mixture.variances.data()) {
      if (!(v > 0.0) || !std::isfinite(v)) fail("non-positive variance");
    }
    const double p = loop_prob_[state];
    if (!(p > 0.0 && p < 1.0)) fail("loop probability outside (0, 1)");
  }
}

void HmmModel::finalize_scoring() {
  cache_.resize(mixtures_.size());
  for (std::size_t state = 0; state < mixtures_.size(); ++state) {
    const auto& mixture = mixtures_[state];
    auto& cache = cache_[state];
    const std::size_t comps = mixture.components();
    cache.log_const.assign(comps, kLogZero);
    cache.inv_variances = Matrix(comps, feature_dim_);
    for (std::size_t c = 0; c < comps; ++c) {
      double log_det = 0.0;
      for (std::size_t d = 0; d < feature_dim_; ++d) {
        const double var = mixture.variances.at(c, d);
        cache.inv_variances.at(c, d) = 1.0 / var;
        log_det += std::log(var);
      }
      const double w = mixture.weights[c];
      if (w > 0.0) {
        cache.log_const[c] =
            std::log(w) -
            0.5 * (static_cast<double>(feature_dim_) * std::log(kTwoPi) +
                   log_det);
      }
    }
  }
}

double HmmModel::log_density(int state, const double* frame) const {
  const auto& mixture = mixtures_[static_cast<std::size_t>(state)];
  const auto& cache = cache_[static_cast<std::size_t>(state)];
  const std::size_t comps = mixture.components();
  double best = kLogZero;
  double stack_scores[64];
  std::vector<double> heap_scores;
  double* scores = stack_scores;
  if (comps > 64) {
    heap_scores.resize(comps);
    scores = heap_scores.data();
  }
  for (std::size_t c = 0; c < comps; ++c) {
    double score = cache.log_const[c];
    if (!is_log_zero(score)) {
      score -= 0.5 * kernels::weighted_sq_dist(frame, mixture.means.row(c),
                                               cache.inv_variances.row(c),
                                               feature_dim_);
    }
    scores[c] = score;
    if (score > best) best = score;
  }
  if (is_log_zero(best)) return kLogZero;
  double total = 0.0;
  for (std::size_t c = 0; c < comps; ++c) {
    if (!is_log_zero(scores[c])) total += std::exp(scores[c] - best);
  }
  return best + std::log(total);
}

// ---------------------------------------------------------------------------
// Model file round trip (JSON; doubles serialize with full precision)

namespace {
using nlohmann::json;
}

std::string HmmModel::to_json_string() const {
  json root;
  root["format"] = "durkit-hmm";
  root["version"] = 1;
  root["feature_dim"] = feature_dim_;
  root["symbols"] = inventory_.symbols();
  root["space_symbol"] = inventory_.symbol(inventory_.space_id());

  json states = json::array();
  for (std::size_t state = 0; state < mixtures_.size(); ++state) {
    const auto& mixture = mixtures_[state];
    json entry;
    entry["phoneme"] =
        inventory_.symbol(topology_.phoneme_of_state(static_cast<int>(state)));
    entry["substate"] = topology_.substate_of_state(static_cast<int>(state));
    entry["trained"] = static_cast<bool>(trained_[state]);
    entry["loop_prob"] = loop_prob_[state];
    entry["weights"] = mixture.weights;
    json means = json::array();
    json variances = json::array();
    for (std::size_t c = 0; c < mixture.components(); ++c) {
      means.push_back(std::vector<double>(
          mixture.means.row(c), mixture.means.row(c) + feature_dim_));
      variances.push_back(std::vector<double>(
          mixture.variances.row(c), mixture.variances.row(c) + feature_dim_));
    }
    entry["means"] = std::move(means);
    entry["variances"] = std::move(variances);
    states.push_back(std::move(entry));
  }
  root["states"] = std::move(states);
  return root.dump();
}

HmmModel HmmModel::from_json_string(const std::string& text) try {
  json root = json::parse(text, nullptr, false);
  if (root.is_discarded() || !root.is_object()) fail("malformed model JSON");
  if (root.value("format", "") != std::string("durkit-hmm")) {
    fail("not a model file (missing format tag)");
  }
  if (root.value("version", 0) != 1) fail("unsupported model version");

  const auto symbols = root.at("symbols").get<std::vector<std::string>>();
  const auto space_symbol = root.at("space_symbol").get<std::string>();
  const std::size_t feature_dim = root.at("feature_dim").get<std::size_t>();
  PhonemeInventory inventory = PhonemeInventory::create(symbols, space_symbol);

  HmmModel model(std::move(inventory), feature_dim);
  const auto& states = root.at("states");
  if (states.size() != model.num_states()) {
    fail("model state count does not match its inventory");
  }
  for (std::size_t state = 0; state < states.size(); ++state) {
    const auto& entry = states[state];
    auto& mixture = model.mutable_mixture(static_cast<int>(state));
    mixture.weights = entry.at("weights").get<std::vector<double>>();
    const std::size_t comps = mixture.weights.size();
    mixture.means = Matrix(comps, feature_dim);
    mixture.variances = Matrix(comps, feature_dim);
    for (std::size_t c = 0; c < comps; ++c) {
      const auto mean = entry.at("means")[c].get<std::vector<double>>();
      const auto variance = entry.at("variances")[c].get<std::vector<double>>();
      if (mean.size() != feature_dim || variance.size() != feature_dim) {
        fail("model component dimension mismatch");
      }
      std::copy(mean.begin(), mean.end(), mixture.means.row(c));
      std::copy(variance.begin(), variance.end(), mixture.variances.row(c));
    }
    model.set_loop_prob(static_cast<int>(state),
                        entry.at("loop_prob").get<double>());
    if (entry.at("trained").get<bool>()) {
      model.mark_trained(static_cast<int>(state));
    }
  }
  model.check_invariants();
  model.finalize_scoring();
  return model;
} catch (const json::exception& e) {
  fail(std::string("malformed model JSON: ") + e.what());
}

void save_model(const std::filesystem::path& path, const HmmModel& model) {
  std::ofstream out(path);
  if (!out) fail("cannot open for writing: " + path.string());
  out << model.to_json_string() << '\n';
  if (!out) fail("write failed: " + path.string());
}

HmmModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open for reading: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return HmmModel::from_json_string(buffer.str());
}

// ---------------------------------------------------------------------------
// Silence handling and initialization

namespace {

// Frame classification shared by trim_silence and linear_segment_init:
// a frame is silence when its energy component lies more than
// |threshold_db| below the reference level. Energy values are taken as
// already log-scaled (dB-like, 0 = full scale); the reference is the
// utterance maximum or full scale, whichever is higher, so a uniformly
// quiet utterance still counts as silence.
std::vector<bool> silence_mask(const FeatureMatrix& features,
                               std::size_t energy_dim, double threshold_db) {
  if (energy_dim >= features.cols()) {
    fail("energy dimension " + std::to_string(energy_dim) +
         " out of range for " + std::to_string(features.cols()) + " columns");
  }
  if (!(threshold_db < 0.0)) fail("silence threshold must be negative dB");
  double max_energy = -1e300;
  for (std::size_t t = 0; t < features.rows(); ++t) {
    max_energy = std::max(max_energy, features.at(t, energy_dim));
  }
  std::vector<bool> mask(features.rows());
  const double cutoff = std::max(max_energy, 0.0) + threshold_db;
  for (std::size_t t = 0; t < features.rows(); ++t) {
    mask[t] = features.at(t, energy_dim) < cutoff;
  }
  return mask;
}

}  // namespace

FeatureMatrix trim_silence(const FeatureMatrix& features,
                           std::size_t energy_dim, double threshold_db) {
  validate_features(features);
  const std::vector<bool> mask = silence_mask(features, energy_dim, threshold_db);
  std::size_t first = 0;
  while (first < mask.size() && mask[first]) ++first;
  if (first == mask.size()) fail("utterance is empty after silence trimming");
  std::size_t last = mask.size();
  while (last > first && mask[last - 1]) --last;

  if (first == 0 && last == mask.size()) return features;
  FeatureMatrix trimmed(last - first, features.cols());
  for (std::size_t t = first; t < last; ++t) {
    std::copy(features.row(t), features.row(t) + features.cols(),
              trimmed.row(t - first));
  }
  return trimmed;
}

FrameAlignment linear_segment_init(const FeatureMatrix& features,
                                   std::span<const int> phonemes,
                                   const PhonemeInventory& inventory,
                                   const HmmTopology& topology,
                                   std::size_t energy_dim,
                                   double threshold_db) {
  validate_features(features);
  if (phonemes.empty()) fail("empty transcript");

  const std::vector<bool> mask = silence_mask(features, energy_dim, threshold_db);
  const std::size_t frames = features.rows();
  std::size_t speech = 0;
  for (bool silent : mask) speech += silent ? 0 : 1;
  if (speech == 0) fail("utterance is all silence, cannot segment");

  std::vector<int> emitting_states;
  std::vector<int> emitting_pos;
  for (std::size_t pos = 0; pos < phonemes.size(); ++pos) {
    const int p = phonemes[pos];
    if (!inventory.contains(p)) fail("unknown phoneme id in transcript");
    if (inventory.is_space(p)) continue;
    const int base = topology.state_base(p);
    for (int s = 0; s < HmmTopology::kStatesPerPhoneme; ++s) {
      emitting_states.push_back(base + s);
      emitting_pos.push_back(static_cast<int>(pos));
    }
  }
  if (emitting_states.empty()) fail("transcript has no non-space phonemes");
  if (emitting_states.size() > speech) {
    fail("too few non-silence frames: " + std::to_string(speech) + " for " +
         std::to_string(emitting_states.size()) + " states");
  }

  // Every sub-threshold frame goes to the silence state; the k-th
  // speech frame (in time order) goes to the state holding the k-th
  // equal share. Shares differ by at most one frame.
  FrameAlignment alignment;
  alignment.frame_states.assign(frames, topology.silence_state());
  std::vector<int> frame_pos(frames, -1);
  const std::size_t runs = emitting_states.size();
  std::size_t speech_index = 0;
  for (std::size_t t = 0; t < frames; ++t) {
    if (mask[t]) continue;
    const std::size_t run = speech_index * runs / speech;
    alignment.frame_states[t] = emitting_states[run];
    frame_pos[t] = emitting_pos[run];
    ++speech_index;
  }

  // Run-level segments grouped by transcript position. Interleaved
  // silence can split a phoneme into several runs and silence is not
  // tied to any space token here, so these segments are
  // statistics-grade only; duration extraction works on forced
  // alignments instead.
  std::size_t run_start = 0;
  for (std::size_t t = 1; t <= frames; ++t) {
    if (t < frames && frame_pos[t] == frame_pos[run_start]) continue;
    const bool is_silence = frame_pos[run_start] < 0;
    alignment.segments.push_back(
        {frame_pos[run_start],
         is_silence ? inventory.space_id() : phonemes[frame_pos[run_start]],
         static_cast<int>(run_start), static_cast<int>(t - run_start),
         is_silence});
    run_start = t;
  }
  return alignment;
}

// ---------------------------------------------------------------------------
// Viterbi alignment

std::vector<ChainNode> build_alignment_chain(std::span<const int> phonemes,
                                             const PhonemeInventory& inventory,
                                             const HmmTopology& topology,
                                             bool allow_optional_silence) {
  std::vector<ChainNode> chain;
  for (std::size_t pos = 0; pos < phonemes.size(); ++pos) {
    const int p = phonemes[pos];
    if (!inventory.contains(p)) fail("unknown phoneme id in transcript");
    if (inventory.is_space(p)) {
      chain.push_back({static_cast<int>(pos), topology.silence_state(),
                       allow_optional_silence});
    } else {
      const int base = topology.state_base(p);
      for (int s = 0; s < HmmTopology::kStatesPerPhoneme; ++s) {
        chain.push_back({static_cast<int>(pos), base + s, false});
      }
    }
  }
  return chain;
}

FrameAlignment viterbi_align(const HmmModel& model,
                             const FeatureMatrix& features,
                             std::span<const int> phonemes,
                             bool allow_optional_silence) {
  validate_features(features);
  if (features.cols() != model.feature_dim()) {
    fail("feature dimension " + std::to_string(features.cols()) +
         " does not match model dimension " +
         std::to_string(model.feature_dim()));
  }
  if (phonemes.empty()) fail("empty transcript");
  if (!model.covers(phonemes)) {
    fail("model does not cover every phoneme of the transcript");
  }

  const auto chain = build_alignment_chain(phonemes, model.inventory(),
                                           model.topology(),
                                           allow_optional_silence);
  const std::size_t n_nodes = chain.size();
  const std::size_t frames = features.rows();
  std::size_t mandatory = 0;
  for (const auto& node : chain) {
    if (!node.optional) ++mandatory;
  }
  if (frames < std::max<std::size_t>(mandatory, 1)) {
    fail("infeasible: " + std::to_string(frames) + " frames for " +
         std::to_string(mandatory) + " mandatory states");
  }

  // Emission table over the distinct states of the chain.
  std::vector<int> node_state_slot(n_nodes);
  std::vector<int> slot_state;
  {
    std::vector<int> state_to_slot(model.num_states(), -1);
    for (std::size_t j = 0; j < n_nodes; ++j) {
      int& slot = state_to_slot[static_cast<std::size_t>(chain[j].state)];
      if (slot < 0) {
        slot = static_cast<int>(slot_state.size());
        slot_state.push_back(chain[j].state);
      }
      node_state_slot[j] = slot;
    }
  }
  Matrix emissions(frames, slot_state.size());
  for (std::size_t t = 0; t < frames; ++t) {
    const double* frame = features.row(t);
    for (std::size_t u = 0; u < slot_state.size(); ++u) {
      emissions.at(t, u) = model.log_density(slot_state[u], frame);
    }
  }
  for (double v : emissions.data()) {
    if (std::isnan(v)) fail("non-finite acoustic scores");
  }

  // Predecessors of node j (besides the self loop): j-1, plus anything
  // reachable by skipping a run of optional nodes ending at j-1.
  std::vector<std::size_t> reach_back(n_nodes, 0);
  for (std::size_t j = 1; j < n_nodes; ++j) {
    std::size_t lo = j - 1;
    while (lo > 0 && chain[lo].optional) --lo;
    reach_back[j] = lo;  // predecessors are lo..j-1
  }

  std::vector<double> previous(n_nodes, kLogZero);
  std::vector<double> current(n_nodes, kLogZero);
  std::vector<std::vector<int>> backpointers(
      frames, std::vector<int>(n_nodes, -1));

  // Entry: node 0, plus nodes preceded only by optional ones.
  for (std::size_t j = 0; j < n_nodes; ++j) {
    if (j > 0 && !chain[j - 1].optional) break;
    previous[j] = emissions.at(0, node_state_slot[j]);
    backpointers[0][j] = static_cast<int>(j);
  }

  for (std::size_t t = 1; t < frames; ++t) {
    for (std::size_t j = 0; j < n_nodes; ++j) {
      double best = kLogZero;
      int from = -1;
      if (!is_log_zero(previous[j])) {
        best = previous[j] + model.loop_log_prob(chain[j].state);
        from = static_cast<int>(j);
      }
      if (j > 0) {
        for (std::size_t i = reach_back[j]; i < j; ++i) {
          if (is_log_zero(previous[i])) continue;
          const double score = previous[i] + model.exit_log_prob(chain[i].state);
          if (score > best) {
            best = score;
            from = static_cast<int>(i);
          }
        }
      }
      if (from < 0) {
        current[j] = kLogZero;
      } else {
        current[j] = best + emissions.at(t, node_state_slot[j]);
      }
      backpointers[t][j] = from;
    }
    std::swap(previous, current);
  }

  // Exit: last node, or any node followed only by optional ones.
  double best_final = kLogZero;
  std::size_t end_node = n_nodes;
  for (std::size_t j = n_nodes; j-- > 0;) {
    if (!is_log_zero(previous[j]) && previous[j] > best_final) {
      best_final = previous[j];
      end_node = j;
    }
    if (!chain[j].optional) break;
  }
  if (end_node == n_nodes) fail("no feasible alignment path");

  std::vector<int> frame_nodes(frames);
  std::size_t node = end_node;
  for (std::size_t t = frames; t-- > 0;) {
    frame_nodes[t] = static_cast<int>(node);
    node = static_cast<std::size_t>(backpointers[t][node]);
  }

  FrameAlignment alignment;
  alignment.log_prob = best_final;
  alignment.frame_states.resize(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    alignment.frame_states[t] = chain[frame_nodes[t]].state;
  }

  // Segments per transcript position; skipped optional silence becomes
  // a zero-frame segment at the boundary it would have occupied.
  std::vector<int> pos_frames(phonemes.size(), 0);
  std::vector<int> pos_start(phonemes.size(), -1);
  for (std::size_t t = 0; t < frames; ++t) {
    const int pos = chain[frame_nodes[t]].transcript_pos;
    pos_frames[pos] += 1;
    if (pos_start[pos] < 0) pos_start[pos] = static_cast<int>(t);
  }
  int cursor = 0;
  for (std::size_t pos = 0; pos < phonemes.size(); ++pos) {
    AlignmentSegment segment;
    segment.transcript_pos = static_cast<int>(pos);
    segment.phoneme = phonemes[pos];
    segment.frames = pos_frames[pos];
    segment.start = pos_frames[pos] > 0 ? pos_start[pos] : cursor;
    segment.is_silence = model.inventory().is_space(phonemes[pos]);
    cursor = segment.start + segment.frames;
    alignment.segments.push_back(segment);
  }
  return alignment;
}

AlignedUtterance extract_durations(const FrameAlignment& alignment,
                                   const PhonemeInventory& inventory,
                                   double frame_shift_ms) {
  AlignedUtterance utterance;
  utterance.id = alignment.utterance_id;
  utterance.frame_shift_ms = frame_shift_ms;
  for (const auto& segment : alignment.segments) {
    if (segment.transcript_pos < 0) {
      fail("alignment has boundary silence outside the transcript; "
           "durations are extracted from forced alignments only");
    }
  }
  utterance.phonemes.reserve(alignment.segments.size());
  utterance.durations.reserve(alignment.segments.size());
  for (const auto& segment : alignment.segments) {
    utterance.phonemes.push_back(segment.phoneme);
    utterance.durations.push_back(segment.frames);
  }
  validate_utterance(utterance, inventory);
  return utterance;
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct Accumulator {
  std::vector<double> occupancy;            // per state
  std::vector<double> loop_counts;          // per state
  std::vector<double> exit_counts;          // per state
  std::vector<std::vector<double>> comp_occ;
  std::vector<Matrix> comp_sum;
  std::vector<Matrix> comp_sum_sq;

  explicit Accumulator(const HmmModel& model) {
    const std::size_t states = model.num_states();
    occupancy.assign(states, 0.0);
    loop_counts.assign(states, 0.0);
    exit_counts.assign(states, 0.0);
    comp_occ.resize(states);
    comp_sum.resize(states);
    comp_sum_sq.resize(states);
    for (std::size_t s = 0; s < states; ++s) {
      const std::size_t comps = model.mixture(static_cast<int>(s)).components();
      comp_occ[s].assign(comps, 0.0);
      comp_sum[s] = Matrix(comps, model.feature_dim(), 0.0);
      comp_sum_sq[s] = Matrix(comps, model.feature_dim(), 0.0);
    }
  }

  void merge(const Accumulator& other) {
    for (std::size_t s = 0; s < occupancy.size(); ++s) {
      occupancy[s] += other.occupancy[s];
      loop_counts[s] += other.loop_counts[s];
      exit_counts[s] += other.exit_counts[s];
      for (std::size_t c = 0; c < comp_occ[s].size(); ++c) {
        comp_occ[s][c] += other.comp_occ[s][c];
      }
      const std::size_t n = comp_sum[s].data().size();
      kernels::axpy(1.0, other.comp_sum[s].data().data(),
                    comp_sum[s].data().data(), n);
      kernels::axpy(1.0, other.comp_sum_sq[s].data().data(),
                    comp_sum_sq[s].data().data(), n);
    }
  }
};

void accumulate_utterance(const HmmModel& model,
                          const FeatureMatrix& features,
                          const std::vector<int>& frame_states,
                          Accumulator& acc) {
  const std::size_t dims = model.feature_dim();
  std::vector<double> frame_sq(dims);
  std::vector<double> resp(64);
  for (std::size_t t = 0; t < frame_states.size(); ++t) {
    const int state = frame_states[t];
    const double* frame = features.row(t);
    const auto& mixture = model.mixture(state);
    const std::size_t comps = mixture.components();
    if (comps > resp.size()) resp.resize(comps);
    acc.occupancy[state] += 1.0;

    if (comps == 1) {
      resp[0] = 1.0;
    } else {
      // Component responsibilities within the assigned state.
      double best = kLogZero;
      for (std::size_t c = 0; c < comps; ++c) {
        double score = kLogZero;
        if (mixture.weights[c] > 0.0) {
          score = std::log(mixture.weights[c]);
          double quad = 0.0;
          double log_det = 0.0;
          for (std::size_t d = 0; d < dims; ++d) {
            const double var = mixture.variances.at(c, d);
            const double diff = frame[d] - mixture.means.at(c, d);
            quad += diff * diff / var;
            log_det += std::log(var);
          }
          score -= 0.5 * (quad + log_det);
        }
        resp[c] = score;
        if (score > best) best = score;
      }
      double total = 0.0;
      for (std::size_t c = 0; c < comps; ++c) {
        resp[c] = is_log_zero(resp[c]) ? 0.0 : std::exp(resp[c] - best);
        total += resp[c];
      }
      for (std::size_t c = 0; c < comps; ++c) resp[c] /= total;
    }

    for (std::size_t d = 0; d < dims; ++d) frame_sq[d] = frame[d] * frame[d];
    for (std::size_t c = 0; c < comps; ++c) {
      if (resp[c] == 0.0) continue;
      acc.comp_occ[state][c] += resp[c];
      kernels::axpy(resp[c], frame, acc.comp_sum[state].row(c), dims);
      kernels::axpy(resp[c], frame_sq.data(), acc.comp_sum_sq[state].row(c),
                    dims);
    }

    // Transition counts from state runs. A change of state is an exit
    // of the previous state; staying is a self-loop. (Consecutive
    // realized silences would be under-counted as loops; transcripts
    // with adjacent space tokens are not produced by this toolkit.)
    if (t > 0) {
      const int prev = frame_states[t - 1];
      if (prev == state) {
        acc.loop_counts[prev] += 1.0;
      } else {
        acc.exit_counts[prev] += 1.0;
      }
    }
  }
}

void estimate(HmmModel& model, const Accumulator& acc,
              const std::vector<double>& variance_floor) {
  const std::size_t dims = model.feature_dim();
  for (std::size_t s = 0; s < model.num_states(); ++s) {
    const int state = static_cast<int>(s);
    if (acc.occupancy[s] < kMinStateOccupancy) continue;  // keep old params

    auto& mixture = model.mutable_mixture(state);
    const std::size_t comps = mixture.components();
    double weight_total = 0.0;
    for (std::size_t c = 0; c < comps; ++c) {
      const double occ = acc.comp_occ[s][c];
      if (occ < kMinComponentOccupancy) continue;  // keep old component
      const double* sum = acc.comp_sum[s].row(c);
      const double* sum_sq = acc.comp_sum_sq[s].row(c);
      for (std::size_t d = 0; d < dims; ++d) {
        const double mean = sum[d] / occ;
        mixture.means.at(c, d) = mean;
        mixture.variances.at(c, d) =
            std::max(sum_sq[d] / occ - mean * mean, variance_floor[d]);
      }
    }
    for (std::size_t c = 0; c < comps; ++c) {
      mixture.weights[c] = acc.comp_occ[s][c];
      weight_total += mixture.weights[c];
    }
    for (std::size_t c = 0; c < comps; ++c) mixture.weights[c] /= weight_total;

    const double transitions = acc.loop_counts[s] + acc.exit_counts[s];
    if (transitions >= 1.0) {
      model.set_loop_prob(state, acc.loop_counts[s] / transitions);
    }
    model.mark_trained(state);
  }
  model.finalize_scoring();
}

void split_mixtures(HmmModel& model, int cap) {
  for (std::size_t s = 0; s < model.num_states(); ++s) {
    const int state = static_cast<int>(s);
    if (!model.state_trained(state)) continue;
    auto& mixture = model.mutable_mixture(state);
    const std::size_t comps = mixture.components();
    std::size_t n_split = comps;
    if (static_cast<int>(2 * comps) > cap) {
      n_split = cap > static_cast<int>(comps)
                    ? static_cast<std::size_t>(cap) - comps
                    : 0;
    }
    if (n_split == 0) continue;

    // Split the heaviest components first.
    std::vector<std::size_t> order(comps);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return mixture.weights[a] > mixture.weights[b];
    });

    const std::size_t dims = mixture.dims();
    GaussianMixture grown;
    grown.weights = mixture.weights;
    grown.means = Matrix(comps + n_split, dims);
    grown.variances = Matrix(comps + n_split, dims);
    for (std::size_t c = 0; c < comps; ++c) {
      std::copy(mixture.means.row(c), mixture.means.row(c) + dims,
                grown.means.row(c));
      std::copy(mixture.variances.row(c), mixture.variances.row(c) + dims,
                grown.variances.row(c));
    }
    for (std::size_t k = 0; k < n_split; ++k) {
      const std::size_t src = order[k];
      const std::size_t dst = comps + k;
      for (std::size_t d = 0; d < dims; ++d) {
        const double offset = 0.2 * std::sqrt(grown.variances.at(src, d));
        grown.means.at(dst, d) = grown.means.at(src, d) - offset;
        grown.means.at(src, d) = grown.means.at(src, d) + offset;
        grown.variances.at(dst, d) = grown.variances.at(src, d);
      }
      grown.weights[src] *= 0.5;
      grown.weights.push_back(grown.weights[src]);
    }
    mixture = std::move(grown);
  }
  model.finalize_scoring();
}

}  // namespace

TrainResult train_monophone(std::span<const TrainingUtterance> corpus,
                            const PhonemeInventory& inventory,
                            const TrainOptions& options) {
  if (corpus.empty()) fail("training corpus is empty");
  const std::size_t dims = corpus.front().features.cols();
  std::int64_t total_frames = 0;
  for (const auto& utterance : corpus) {
    validate_features(utterance.features);
    if (utterance.features.cols() != dims) {
      fail("inconsistent feature dimensions across the corpus");
    }
    for (int p : utterance.phonemes) {
      if (!inventory.contains(p)) {
        fail("utterance '" + utterance.id + "' uses a phoneme outside the inventory");
      }
    }
    total_frames += static_cast<std::int64_t>(utterance.features.rows());
  }
  if (total_frames < static_cast<std::int64_t>(
                         HmmTopology::kStatesPerPhoneme)) {
    fail("degenerate corpus: too few frames");
  }

  // Global feature moments: fallback Gaussian for states that never
  // receive frames, and the variance floor.
  std::vector<double> global_sum(dims, 0.0);
  std::vector<double> global_sum_sq(dims, 0.0);
  for (const auto& utterance : corpus) {
    for (std::size_t t = 0; t < utterance.features.rows(); ++t) {
      kernels::accumulate_moments(utterance.features.row(t), global_sum.data(),
                                  global_sum_sq.data(), dims);
    }
  }
  std::vector<double> global_mean(dims);
  std::vector<double> global_var(dims);
  std::vector<double> variance_floor(dims);
  for (std::size_t d = 0; d < dims; ++d) {
    global_mean[d] = global_sum[d] / static_cast<double>(total_frames);
    global_var[d] = std::max(global_sum_sq[d] / static_cast<double>(total_frames) -
                                 global_mean[d] * global_mean[d],
                             1e-8);
    variance_floor[d] = std::max(options.variance_floor_scale * global_var[d],
                                 1e-10);
  }

  HmmModel model(inventory, dims);
  for (std::size_t s = 0; s < model.num_states(); ++s) {
    auto& mixture = model.mutable_mixture(static_cast<int>(s));
    std::copy(global_mean.begin(), global_mean.end(), mixture.means.row(0));
    std::copy(global_var.begin(), global_var.end(), mixture.variances.row(0));
  }
  model.finalize_scoring();

  TrainResult result{std::move(model), {}};
  HmmModel& current = result.model;

  const auto blocks = fixed_blocks(corpus.size());
  auto accumulate_from = [&](const std::vector<std::vector<int>>& frame_states) {
    std::vector<Accumulator> partial(blocks.size(), Accumulator(current));
    parallel_for(blocks.size(), options.jobs, [&](std::size_t b) {
      for (std::size_t i = blocks[b].begin; i < blocks[b].end; ++i) {
        accumulate_utterance(current, corpus[i].features, frame_states[i],
                             partial[b]);
      }
    });
    Accumulator total(current);
    for (const auto& part : partial) total.merge(part);
    return total;
  };

  // Iteration 1: statistics from the energy-based linear segmentation.
  {
    std::vector<std::vector<int>> frame_states(corpus.size());
    parallel_for(corpus.size(), options.jobs, [&](std::size_t i) {
      FrameAlignment alignment = linear_segment_init(
          corpus[i].features, corpus[i].phonemes, inventory,
          current.topology(), options.energy_dim,
          options.silence_threshold_db);
      frame_states[i] = std::move(alignment.frame_states);
    });
    const Accumulator acc = accumulate_from(frame_states);
    estimate(current, acc, variance_floor);
  }

  auto run_em_passes = [&](int block, int passes) {
    for (int pass = 0; pass < passes; ++pass) {
      std::vector<std::vector<int>> frame_states(corpus.size());
      std::vector<double> scores(corpus.size());
      parallel_for(corpus.size(), options.jobs, [&](std::size_t i) {
        FrameAlignment alignment =
            viterbi_align(current, corpus[i].features, corpus[i].phonemes,
                          options.allow_optional_silence);
        scores[i] = alignment.log_prob;
        frame_states[i] = std::move(alignment.frame_states);
      });
      double total_score = 0.0;
      for (double score : scores) total_score += score;
      const Accumulator acc = accumulate_from(frame_states);
      estimate(current, acc, variance_floor);
      result.log.push_back(
          {block, pass + 1,
           total_score / static_cast<double>(total_frames)});
    }
  };

  // Block 0 spent its first iteration on the init statistics.
  run_em_passes(0, std::max(options.em_iters - 1, 0));
  for (int split = 1; split <= options.split_iters; ++split) {
    split_mixtures(current, options.mixture_cap);
    run_em_passes(split, options.em_iters);
  }

  current.check_invariants();
  return result;
}

}  // namespace durkit
