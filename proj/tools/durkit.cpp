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

// durkit CLI: every toolkit operation as a subcommand, wired through
// the JSONL / FMAT file formats. Exit codes: 0 success, 1 usage error,
// 2 data error. Diagnostics go to stderr, data to stdout or --out.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "durkit/ctc.hpp"
#include "durkit/durmod.hpp"
#include "durkit/error.hpp"
#include "durkit/hmm.hpp"
#include "durkit/io.hpp"
#include "durkit/kernels.hpp"
#include "durkit/manifest.hpp"
#include "durkit/parallel.hpp"
#include "durkit/sim.hpp"
#include "durkit/stats.hpp"
#include "durkit/upsample.hpp"
#include "durkit/version.hpp"

namespace {

using durkit::AlignedUtterance;
using durkit::DataError;
using durkit::FeatureMatrix;
using durkit::PhonemeInventory;

int dispatch(const std::vector<std::string>& args);

// ---------------------------------------------------------------------------
// Manifest bookkeeping

class ManifestScope {
 public:
  ManifestScope(std::string subcommand, std::vector<std::string> argv)
      : start_(std::chrono::steady_clock::now()) {
    manifest_.subcommand = std::move(subcommand);
    manifest_.argv = std::move(argv);
    manifest_.version = durkit::kVersion;
    manifest_.kernel_backend = durkit::kernels::active_backend_name();
  }

  void config(const std::string& key, const std::string& value) {
    manifest_.config[key] = value;
  }
  void config(const std::string& key, double value) {
    char buffer[48];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    manifest_.config[key] = buffer;
  }
  void config(const std::string& key, long long value) {
    manifest_.config[key] = std::to_string(value);
  }
  void seed(std::uint64_t seed) { manifest_.seed = seed; }
  void input(const std::filesystem::path& path) {
    manifest_.inputs.push_back(path.string());
  }
  void output(const std::filesystem::path& path) {
    manifest_.outputs.push_back(path.string());
  }

  // Written next to the first output once the command has succeeded.
  void commit() {
    if (manifest_.outputs.empty()) return;
    const auto elapsed = std::chrono::steady_clock::now() - start_;
    manifest_.wall_ms =
        std::chrono::duration<double, std::milli>(elapsed).count();
    durkit::write_manifest(
        durkit::manifest_path_for(manifest_.outputs.front()), manifest_);
  }

 private:
  durkit::RunManifest manifest_;
  std::chrono::steady_clock::time_point start_;
};

// ---------------------------------------------------------------------------
// Small shared helpers

void write_text(const std::optional<std::string>& out_path,
                const std::string& text) {
  if (!out_path.has_value()) {
    std::cout << text;
    return;
  }
  std::ofstream out(*out_path);
  if (!out) durkit::fail("cannot open for writing: " + *out_path);
  out << text;
  if (!out) durkit::fail("write failed: " + *out_path);
}

struct HmmCorpusOptions {
  std::string features_dir;
  std::string transcripts;
  std::optional<double> trim_db;
  std::size_t energy_dim = 0;
  int jobs = 1;
};

struct LoadedCorpus {
  PhonemeInventory inventory;
  std::vector<durkit::TrainingUtterance> utterances;
};

LoadedCorpus load_hmm_corpus(const HmmCorpusOptions& options) {
  const auto records = durkit::io::read_utterance_records(options.transcripts);
  if (records.empty()) durkit::fail("no utterances in " + options.transcripts);
  LoadedCorpus corpus{durkit::io::inventory_from_records(records), {}};
  corpus.utterances.resize(records.size());
  durkit::parallel_for(records.size(), options.jobs, [&](std::size_t i) {
    durkit::TrainingUtterance utterance;
    utterance.id = records[i].id;
    for (const auto& symbol : records[i].phonemes) {
      utterance.phonemes.push_back(corpus.inventory.id_of(symbol));
    }
    utterance.features = durkit::io::read_matrix(
        durkit::io::matrix_path_for(options.features_dir, records[i].id));
    durkit::validate_features(utterance.features);
    if (options.trim_db.has_value()) {
      utterance.features = durkit::trim_silence(
          utterance.features, options.energy_dim, *options.trim_db);
    }
    corpus.utterances[i] = std::move(utterance);
  });
  return corpus;
}

std::vector<durkit::io::FrameAlignmentRecord> align_corpus(
    const durkit::HmmModel& model, const LoadedCorpus& corpus,
    bool optional_silence, int jobs) {
  std::vector<durkit::io::FrameAlignmentRecord> records(
      corpus.utterances.size());
  durkit::parallel_for(corpus.utterances.size(), jobs, [&](std::size_t i) {
    const auto& utterance = corpus.utterances[i];
    durkit::FrameAlignment alignment = durkit::viterbi_align(
        model, utterance.features, utterance.phonemes, optional_silence);
    durkit::io::FrameAlignmentRecord record;
    record.id = utterance.id;
    record.frames = static_cast<std::int64_t>(utterance.features.rows());
    for (const auto& segment : alignment.segments) {
      record.segments.push_back(
          {corpus.inventory.symbol(segment.phoneme), segment.transcript_pos,
           segment.start, segment.frames});
    }
    records[i] = std::move(record);
  });
  return records;
}

std::string format_double(double value) {
  char buffer[48];
  std::snprintf(buffer, sizeof(buffer), "%.6f", value);
  return buffer;
}

// ---------------------------------------------------------------------------
// Subcommand bodies

void run_hmm_train(const std::vector<std::string>& argv,
                   const HmmCorpusOptions& corpus_options,
                   const durkit::TrainOptions& train_options,
                   const std::string& out, bool init_only) {
  ManifestScope manifest(init_only ? "hmm-init" : "hmm-train", argv);
  manifest.input(corpus_options.transcripts);
  manifest.input(corpus_options.features_dir);
  manifest.output(out);
  manifest.seed(train_options.seed);
  manifest.config("em_iters", static_cast<long long>(train_options.em_iters));
  manifest.config("split_iters",
                  static_cast<long long>(train_options.split_iters));
  manifest.config("mixture_cap",
                  static_cast<long long>(train_options.mixture_cap));
  manifest.config("silence_db", train_options.silence_threshold_db);

  LoadedCorpus corpus = load_hmm_corpus(corpus_options);
  durkit::TrainResult result = durkit::train_monophone(
      corpus.utterances, corpus.inventory, train_options);
  durkit::save_model(out, result.model);
  for (const auto& entry : result.log) {
    std::cerr << "block " << entry.block << " iteration " << entry.iteration
              << " per-frame log-prob " << entry.per_frame_log_prob << '\n';
  }
  manifest.commit();
}

void run_hmm_align(const std::vector<std::string>& argv,
                   const HmmCorpusOptions& corpus_options,
                   const std::string& model_path, const std::string& out,
                   bool optional_silence) {
  ManifestScope manifest("hmm-align", argv);
  manifest.input(model_path);
  manifest.input(corpus_options.transcripts);
  manifest.input(corpus_options.features_dir);
  manifest.output(out);
  manifest.config("optional_silence", optional_silence ? "true" : "false");

  const durkit::HmmModel model = durkit::load_model(model_path);
  LoadedCorpus corpus = load_hmm_corpus(corpus_options);
  const auto records =
      align_corpus(model, corpus, optional_silence, corpus_options.jobs);
  durkit::io::write_frame_alignments(out, records);
  manifest.commit();
}

void run_durations(const std::vector<std::string>& argv, const std::string& in,
                   const std::string& out, double frame_shift_ms) {
  ManifestScope manifest("durations", argv);
  manifest.input(in);
  manifest.output(out);
  manifest.config("frame_shift_ms", frame_shift_ms);

  const auto records = durkit::io::read_frame_alignments(in);
  std::vector<std::string> observed;
  for (const auto& record : records) {
    for (const auto& segment : record.segments) {
      observed.push_back(segment.phoneme);
    }
  }
  const PhonemeInventory inventory =
      PhonemeInventory::from_observed(observed);

  std::vector<AlignedUtterance> utterances;
  utterances.reserve(records.size());
  for (const auto& record : records) {
    durkit::FrameAlignment alignment;
    alignment.utterance_id = record.id;
    for (const auto& segment : record.segments) {
      alignment.segments.push_back({segment.pos,
                                    inventory.id_of(segment.phoneme),
                                    segment.start, segment.frames, false});
    }
    // One segment per transcript position, in position order.
    std::sort(alignment.segments.begin(), alignment.segments.end(),
              [](const durkit::AlignmentSegment& a,
                 const durkit::AlignmentSegment& b) {
                return a.transcript_pos < b.transcript_pos;
              });
    for (std::size_t n = 0; n < alignment.segments.size(); ++n) {
      if (alignment.segments[n].transcript_pos != static_cast<int>(n)) {
        durkit::fail("utterance '" + record.id +
                     "': segment positions must cover 0.." +
                     std::to_string(alignment.segments.size() - 1) +
                     " exactly once");
      }
    }
    AlignedUtterance utterance =
        durkit::extract_durations(alignment, inventory, frame_shift_ms);
    if (utterance.total_frames() != record.frames) {
      durkit::fail("utterance '" + record.id +
                   "': segment frames do not sum to the frame count");
    }
    utterances.push_back(std::move(utterance));
  }
  durkit::io::write_alignments(out, utterances, inventory);
  manifest.commit();
}

void run_ctc_align(const std::vector<std::string>& argv,
                   const std::string& emissions_dir,
                   const std::string& transcripts, const std::string& labels,
                   const std::string& blank_symbol, double blank_floor,
                   const std::string& attach, const std::string& out,
                   int jobs) {
  ManifestScope manifest("ctc-align", argv);
  manifest.input(emissions_dir);
  manifest.input(transcripts);
  manifest.input(labels);
  manifest.output(out);
  manifest.config("blank_floor", blank_floor);
  manifest.config("attach", attach);

  const durkit::BlankAttachment attachment =
      attach == "backward" ? durkit::BlankAttachment::kPreceding
                           : durkit::BlankAttachment::kFollowing;
  const auto table = durkit::io::read_label_table(labels, blank_symbol);
  const auto records = durkit::io::read_utterance_records(transcripts);
  const PhonemeInventory inventory =
      durkit::io::inventory_from_records(records);

  std::vector<AlignedUtterance> utterances(records.size());
  durkit::parallel_for(records.size(), jobs, [&](std::size_t i) {
    const auto& record = records[i];
    const durkit::EmissionMatrix emissions = durkit::io::read_matrix(
        durkit::io::matrix_path_for(emissions_dir, record.id));
    durkit::validate_emissions(emissions);
    std::vector<int> columns;
    columns.reserve(record.phonemes.size());
    for (const auto& symbol : record.phonemes) {
      columns.push_back(table.index_of(symbol));
    }
    const durkit::CtcViterbiResult decoded = durkit::ctc_viterbi_align(
        emissions, columns, table.blank_index, blank_floor, attachment);
    AlignedUtterance utterance;
    utterance.id = record.id;
    utterance.frame_shift_ms = record.frame_shift_ms;
    for (const auto& symbol : record.phonemes) {
      utterance.phonemes.push_back(inventory.id_of(symbol));
    }
    utterance.durations = decoded.durations;
    utterances[i] = std::move(utterance);
  });
  durkit::io::write_alignments(out, utterances, inventory);
  manifest.commit();
}

void run_stats(const std::vector<std::string>& argv, const std::string& in,
               const std::optional<std::string>& ref,
               const std::optional<std::string>& out) {
  ManifestScope manifest("stats", argv);
  manifest.input(in);
  if (ref.has_value()) manifest.input(*ref);
  if (out.has_value()) manifest.output(*out);

  const auto corpus = durkit::io::read_alignment_corpus(in);
  const durkit::DurationStats stats = durkit::summary(corpus.utterances);

  std::string text = "phoneme,count,mean,variance\n";
  for (const auto& [phoneme, entry] : stats.per_phoneme) {
    text += corpus.inventory.symbol(phoneme);
    text += ',' + std::to_string(entry.count);
    text += ',' + format_double(entry.mean);
    text += ',' + format_double(entry.variance);
    text += '\n';
  }
  text += "total_occurrences," + std::to_string(stats.total_occurrences) +
          ",,\n";
  text += "total_frames," + std::to_string(stats.total_frames) + ",,\n";
  text += "total_hours," + format_double(durkit::total_audio_hours(
                               corpus.utterances)) + ",,\n";
  if (ref.has_value()) {
    const auto ref_corpus = durkit::io::read_alignment_corpus(*ref);
    text += "length_ratio_vs_ref," +
            format_double(durkit::corpus_length_ratio(
                corpus.utterances, ref_corpus.utterances)) +
            ",,\n";
  }
  write_text(out, text);
  manifest.commit();
}

void run_kld(const std::vector<std::string>& argv, const std::string& pred,
             const std::string& ref, double epsilon, bool occurrence_weighted,
             const std::optional<std::string>& out) {
  ManifestScope manifest("kld", argv);
  manifest.input(pred);
  manifest.input(ref);
  if (out.has_value()) manifest.output(*out);
  manifest.config("epsilon", epsilon);

  const auto pred_corpus = durkit::io::read_alignment_corpus(pred);
  const auto ref_corpus = durkit::io::read_alignment_corpus(ref);

  // Histograms must share one symbol space.
  std::vector<std::string> observed;
  for (const auto& inv :
       {&pred_corpus.inventory, &ref_corpus.inventory}) {
    for (const auto& symbol : inv->symbols()) observed.push_back(symbol);
  }
  const PhonemeInventory joint = PhonemeInventory::from_observed(observed);
  auto remap = [&](const durkit::io::AlignmentCorpus& corpus) {
    std::vector<AlignedUtterance> remapped = corpus.utterances;
    for (auto& utterance : remapped) {
      for (int& p : utterance.phonemes) {
        p = joint.id_of(corpus.inventory.symbol(p));
      }
    }
    return remapped;
  };
  const auto pred_remapped = remap(pred_corpus);
  const auto ref_remapped = remap(ref_corpus);

  const durkit::KldReport report =
      durkit::kld(durkit::build_histograms(pred_remapped, joint),
                  durkit::build_histograms(ref_remapped, joint), epsilon,
                  occurrence_weighted);

  std::string text = "phoneme,kld\n";
  for (const auto& [phoneme, value] : report.per_phoneme) {
    text += joint.symbol(phoneme) + ',' + format_double(value) + '\n';
  }
  for (int phoneme : report.ref_only) {
    text += joint.symbol(phoneme) + ",ref_only\n";
  }
  for (int phoneme : report.pred_only) {
    text += joint.symbol(phoneme) + ",pred_only\n";
  }
  text += "mean," + format_double(report.mean) + '\n';
  write_text(out, text);
  manifest.commit();
}

void run_hist_export(const std::vector<std::string>& argv,
                     const std::string& in, const std::string& phoneme,
                     const std::optional<std::string>& out) {
  ManifestScope manifest("hist-export", argv);
  manifest.input(in);
  if (out.has_value()) manifest.output(*out);
  manifest.config("phoneme", phoneme);

  const auto corpus = durkit::io::read_alignment_corpus(in);
  const auto histogram =
      durkit::build_histograms(corpus.utterances, corpus.inventory);
  write_text(out,
             durkit::export_histogram_csv(histogram, corpus.inventory, phoneme));
  manifest.commit();
}

void run_modify(const std::vector<std::string>& argv, const std::string& in,
                const std::string& out, const std::string& mode, double alpha,
                const durkit::RandomWalkConfig& walk, int jobs) {
  ManifestScope manifest("modify", argv);
  manifest.input(in);
  manifest.output(out);
  manifest.config("mode", mode);
  manifest.seed(walk.seed);
  if (mode == "constant") {
    manifest.config("alpha", alpha);
  } else {
    manifest.config("sigma", walk.sigma);
    manifest.config("clip_lo", walk.clip_lo);
    manifest.config("clip_hi", walk.clip_hi);
  }
  manifest.config("min_duration", static_cast<long long>(walk.min_duration));

  auto corpus = durkit::io::read_alignment_corpus(in);
  std::vector<AlignedUtterance> modified(corpus.utterances.size());
  durkit::parallel_for(corpus.utterances.size(), jobs, [&](std::size_t i) {
    if (mode == "constant") {
      modified[i] =
          durkit::constant_scale(corpus.utterances[i], alpha, walk.min_duration);
    } else {
      modified[i] = durkit::apply_random_walk(corpus.utterances[i], walk);
    }
  });
  durkit::io::write_alignments(out, modified, corpus.inventory);
  manifest.commit();
}

void run_oracle_sub(const std::vector<std::string>& argv,
                    const std::string& pred, const std::string& ref,
                    const std::string& out) {
  ManifestScope manifest("oracle-sub", argv);
  manifest.input(pred);
  manifest.input(ref);
  manifest.output(out);

  auto pred_corpus = durkit::io::read_alignment_corpus(pred);
  const auto ref_corpus = durkit::io::read_alignment_corpus(ref);
  std::map<std::string, const AlignedUtterance*> by_id;
  for (const auto& utterance : ref_corpus.utterances) {
    by_id[utterance.id] = &utterance;
  }
  std::vector<AlignedUtterance> substituted;
  substituted.reserve(pred_corpus.utterances.size());
  for (const auto& utterance : pred_corpus.utterances) {
    auto it = by_id.find(utterance.id);
    if (it == by_id.end()) {
      durkit::fail("utterance '" + utterance.id + "' missing from reference");
    }
    // Compare by symbol so the two files may order their inventories
    // differently.
    AlignedUtterance reference_local = utterance;
    const AlignedUtterance& reference = *it->second;
    if (reference.phonemes.size() != utterance.phonemes.size()) {
      durkit::fail("utterance '" + utterance.id + "': phoneme sequence mismatch");
    }
    for (std::size_t n = 0; n < reference.phonemes.size(); ++n) {
      if (ref_corpus.inventory.symbol(reference.phonemes[n]) !=
          pred_corpus.inventory.symbol(utterance.phonemes[n])) {
        durkit::fail("utterance '" + utterance.id +
                     "': phoneme sequence mismatch");
      }
    }
    reference_local.durations = reference.durations;
    substituted.push_back(durkit::substitute_oracle(utterance, reference_local));
  }
  durkit::io::write_alignments(out, substituted, pred_corpus.inventory);
  manifest.commit();
}

void run_upsample(const std::vector<std::string>& argv,
                  const std::string& durations_path,
                  const std::string& states_dir, const std::string& out_dir,
                  double sigma_g, int jobs) {
  ManifestScope manifest("upsample", argv);
  manifest.input(durations_path);
  manifest.input(states_dir);
  manifest.output(out_dir);
  manifest.config("sigma_g", sigma_g);

  const auto corpus = durkit::io::read_alignment_corpus(durations_path);
  std::filesystem::create_directories(out_dir);
  durkit::parallel_for(corpus.utterances.size(), jobs, [&](std::size_t i) {
    const auto& utterance = corpus.utterances[i];
    const FeatureMatrix states = durkit::io::read_matrix(
        durkit::io::matrix_path_for(states_dir, utterance.id));
    const auto weights =
        durkit::gaussian_upsample_weights(utterance.durations, sigma_g);
    const FeatureMatrix frames = durkit::upsample_states(states, weights);
    durkit::io::write_matrix(
        std::filesystem::path(out_dir) / (utterance.id + ".fmat"), frames);
  });
  manifest.commit();
}

void run_simulate(const std::vector<std::string>& argv,
                  const std::optional<std::string>& config_path,
                  const std::optional<std::uint64_t>& seed_override,
                  const std::optional<std::string>& out) {
  ManifestScope manifest("simulate", argv);
  if (config_path.has_value()) manifest.input(*config_path);
  if (out.has_value()) manifest.output(*out);

  durkit::SimConfig config = config_path.has_value()
                                 ? durkit::load_sim_config(*config_path)
                                 : durkit::SimConfig{};
  if (seed_override.has_value()) config.seed = *seed_override;
  config.validate();
  manifest.seed(config.seed);

  const durkit::SimCorpus reference = durkit::generate_reference(config);
  const auto predictions = durkit::generate_predictions(reference, config);
  const durkit::SweepReport report =
      durkit::run_sweep(reference, predictions, config);
  write_text(out, report.to_csv());
  manifest.commit();
}

void run_rerun(const std::string& manifest_path) {
  const durkit::RunManifest manifest = durkit::read_manifest(manifest_path);
  if (manifest.argv.empty()) durkit::fail("manifest has no recorded arguments");
  if (manifest.subcommand == "rerun") durkit::fail("refusing to rerun a rerun");
  const int code = dispatch(manifest.argv);
  if (code != 0) durkit::fail("rerun failed with exit code " +
                              std::to_string(code));
}

// ---------------------------------------------------------------------------
// Argument wiring

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{std::string(durkit::kToolName) +
               " - phoneme duration toolkit (aligners, duration "
               "modification, distribution statistics)"};
  app.set_version_flag("--version",
                       std::string(durkit::kToolName) + " " + durkit::kVersion);
  app.require_subcommand(1);

  // Shared option storage. Each subcommand binds the fields it uses.
  HmmCorpusOptions corpus_options;
  durkit::TrainOptions train_options;
  std::string model_path;
  std::string in_path;
  std::string out_path;
  std::string ref_path;
  std::string pred_path;
  std::optional<std::string> opt_out;
  std::optional<std::string> opt_ref;
  std::optional<double> trim_db;
  bool no_optional_silence = false;
  int jobs = 1;

  auto add_corpus_options = [&](CLI::App* cmd) {
    cmd->add_option("--features", corpus_options.features_dir,
                    "Directory with per-utterance matrices (<id>.fmat or <id>.csv)")
        ->required();
    cmd->add_option("--transcripts", corpus_options.transcripts,
                    "JSONL transcripts (durations optional)")
        ->required();
    cmd->add_option("--energy-dim", corpus_options.energy_dim,
                    "Feature column holding the (log) energy");
    cmd->add_option("--trim-db", trim_db,
                    "Trim leading/trailing silence below this dB offset");
    cmd->add_option("--jobs", jobs, "Worker threads");
  };

  // hmm-init / hmm-train
  auto* hmm_init = app.add_subcommand(
      "hmm-init", "Estimate an initial model from linear segmentation");
  add_corpus_options(hmm_init);
  hmm_init->add_option("--out", out_path, "Model file")->required();
  hmm_init->add_option("--silence-db", train_options.silence_threshold_db,
                       "Silence threshold for segmentation (dB, negative)");

  auto* hmm_train =
      app.add_subcommand("hmm-train", "Train the monophone mixture model");
  add_corpus_options(hmm_train);
  hmm_train->add_option("--out", out_path, "Model file")->required();
  hmm_train->add_option("--em-iters", train_options.em_iters,
                        "EM iterations per mixture size");
  hmm_train->add_option("--split-iters", train_options.split_iters,
                        "Mixture doubling rounds");
  hmm_train->add_option("--mixture-cap", train_options.mixture_cap,
                        "Maximum components per state");
  hmm_train->add_option("--seed", train_options.seed, "Random seed");
  hmm_train->add_option("--silence-db", train_options.silence_threshold_db,
                        "Silence threshold for segmentation (dB, negative)");
  hmm_train->add_flag("--no-optional-silence", no_optional_silence,
                      "Make silence mandatory at word boundaries");

  // hmm-align
  auto* hmm_align = app.add_subcommand(
      "hmm-align", "Force-align features against transcripts");
  add_corpus_options(hmm_align);
  hmm_align->add_option("--model", model_path, "Model file")->required();
  hmm_align->add_option("--out", out_path, "Frame alignment JSONL")->required();
  hmm_align->add_flag("--no-optional-silence", no_optional_silence,
                      "Make silence mandatory at word boundaries");

  // durations
  auto* durations =
      app.add_subcommand("durations", "Frame alignments to phoneme durations");
  double frame_shift_ms = durkit::kDefaultFrameShiftMs;
  durations->add_option("--in", in_path, "Frame alignment JSONL")->required();
  durations->add_option("--out", out_path, "Alignment JSONL")->required();
  durations->add_option("--frame-shift-ms", frame_shift_ms, "Frame shift");

  // ctc-align
  auto* ctc_align = app.add_subcommand(
      "ctc-align", "Best-path alignment of emission log-posteriors");
  std::string emissions_dir;
  std::string labels_path;
  std::string blank_symbol = "<blank>";
  std::string attach = "forward";
  double blank_floor = 1e-8;
  ctc_align->add_option("--emissions", emissions_dir,
                        "Directory with per-utterance emission matrices")
      ->required();
  ctc_align->add_option("--transcripts", in_path, "JSONL transcripts")
      ->required();
  ctc_align->add_option("--labels", labels_path,
                        "Emission column labels, one per line")
      ->required();
  ctc_align->add_option("--blank", blank_symbol, "Blank label");
  ctc_align->add_option("--blank-floor", blank_floor,
                        "Blank probability floor in (0, 1]");
  ctc_align->add_option("--attach", attach,
                        "Blank frame attachment: forward or backward")
      ->check(CLI::IsMember({"forward", "backward"}));
  ctc_align->add_option("--out", out_path, "Alignment JSONL")->required();
  ctc_align->add_option("--jobs", jobs, "Worker threads");

  // stats
  auto* stats = app.add_subcommand("stats", "Per-phoneme duration summary");
  stats->add_option("--in", in_path, "Alignment JSONL")->required();
  stats->add_option("--ref", opt_ref, "Second corpus for the length ratio");
  stats->add_option("--out", opt_out, "Output CSV (default stdout)");

  // kld
  auto* kld_cmd =
      app.add_subcommand("kld", "Mean KL divergence of duration histograms");
  double epsilon = 0.5;
  bool occurrence_weighted = false;
  kld_cmd->add_option("--pred", pred_path, "Predicted alignment JSONL")
      ->required();
  kld_cmd->add_option("--ref", ref_path, "Reference alignment JSONL")
      ->required();
  kld_cmd->add_option("--epsilon", epsilon, "Additive smoothing per bin");
  kld_cmd->add_flag("--occurrence-weighted", occurrence_weighted,
                    "Weight the mean by reference occurrence counts");
  kld_cmd->add_option("--out", opt_out, "Output CSV (default stdout)");

  // hist-export
  auto* hist = app.add_subcommand("hist-export",
                                  "Duration histogram of one phoneme as CSV");
  std::string phoneme_symbol;
  hist->add_option("--in", in_path, "Alignment JSONL")->required();
  hist->add_option("--phoneme", phoneme_symbol, "Phoneme symbol")->required();
  hist->add_option("--out", opt_out, "Output CSV (default stdout)");

  // modify
  auto* modify = app.add_subcommand(
      "modify", "Scale durations (constant factor or random walk)");
  std::string mode = "walk";
  double alpha = 1.0;
  durkit::RandomWalkConfig walk;
  modify->add_option("--in", in_path, "Alignment JSONL")->required();
  modify->add_option("--out", out_path, "Alignment JSONL")->required();
  modify->add_option("--mode", mode, "constant or walk")
      ->check(CLI::IsMember({"constant", "walk"}));
  modify->add_option("--alpha", alpha, "Constant scale factor");
  modify->add_option("--sigma", walk.sigma, "Random walk step stddev");
  modify->add_option("--clip-lo", walk.clip_lo, "Lower clip bound");
  modify->add_option("--clip-hi", walk.clip_hi, "Upper clip bound");
  modify->add_option("--seed", walk.seed, "Random seed");
  modify->add_option("--min-duration", walk.min_duration,
                     "Duration floor after rounding");
  modify->add_option("--jobs", jobs, "Worker threads");

  // oracle-sub
  auto* oracle = app.add_subcommand(
      "oracle-sub", "Replace predicted durations by reference ones");
  oracle->add_option("--pred", pred_path, "Predicted alignment JSONL")
      ->required();
  oracle->add_option("--ref", ref_path, "Reference alignment JSONL")
      ->required();
  oracle->add_option("--out", out_path, "Alignment JSONL")->required();

  // upsample
  auto* upsample = app.add_subcommand(
      "upsample", "Expand phoneme vectors to frame vectors");
  std::string states_dir;
  double sigma_g = 1.0;
  upsample->add_option("--durations", in_path, "Alignment JSONL")->required();
  upsample->add_option("--states", states_dir,
                       "Directory with per-utterance N x D matrices")
      ->required();
  upsample->add_option("--out", out_path, "Output directory")->required();
  upsample->add_option("--sigma-g", sigma_g, "Gaussian width in frames");
  upsample->add_option("--jobs", jobs, "Worker threads");

  // simulate
  auto* simulate = app.add_subcommand(
      "simulate", "Planted-distribution sweep over modification settings");
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed_override;
  simulate->add_option("--config", config_path, "Simulation config JSON");
  simulate->add_option("--seed", seed_override,
                       "Seed override (wins over the config file)");
  simulate->add_option("--out", opt_out, "Output CSV (default stdout)");

  // rerun
  auto* rerun =
      app.add_subcommand("rerun", "Re-execute a recorded run manifest");
  std::string manifest_path;
  rerun->add_option("--manifest", manifest_path, "Manifest file")->required();

  // ---- parse ----
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back(durkit::kToolName);
  for (const auto& arg : args) argv.push_back(arg.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  corpus_options.trim_db = trim_db;
  corpus_options.jobs = jobs;
  train_options.jobs = jobs;
  train_options.energy_dim = corpus_options.energy_dim;
  train_options.allow_optional_silence = !no_optional_silence;

  if (hmm_init->parsed()) {
    durkit::TrainOptions init_options = train_options;
    init_options.em_iters = 0;
    init_options.split_iters = 0;
    run_hmm_train(args, corpus_options, init_options, out_path, true);
  } else if (hmm_train->parsed()) {
    run_hmm_train(args, corpus_options, train_options, out_path, false);
  } else if (hmm_align->parsed()) {
    run_hmm_align(args, corpus_options, model_path, out_path,
                  !no_optional_silence);
  } else if (durations->parsed()) {
    run_durations(args, in_path, out_path, frame_shift_ms);
  } else if (ctc_align->parsed()) {
    run_ctc_align(args, emissions_dir, in_path, labels_path, blank_symbol,
                  blank_floor, attach, out_path, jobs);
  } else if (stats->parsed()) {
    run_stats(args, in_path, opt_ref, opt_out);
  } else if (kld_cmd->parsed()) {
    run_kld(args, pred_path, ref_path, epsilon, occurrence_weighted, opt_out);
  } else if (hist->parsed()) {
    run_hist_export(args, in_path, phoneme_symbol, opt_out);
  } else if (modify->parsed()) {
    run_modify(args, in_path, out_path, mode, alpha, walk, jobs);
  } else if (oracle->parsed()) {
    run_oracle_sub(args, pred_path, ref_path, out_path);
  } else if (upsample->parsed()) {
    run_upsample(args, in_path, states_dir, out_path, sigma_g, jobs);
  } else if (simulate->parsed()) {
    run_simulate(args, config_path, seed_override, opt_out);
  } else if (rerun->parsed()) {
    run_rerun(manifest_path);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return dispatch(args);
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
