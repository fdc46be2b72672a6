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

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "durkit/types.hpp"

// File formats.
//
// Alignment files are JSON lines, one utterance per line:
//   {"id": "utt1", "phonemes": ["HH","AH","[space]"],
//    "durations": [5,7,0], "frame_shift_ms": 12.5}
// "durations" may be absent when a file carries transcripts only
// (aligner input). "frame_shift_ms" defaults to 12.5.
//
// Matrix files ("FMAT") are binary: 4 ASCII magic bytes "FMAT",
// u32 little-endian version (1), u32 rows, u32 cols, then rows*cols
// float32 little-endian values in row-major order. Files that do not
// start with the magic are parsed as CSV (one row per line).
//
// Frame-alignment files (aligner output, input to `durations`) are
// JSON lines with per-transcript-position segments:
//   {"id": "utt1", "frames": 120, "frame_shift_ms": 12.5,
//    "segments": [{"phoneme": "[space]", "pos": 0, "start": 0,
//                  "frames": 4}, ...]}
// Skipped optional silence appears as a zero-frame segment.

namespace durkit::io {

struct UtteranceRecord {
  std::string id;
  std::vector<std::string> phonemes;
  std::optional<std::vector<int>> durations;
  double frame_shift_ms = kDefaultFrameShiftMs;
};

std::vector<UtteranceRecord> read_utterance_records(
    const std::filesystem::path& path);

// Inventory from the symbols observed across records (plus the space
// token), with stable sorted ids.
PhonemeInventory inventory_from_records(std::span<const UtteranceRecord> records);

AlignedUtterance to_aligned(const UtteranceRecord& record,
                            const PhonemeInventory& inventory,
                            bool require_durations = true);

// Reads a full alignment corpus (durations required), validating every
// utterance against the returned inventory.
struct AlignmentCorpus {
  PhonemeInventory inventory;
  std::vector<AlignedUtterance> utterances;
};
AlignmentCorpus read_alignment_corpus(const std::filesystem::path& path);

std::string alignment_line(const AlignedUtterance& utterance,
                           const PhonemeInventory& inventory);
void write_alignments(const std::filesystem::path& path,
                      std::span<const AlignedUtterance> utterances,
                      const PhonemeInventory& inventory);

struct SegmentRecord {
  std::string phoneme;
  int pos = 0;     // transcript position
  int start = 0;   // first frame
  int frames = 0;  // 0 for skipped optional silence
};

struct FrameAlignmentRecord {
  std::string id;
  std::int64_t frames = 0;
  double frame_shift_ms = kDefaultFrameShiftMs;
  std::vector<SegmentRecord> segments;
};

std::vector<FrameAlignmentRecord> read_frame_alignments(
    const std::filesystem::path& path);
void write_frame_alignments(const std::filesystem::path& path,
                            std::span<const FrameAlignmentRecord> records);

Matrix read_matrix(const std::filesystem::path& path);
void write_matrix(const std::filesystem::path& path, const Matrix& matrix);

// Emission-column label table for CTC: plain text, one label per line,
// line i names column i. Exactly one line must equal `blank_symbol`.
struct LabelTable {
  std::vector<std::string> labels;
  int blank_index = -1;

  int index_of(std::string_view label) const;  // throws on unknown label
};
LabelTable read_label_table(const std::filesystem::path& path,
                            const std::string& blank_symbol);

// Locates per-utterance matrix files under `dir`: "<id>.fmat" first,
// then "<id>.csv". Throws when neither exists.
std::filesystem::path matrix_path_for(const std::filesystem::path& dir,
                                      const std::string& utterance_id);

}  // namespace durkit::io
