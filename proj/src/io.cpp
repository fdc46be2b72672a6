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

#include "durkit/io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "durkit/error.hpp"

namespace durkit::io {

namespace {

using nlohmann::json;

[[noreturn]] void fail_at(const std::filesystem::path& path, std::size_t line,
                          const std::string& message) {
  fail(path.string() + ":" + std::to_string(line) + ": " + message);
}

std::ifstream open_input(const std::filesystem::path& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) fail("cannot open for reading: " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) fail("cannot open for writing: " + path.string());
  return out;
}

json parse_line(const std::filesystem::path& path, std::size_t line_no,
                const std::string& line) {
  json parsed = json::parse(line, nullptr, false);
  if (parsed.is_discarded()) fail_at(path, line_no, "malformed JSON");
  if (!parsed.is_object()) fail_at(path, line_no, "expected a JSON object");
  return parsed;
}

bool blank_line(const std::string& line) {
  return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

}  // namespace

std::vector<UtteranceRecord> read_utterance_records(
    const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::vector<UtteranceRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank_line(line)) continue;
    json object = parse_line(path, line_no, line);

    UtteranceRecord record;
    if (!object.contains("id") || !object["id"].is_string()) {
      fail_at(path, line_no, "missing string field \"id\"");
    }
    record.id = object["id"].get<std::string>();

    if (!object.contains("phonemes") || !object["phonemes"].is_array()) {
      fail_at(path, line_no, "missing array field \"phonemes\"");
    }
    for (const auto& item : object["phonemes"]) {
      if (!item.is_string()) {
        fail_at(path, line_no, "\"phonemes\" entries must be strings");
      }
      record.phonemes.push_back(item.get<std::string>());
    }

    if (object.contains("durations")) {
      if (!object["durations"].is_array()) {
        fail_at(path, line_no, "\"durations\" must be an array");
      }
      std::vector<int> durations;
      for (const auto& item : object["durations"]) {
        if (!item.is_number_integer()) {
          fail_at(path, line_no, "\"durations\" entries must be integers");
        }
        durations.push_back(item.get<int>());
      }
      if (durations.size() != record.phonemes.size()) {
        fail_at(path, line_no, "phoneme/duration length mismatch");
      }
      record.durations = std::move(durations);
    }

    if (object.contains("frame_shift_ms")) {
      if (!object["frame_shift_ms"].is_number()) {
        fail_at(path, line_no, "\"frame_shift_ms\" must be a number");
      }
      record.frame_shift_ms = object["frame_shift_ms"].get<double>();
      if (!(record.frame_shift_ms > 0.0)) {
        fail_at(path, line_no, "\"frame_shift_ms\" must be positive");
      }
    }
    records.push_back(std::move(record));
  }
  return records;
}

PhonemeInventory inventory_from_records(
    std::span<const UtteranceRecord> records) {
  std::vector<std::string> observed;
  for (const auto& record : records) {
    observed.insert(observed.end(), record.phonemes.begin(),
                    record.phonemes.end());
  }
  return PhonemeInventory::from_observed(observed);
}

AlignedUtterance to_aligned(const UtteranceRecord& record,
                            const PhonemeInventory& inventory,
                            bool require_durations) {
  AlignedUtterance utterance;
  utterance.id = record.id;
  utterance.frame_shift_ms = record.frame_shift_ms;
  utterance.phonemes.reserve(record.phonemes.size());
  for (const auto& symbol : record.phonemes) {
    utterance.phonemes.push_back(inventory.id_of(symbol));
  }
  if (record.durations.has_value()) {
    utterance.durations = *record.durations;
  } else if (require_durations) {
    fail("utterance '" + record.id + "' has no durations");
  } else {
    utterance.durations.assign(utterance.phonemes.size(), 0);
  }
  validate_utterance(utterance, inventory);
  return utterance;
}

AlignmentCorpus read_alignment_corpus(const std::filesystem::path& path) {
  auto records = read_utterance_records(path);
  AlignmentCorpus corpus{inventory_from_records(records), {}};
  corpus.utterances.reserve(records.size());
  for (const auto& record : records) {
    corpus.utterances.push_back(to_aligned(record, corpus.inventory, true));
  }
  return corpus;
}

std::string alignment_line(const AlignedUtterance& utterance,
                           const PhonemeInventory& inventory) {
  json object;
  object["id"] = utterance.id;
  json phonemes = json::array();
  for (int p : utterance.phonemes) phonemes.push_back(inventory.symbol(p));
  object["phonemes"] = std::move(phonemes);
  object["durations"] = utterance.durations;
  object["frame_shift_ms"] = utterance.frame_shift_ms;
  return object.dump();
}

void write_alignments(const std::filesystem::path& path,
                      std::span<const AlignedUtterance> utterances,
                      const PhonemeInventory& inventory) {
  std::ofstream out = open_output(path);
  for (const auto& utterance : utterances) {
    out << alignment_line(utterance, inventory) << '\n';
  }
  if (!out) fail("write failed: " + path.string());
}

std::vector<FrameAlignmentRecord> read_frame_alignments(
    const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::vector<FrameAlignmentRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank_line(line)) continue;
    json object = parse_line(path, line_no, line);

    FrameAlignmentRecord record;
    if (!object.contains("id") || !object["id"].is_string()) {
      fail_at(path, line_no, "missing string field \"id\"");
    }
    record.id = object["id"].get<std::string>();
    if (!object.contains("frames") || !object["frames"].is_number_integer()) {
      fail_at(path, line_no, "missing integer field \"frames\"");
    }
    record.frames = object["frames"].get<std::int64_t>();
    if (object.contains("frame_shift_ms")) {
      record.frame_shift_ms = object["frame_shift_ms"].get<double>();
    }
    if (!object.contains("segments") || !object["segments"].is_array()) {
      fail_at(path, line_no, "missing array field \"segments\"");
    }
    for (const auto& item : object["segments"]) {
      SegmentRecord segment;
      segment.phoneme = item.at("phoneme").get<std::string>();
      segment.pos = item.at("pos").get<int>();
      segment.start = item.at("start").get<int>();
      segment.frames = item.at("frames").get<int>();
      if (segment.frames < 0) fail_at(path, line_no, "negative segment length");
      record.segments.push_back(std::move(segment));
    }
    records.push_back(std::move(record));
  }
  return records;
}

void write_frame_alignments(const std::filesystem::path& path,
                            std::span<const FrameAlignmentRecord> records) {
  std::ofstream out = open_output(path);
  for (const auto& record : records) {
    json object;
    object["id"] = record.id;
    object["frames"] = record.frames;
    object["frame_shift_ms"] = record.frame_shift_ms;
    json segments = json::array();
    for (const auto& segment : record.segments) {
      segments.push_back({{"phoneme", segment.phoneme},
                          {"pos", segment.pos},
                          {"start", segment.start},
                          {"frames", segment.frames}});
    }
    object["segments"] = std::move(segments);
    out << object.dump() << '\n';
  }
  if (!out) fail("write failed: " + path.string());
}

namespace {

constexpr char kMatrixMagic[4] = {'F', 'M', 'A', 'T'};
constexpr std::uint32_t kMatrixVersion = 1;

std::uint32_t read_u32_le(std::istream& in) {
  unsigned char bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  return static_cast<std::uint32_t>(bytes[0]) |
         (static_cast<std::uint32_t>(bytes[1]) << 8) |
         (static_cast<std::uint32_t>(bytes[2]) << 16) |
         (static_cast<std::uint32_t>(bytes[3]) << 24);
}

void write_u32_le(std::ostream& out, std::uint32_t value) {
  const unsigned char bytes[4] = {
      static_cast<unsigned char>(value & 0xff),
      static_cast<unsigned char>((value >> 8) & 0xff),
      static_cast<unsigned char>((value >> 16) & 0xff),
      static_cast<unsigned char>((value >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

float float_from_le(const unsigned char* bytes) {
  std::uint32_t bits = static_cast<std::uint32_t>(bytes[0]) |
                       (static_cast<std::uint32_t>(bytes[1]) << 8) |
                       (static_cast<std::uint32_t>(bytes[2]) << 16) |
                       (static_cast<std::uint32_t>(bytes[3]) << 24);
  float value;
  std::memcpy(&value, &bits, sizeof(value));
  return value;
}

void float_to_le(float value, unsigned char* bytes) {
  std::uint32_t bits;
  std::memcpy(&bits, &value, sizeof(bits));
  bytes[0] = static_cast<unsigned char>(bits & 0xff);
  bytes[1] = static_cast<unsigned char>((bits >> 8) & 0xff);
  bytes[2] = static_cast<unsigned char>((bits >> 16) & 0xff);
  bytes[3] = static_cast<unsigned char>((bits >> 24) & 0xff);
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank_line(line)) continue;
    std::vector<double> row;
    std::stringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      try {
        row.push_back(std::stod(field));
      } catch (const std::exception&) {
        fail_at(path, line_no, "not a number: '" + field + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      fail_at(path, line_no, "inconsistent column count");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail("matrix file is empty: " + path.string());
  Matrix matrix(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      matrix.at(r, c) = rows[r][c];
    }
  }
  return matrix;
}

}  // namespace

Matrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in = open_input(path, /*binary=*/true);
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMatrixMagic, 4) != 0) {
    return read_matrix_csv(path);
  }
  const std::uint32_t version = read_u32_le(in);
  if (version != kMatrixVersion) {
    fail(path.string() + ": unsupported matrix version " +
         std::to_string(version));
  }
  const std::uint32_t rows = read_u32_le(in);
  const std::uint32_t cols = read_u32_le(in);
  if (!in || rows == 0 || cols == 0) {
    fail(path.string() + ": invalid matrix header");
  }
  Matrix matrix(rows, cols);
  std::vector<unsigned char> buffer(static_cast<std::size_t>(cols) * 4);
  for (std::uint32_t r = 0; r < rows; ++r) {
    in.read(reinterpret_cast<char*>(buffer.data()),
            static_cast<std::streamsize>(buffer.size()));
    if (!in) {
      fail(path.string() + ": truncated at offset " +
           std::to_string(static_cast<std::size_t>(in.gcount())) + " of row " +
           std::to_string(r));
    }
    double* out_row = matrix.row(r);
    for (std::uint32_t c = 0; c < cols; ++c) {
      out_row[c] = static_cast<double>(
          float_from_le(buffer.data() + static_cast<std::size_t>(c) * 4));
    }
  }
  return matrix;
}

void write_matrix(const std::filesystem::path& path, const Matrix& matrix) {
  if (matrix.rows() == 0 || matrix.cols() == 0) {
    fail("refusing to write an empty matrix: " + path.string());
  }
  std::ofstream out = open_output(path, /*binary=*/true);
  out.write(kMatrixMagic, 4);
  write_u32_le(out, kMatrixVersion);
  write_u32_le(out, static_cast<std::uint32_t>(matrix.rows()));
  write_u32_le(out, static_cast<std::uint32_t>(matrix.cols()));
  std::vector<unsigned char> buffer(matrix.cols() * 4);
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    const double* row = matrix.row(r);
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
      float_to_le(static_cast<float>(row[c]), buffer.data() + c * 4);
    }
    out.write(reinterpret_cast<const char*>(buffer.data()),
              static_cast<std::streamsize>(buffer.size()));
  }
  if (!out) fail("write failed: " + path.string());
}

int LabelTable::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return static_cast<int>(i);
  }
  fail("label not present in emission columns: " + std::string(label));
}

LabelTable read_label_table(const std::filesystem::path& path,
                            const std::string& blank_symbol) {
  std::ifstream in = open_input(path);
  LabelTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) {
      line.pop_back();
    }
    if (line.empty()) fail_at(path, line_no, "empty label line");
    if (line == blank_symbol) {
      if (table.blank_index >= 0) fail_at(path, line_no, "duplicate blank label");
      table.blank_index = static_cast<int>(table.labels.size());
    }
    table.labels.push_back(line);
  }
  if (table.labels.empty()) fail("label table is empty: " + path.string());
  if (table.blank_index < 0) {
    fail(path.string() + ": blank label '" + blank_symbol + "' not found");
  }
  return table;
}

std::filesystem::path matrix_path_for(const std::filesystem::path& dir,
                                      const std::string& utterance_id) {
  std::filesystem::path fmat = dir / (utterance_id + ".fmat");
  if (std::filesystem::exists(fmat)) return fmat;
  std::filesystem::path csv = dir / (utterance_id + ".csv");
  if (std::filesystem::exists(csv)) return csv;
  fail("no matrix file for utterance '" + utterance_id + "' under " +
       dir.string());
}

}  // namespace durkit::io
