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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "durkit/error.hpp"
#include "durkit/io.hpp"
#include "durkit/rng.hpp"
#include "durkit/types.hpp"

using namespace durkit;

namespace {

PhonemeInventory test_inventory() {
  return PhonemeInventory::from_observed({"AH", "B", "K"});
}

AlignedUtterance utt(std::string id, std::vector<int> phonemes,
                     std::vector<int> durations, double shift = 12.5) {
  return AlignedUtterance{std::move(id), std::move(phonemes),
                          std::move(durations), shift};
}

std::filesystem::path temp_file(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "durkit_core_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("inventory ids are dense, stable and unique") {
  const auto inv = test_inventory();
  CHECK(inv.size() == 4);  // three phonemes + the space token
  CHECK(inv.id_of("AH") == inv.id_of("AH"));
  CHECK(inv.symbol(inv.id_of("B")) == "B");
  CHECK(inv.is_space(inv.space_id()));
  CHECK(inv.silence_id() == inv.space_id());
  CHECK_THROWS_AS(inv.id_of("ZZ"), DataError);
  CHECK_THROWS_AS(
      PhonemeInventory::create({"A", "A", "[space]"}), DataError);
  CHECK_THROWS_AS(PhonemeInventory::create({"A", "B"}), DataError);
}

TEST_CASE("validate_utterance accepts a minimal utterance") {
  const auto inv = test_inventory();
  const auto u = utt("u", {inv.id_of("AH")}, {3});
  CHECK(&validate_utterance(u, inv) == &u);
  // idempotent
  CHECK_NOTHROW(validate_utterance(validate_utterance(u, inv), inv));
}

TEST_CASE("validate_utterance rejects malformed utterances") {
  const auto inv = test_inventory();
  CHECK_THROWS_AS(validate_utterance(utt("u", {0}, {3, 1}), inv), DataError);
  CHECK_THROWS_AS(validate_utterance(utt("u", {0}, {-1}), inv), DataError);
  CHECK_THROWS_AS(validate_utterance(utt("u", {99}, {3}), inv), DataError);
  CHECK_THROWS_AS(validate_utterance(utt("u", {0}, {3}, 0.0), inv), DataError);
  // zero durations are fine anywhere at this level
  CHECK_NOTHROW(validate_utterance(utt("u", {0, 1}, {0, 0}), inv));
}

TEST_CASE("total_audio_hours matches the frame arithmetic") {
  std::vector<AlignedUtterance> corpus;
  corpus.push_back(utt("a", {0}, {288000}));
  CHECK(total_audio_hours(corpus) == doctest::Approx(1.0).epsilon(1e-12));

  corpus.clear();
  CHECK(total_audio_hours(corpus) == 0.0);

  corpus.push_back(utt("a", {0}, {144000}));
  corpus.push_back(utt("b", {0}, {144000}));
  CHECK(total_audio_hours(corpus) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("total_audio_hours is additive and linear in frame shift") {
  Rng rng(7);
  std::vector<AlignedUtterance> part_a;
  std::vector<AlignedUtterance> part_b;
  for (int i = 0; i < 20; ++i) {
    auto u = utt("u" + std::to_string(i), {0},
                 {static_cast<int>(rng.below(5000))});
    (i % 2 == 0 ? part_a : part_b).push_back(u);
  }
  std::vector<AlignedUtterance> all = part_a;
  all.insert(all.end(), part_b.begin(), part_b.end());
  CHECK(total_audio_hours(all) ==
        doctest::Approx(total_audio_hours(part_a) + total_audio_hours(part_b))
            .epsilon(1e-12));

  std::vector<AlignedUtterance> doubled = all;
  for (auto& u : doubled) u.frame_shift_ms *= 2.0;
  CHECK(total_audio_hours(doubled) ==
        doctest::Approx(2.0 * total_audio_hours(all)).epsilon(1e-12));
}

TEST_CASE("emission validation checks row normalization") {
  EmissionMatrix ok(2, 2, std::log(0.5));
  CHECK_NOTHROW(validate_emissions(ok));

  EmissionMatrix bad(1, 2, std::log(0.7));
  CHECK_THROWS_AS(validate_emissions(bad), DataError);

  EmissionMatrix nan_matrix(1, 2, std::log(0.5));
  nan_matrix.at(0, 1) = std::nan("");
  CHECK_THROWS_AS(validate_emissions(nan_matrix), DataError);
}

TEST_CASE("duration histogram counts and merges") {
  DurationHistogram h;
  h.add(0, 3);
  h.add(0, 3);
  h.add(1, 5);
  CHECK(h.occurrences(0) == 2);
  CHECK(h.counts_for(0)->at(3) == 2);

  DurationHistogram other;
  other.add(0, 3);
  other.add(2, 1);
  h.merge(other);
  CHECK(h.counts_for(0)->at(3) == 3);
  CHECK(h.occurrences(2) == 1);
}

TEST_CASE("alignment JSONL round trips") {
  const auto path = temp_file("roundtrip.jsonl");
  const auto inv = test_inventory();
  Rng rng(11);
  std::vector<AlignedUtterance> corpus;
  for (int i = 0; i < 25; ++i) {
    AlignedUtterance u;
    u.id = "utt-" + std::to_string(i);
    const int n = 1 + static_cast<int>(rng.below(12));
    for (int k = 0; k < n; ++k) {
      u.phonemes.push_back(static_cast<int>(rng.below(inv.size())));
      u.durations.push_back(static_cast<int>(rng.below(30)));
    }
    corpus.push_back(std::move(u));
  }
  io::write_alignments(path, corpus, inv);
  const auto loaded = io::read_alignment_corpus(path);
  REQUIRE(loaded.utterances.size() == corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CHECK(loaded.utterances[i].id == corpus[i].id);
    CHECK(loaded.utterances[i].durations == corpus[i].durations);
    CHECK(loaded.utterances[i].frame_shift_ms == corpus[i].frame_shift_ms);
    for (std::size_t n = 0; n < corpus[i].phonemes.size(); ++n) {
      CHECK(loaded.inventory.symbol(loaded.utterances[i].phonemes[n]) ==
            inv.symbol(corpus[i].phonemes[n]));
    }
  }
}

TEST_CASE("malformed JSONL reports the line number") {
  const auto path = temp_file("broken.jsonl");
  {
    std::ofstream out(path);
    out << R"({"id":"a","phonemes":["AH"],"durations":[3]})" << '\n';
    out << "this is not json" << '\n';
  }
  try {
    io::read_utterance_records(path);
    FAIL("expected a parse error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
}

TEST_CASE("transcript records may omit durations") {
  const auto path = temp_file("transcripts.jsonl");
  {
    std::ofstream out(path);
    out << R"({"id":"a","phonemes":["AH","B"]})" << '\n';
  }
  const auto records = io::read_utterance_records(path);
  REQUIRE(records.size() == 1);
  CHECK_FALSE(records[0].durations.has_value());
  const auto inv = io::inventory_from_records(records);
  CHECK_THROWS_AS(io::to_aligned(records[0], inv, true), DataError);
  const auto transcript = io::to_aligned(records[0], inv, false);
  CHECK(transcript.durations == std::vector<int>{0, 0});
}

TEST_CASE("matrix files round trip through FMAT") {
  const auto path = temp_file("matrix.fmat");
  Rng rng(3);
  Matrix m(7, 5);
  for (auto& v : m.data()) v = rng.gaussian() * 10.0;
  io::write_matrix(path, m);
  const Matrix loaded = io::read_matrix(path);
  REQUIRE(loaded.rows() == m.rows());
  REQUIRE(loaded.cols() == m.cols());
  for (std::size_t i = 0; i < m.data().size(); ++i) {
    // float32 storage: exact for values that fit a float
    CHECK(loaded.data()[i] ==
          static_cast<double>(static_cast<float>(m.data()[i])));
  }
}

TEST_CASE("matrix reader falls back to CSV") {
  const auto path = temp_file("matrix.csv");
  {
    std::ofstream out(path);
    out << "1.0,2.0\n3.5,-4.25\n";
  }
  const Matrix m = io::read_matrix(path);
  REQUIRE(m.rows() == 2);
  REQUIRE(m.cols() == 2);
  CHECK(m.at(1, 1) == -4.25);

  const auto bad = temp_file("bad.csv");
  {
    std::ofstream out(bad);
    out << "1.0,2.0\n3.5\n";
  }
  CHECK_THROWS_AS(io::read_matrix(bad), DataError);
}

TEST_CASE("truncated FMAT files are rejected with an offset") {
  const auto path = temp_file("trunc.fmat");
  {
    std::ofstream out(path, std::ios::binary);
    out << "FMAT";
    const unsigned char header[12] = {1, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0};
    out.write(reinterpret_cast<const char*>(header), 12);
    const float one = 1.0f;
    out.write(reinterpret_cast<const char*>(&one), 4);  // 1 of 4 values
  }
  CHECK_THROWS_AS(io::read_matrix(path), DataError);
}

TEST_CASE("label tables carry the blank index") {
  const auto path = temp_file("labels.txt");
  {
    std::ofstream out(path);
    out << "<blank>\nAH\nB\n";
  }
  const auto table = io::read_label_table(path, "<blank>");
  CHECK(table.blank_index == 0);
  CHECK(table.index_of("B") == 2);
  CHECK_THROWS_AS(table.index_of("ZZ"), DataError);
  CHECK_THROWS_AS(io::read_label_table(path, "<other>"), DataError);
}
