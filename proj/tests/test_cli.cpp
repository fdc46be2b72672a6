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

#include <filesystem>
#include <string>

#include "durkit/io.hpp"
#include "durkit/rng.hpp"
#include "durkit/types.hpp"
#include "cli_helpers.hpp"

using namespace durkit;
using namespace durkit::testing;

namespace {

// A small alignment corpus written through the library, so CLI output
// can be byte-compared against round trips.
std::filesystem::path make_alignments(const std::filesystem::path& dir,
                                      const std::string& name,
                                      std::uint64_t seed) {
  const auto inv = PhonemeInventory::from_observed({"AH", "B", "SH"});
  Rng rng(seed);
  std::vector<AlignedUtterance> corpus;
  for (int i = 0; i < 20; ++i) {
    AlignedUtterance u;
    u.id = "utt-" + std::to_string(i);
    for (int k = 0; k < 12; ++k) {
      u.phonemes.push_back(static_cast<int>(rng.below(inv.size())));
      u.durations.push_back(1 + static_cast<int>(rng.below(15)));
    }
    corpus.push_back(std::move(u));
  }
  const auto path = dir / name;
  io::write_alignments(path, corpus, inv);
  return path;
}

}  // namespace

TEST_CASE("usage errors exit with code 1") {
  CHECK(run_cli("no-such-command").exit_code == 1);
  CHECK(run_cli("modify").exit_code == 1);  // missing required options
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("--version").output.find("durkit") != std::string::npos);
}

TEST_CASE("data errors exit with code 2") {
  const auto dir = fresh_dir("durkit_cli_err");
  CHECK(run_cli("stats --in " + (dir / "missing.jsonl").string()).exit_code ==
        2);
  write_file(dir / "bad.jsonl", "not json\n");
  CHECK(run_cli("stats --in " + (dir / "bad.jsonl").string()).exit_code == 2);
}

TEST_CASE("modify with sigma 0 reproduces its input bytes") {
  const auto dir = fresh_dir("durkit_cli_modify");
  const auto input = make_alignments(dir, "in.jsonl", 5);
  const auto output = dir / "out.jsonl";
  const auto result =
      run_cli("modify --mode walk --sigma 0 --seed 3 --in " + input.string() +
              " --out " + output.string());
  REQUIRE(result.exit_code == 0);
  CHECK(read_file(output) == read_file(input));
  // the run manifest is written alongside
  CHECK(std::filesystem::exists(dir / "out.jsonl.manifest.json"));
}

TEST_CASE("modify constant alpha=1 is the identity") {
  const auto dir = fresh_dir("durkit_cli_const");
  const auto input = make_alignments(dir, "in.jsonl", 6);
  const auto output = dir / "out.jsonl";
  REQUIRE(run_cli("modify --mode constant --alpha 1.0 --in " + input.string() +
                  " --out " + output.string())
              .exit_code == 0);
  CHECK(read_file(output) == read_file(input));
}

TEST_CASE("kld of a corpus against itself is zero") {
  const auto dir = fresh_dir("durkit_cli_kld");
  const auto input = make_alignments(dir, "a.jsonl", 7);
  const auto result = run_cli("kld --pred " + input.string() + " --ref " +
                              input.string());
  REQUIRE(result.exit_code == 0);
  CHECK(result.output.find("mean,0.000000") != std::string::npos);

  const auto weighted = run_cli("kld --occurrence-weighted --pred " +
                                input.string() + " --ref " + input.string());
  REQUIRE(weighted.exit_code == 0);
  CHECK(weighted.output.find("mean,0.000000") != std::string::npos);
}

TEST_CASE("oracle-sub copies reference durations") {
  const auto dir = fresh_dir("durkit_cli_oracle");
  const auto pred = make_alignments(dir, "pred.jsonl", 8);
  // same sequences, different durations: scale by 2 via modify
  const auto ref = dir / "ref.jsonl";
  REQUIRE(run_cli("modify --mode constant --alpha 2.0 --in " + pred.string() +
                  " --out " + ref.string())
              .exit_code == 0);
  const auto out = dir / "subst.jsonl";
  REQUIRE(run_cli("oracle-sub --pred " + pred.string() + " --ref " +
                  ref.string() + " --out " + out.string())
              .exit_code == 0);
  CHECK(read_file(out) == read_file(ref));

  const auto kld_result =
      run_cli("kld --pred " + out.string() + " --ref " + ref.string());
  CHECK(kld_result.output.find("mean,0.000000") != std::string::npos);
}

TEST_CASE("hist-export prints sorted duration counts") {
  const auto dir = fresh_dir("durkit_cli_hist");
  write_file(dir / "a.jsonl",
             R"({"id":"u1","phonemes":["SH","SH","AH"],"durations":[3,5,2]})"
             "\n");
  const auto result =
      run_cli("hist-export --in " + (dir / "a.jsonl").string() +
              " --phoneme SH");
  REQUIRE(result.exit_code == 0);
  CHECK(result.output == "duration,count\n3,1\n5,1\n");

  CHECK(run_cli("hist-export --in " + (dir / "a.jsonl").string() +
                " --phoneme ZZ")
            .exit_code == 2);
}

TEST_CASE("stats reports totals and the ratio against a reference") {
  const auto dir = fresh_dir("durkit_cli_stats");
  write_file(dir / "a.jsonl",
             R"({"id":"u1","phonemes":["AH","AH"],"durations":[4,4]})" "\n");
  write_file(dir / "b.jsonl",
             R"({"id":"u1","phonemes":["AH","AH"],"durations":[2,2]})" "\n");
  const auto result = run_cli("stats --in " + (dir / "a.jsonl").string() +
                              " --ref " + (dir / "b.jsonl").string());
  REQUIRE(result.exit_code == 0);
  CHECK(result.output.find("AH,2,4.000000,0.000000") != std::string::npos);
  CHECK(result.output.find("total_frames,8") != std::string::npos);
  CHECK(result.output.find("length_ratio_vs_ref,2.000000") !=
        std::string::npos);
}

TEST_CASE("upsample writes frame-level matrices") {
  const auto dir = fresh_dir("durkit_cli_upsample");
  write_file(dir / "durs.jsonl",
             R"({"id":"u1","phonemes":["AH","B"],"durations":[2,3]})" "\n");
  const auto states_dir = dir / "states";
  std::filesystem::create_directories(states_dir);
  Matrix states(2, 4);
  Rng rng(3);
  for (auto& v : states.data()) v = rng.gaussian();
  io::write_matrix(states_dir / "u1.fmat", states);

  const auto out_dir = dir / "frames";
  REQUIRE(run_cli("upsample --durations " + (dir / "durs.jsonl").string() +
                  " --states " + states_dir.string() + " --out " +
                  out_dir.string())
              .exit_code == 0);
  const Matrix frames = io::read_matrix(out_dir / "u1.fmat");
  CHECK(frames.rows() == 5);
  CHECK(frames.cols() == 4);
}

TEST_CASE("simulate emits one row per setting plus baseline and oracle") {
  const auto dir = fresh_dir("durkit_cli_sim");
  write_file(dir / "config.json",
             R"({"phonemes": 4, "utterances": 30, "utterance_length": 10,
                 "seed": 5, "sweep": {"sigmas": [0.0, 0.05],
                                      "alphas": [1.0]}})");
  const auto result =
      run_cli("simulate --config " + (dir / "config.json").string());
  REQUIRE(result.exit_code == 0);
  std::size_t lines = 0;
  for (char c : result.output) lines += c == '\n';
  CHECK(lines == 1 + 1 + 1 + 2 + 1);  // header, none, alpha, sigmas, oracle
  CHECK(result.output.find("mode,parameter,data_hours,length_ratio,mean_kld") ==
        0);

  // seed flag wins over the config file
  const auto a = run_cli("simulate --config " + (dir / "config.json").string() +
                         " --seed 11");
  const auto b = run_cli("simulate --config " + (dir / "config.json").string() +
                         " --seed 11");
  const auto c = run_cli("simulate --config " + (dir / "config.json").string() +
                         " --seed 12");
  CHECK(a.output == b.output);
  CHECK(a.output != c.output);
}

TEST_CASE("ctc-align through files") {
  const auto dir = fresh_dir("durkit_cli_ctc");
  write_file(dir / "labels.txt", "<blank>\nAH\nB\n[space]\n");
  write_file(dir / "transcripts.jsonl",
             R"({"id":"u1","phonemes":["AH","[space]","B"]})" "\n");
  const auto emissions_dir = dir / "emissions";
  std::filesystem::create_directories(emissions_dir);
  Rng rng(23);
  Matrix emissions(12, 4);
  for (std::size_t t = 0; t < emissions.rows(); ++t) {
    double norm = 0.0;
    std::vector<double> raw(4);
    for (auto& v : raw) {
      v = 0.05 + rng.uniform();
      norm += v;
    }
    for (std::size_t s = 0; s < 4; ++s) {
      emissions.at(t, s) = std::log(raw[s] / norm);
    }
  }
  io::write_matrix(emissions_dir / "u1.fmat", emissions);

  const auto out = dir / "ali.jsonl";
  const auto result =
      run_cli("ctc-align --emissions " + emissions_dir.string() +
              " --transcripts " + (dir / "transcripts.jsonl").string() +
              " --labels " + (dir / "labels.txt").string() + " --out " +
              out.string());
  REQUIRE(result.exit_code == 0);
  const auto corpus = io::read_alignment_corpus(out);
  REQUIRE(corpus.utterances.size() == 1);
  const auto& utterance = corpus.utterances.front();
  CHECK(utterance.total_frames() == 12);
  for (int d : utterance.durations) CHECK(d >= 1);  // spaces included
}

TEST_CASE("hmm-init then hmm-align runs the file pipeline") {
  const auto dir = fresh_dir("durkit_cli_hmm");
  // two utterances, one phoneme each, energy in column 0
  const auto features_dir = dir / "features";
  std::filesystem::create_directories(features_dir);
  Rng rng(31);
  for (const std::string id : {"u1", "u2"}) {
    Matrix f(14, 2);
    for (std::size_t t = 0; t < f.rows(); ++t) {
      f.at(t, 0) = -2.0 + rng.uniform();
      f.at(t, 1) = 5.0 + rng.gaussian();
    }
    io::write_matrix(features_dir / (id + ".fmat"), f);
  }
  write_file(dir / "transcripts.jsonl",
             R"({"id":"u1","phonemes":["AA"]})" "\n"
             R"({"id":"u2","phonemes":["AA"]})" "\n");

  REQUIRE(run_cli("hmm-init --features " + features_dir.string() +
                  " --transcripts " + (dir / "transcripts.jsonl").string() +
                  " --out " + (dir / "model.json").string())
              .exit_code == 0);
  REQUIRE(run_cli("hmm-align --model " + (dir / "model.json").string() +
                  " --features " + features_dir.string() + " --transcripts " +
                  (dir / "transcripts.jsonl").string() + " --out " +
                  (dir / "frames.jsonl").string())
              .exit_code == 0);
  REQUIRE(run_cli("durations --in " + (dir / "frames.jsonl").string() +
                  " --out " + (dir / "durations.jsonl").string())
              .exit_code == 0);
  const auto corpus = io::read_alignment_corpus(dir / "durations.jsonl");
  REQUIRE(corpus.utterances.size() == 2);
  for (const auto& utterance : corpus.utterances) {
    CHECK(utterance.total_frames() == 14);
    CHECK(utterance.durations.front() >= 3);
  }
}

TEST_CASE("durations validates and orders segments") {
  const auto dir = fresh_dir("durkit_cli_durations");
  // segments given out of order; one zero-frame space
  write_file(dir / "frames.jsonl",
             R"({"id":"u1","frames":9,"segments":[)"
             R"({"phoneme":"B","pos":2,"start":5,"frames":4},)"
             R"({"phoneme":"AH","pos":0,"start":0,"frames":5},)"
             R"({"phoneme":"[space]","pos":1,"start":5,"frames":0}]})"
             "\n");
  const auto out = dir / "durations.jsonl";
  REQUIRE(run_cli("durations --in " + (dir / "frames.jsonl").string() +
                  " --out " + out.string())
              .exit_code == 0);
  const auto corpus = io::read_alignment_corpus(out);
  REQUIRE(corpus.utterances.size() == 1);
  CHECK(corpus.utterances[0].durations == std::vector<int>{5, 0, 4});
  CHECK(corpus.inventory.symbol(corpus.utterances[0].phonemes[1]) ==
        "[space]");

  // duplicated position is rejected
  write_file(dir / "dup.jsonl",
             R"({"id":"u1","frames":4,"segments":[)"
             R"({"phoneme":"B","pos":0,"start":0,"frames":2},)"
             R"({"phoneme":"AH","pos":0,"start":2,"frames":2}]})"
             "\n");
  CHECK(run_cli("durations --in " + (dir / "dup.jsonl").string() + " --out " +
                (dir / "x.jsonl").string())
            .exit_code == 2);
}

TEST_CASE("rerun reproduces a recorded manifest") {
  const auto dir = fresh_dir("durkit_cli_rerun");
  const auto input = make_alignments(dir, "in.jsonl", 12);
  const auto output = dir / "out.jsonl";
  REQUIRE(run_cli("modify --mode walk --sigma 0.05 --seed 17 --in " +
                  input.string() + " --out " + output.string())
              .exit_code == 0);
  const std::string first = read_file(output);
  std::filesystem::remove(output);
  REQUIRE(run_cli("rerun --manifest " + output.string() + ".manifest.json")
              .exit_code == 0);
  CHECK(read_file(output) == first);
}
