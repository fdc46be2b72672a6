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

// End-to-end acceptance suite. Each criterion prints one PASS/FAIL
// line; the binary exits non-zero if any criterion fails. Criterion 11
// drives the CLI binary named by the DURKIT_CLI environment variable.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "durkit/ctc.hpp"
#include "durkit/durmod.hpp"
#include "durkit/hmm.hpp"
#include "durkit/io.hpp"
#include "durkit/rng.hpp"
#include "durkit/sim.hpp"
#include "durkit/stats.hpp"
#include "durkit/upsample.hpp"
#include "cli_helpers.hpp"
#include "oracles.hpp"

using namespace durkit;
using durkit::testing::CliResult;
using durkit::testing::enumerate_ctc;
using durkit::testing::fresh_dir;
using durkit::testing::make_planted_corpus;
using durkit::testing::read_file;
using durkit::testing::run_cli;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void expect(bool condition, const std::string& message) {
    if (!condition && ok) {
      ok = false;
      detail = message;
    }
  }
};

int g_failures = 0;

void criterion(int number, const std::string& title, double budget_seconds,
               const std::function<void(Check&)>& body) {
  Check check;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(check);
  } catch (const std::exception& e) {
    check.expect(false, std::string("exception: ") + e.what());
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  check.expect(elapsed < budget_seconds,
               "runtime " + std::to_string(elapsed) + "s exceeds " +
                   std::to_string(budget_seconds) + "s");
  std::printf("[%s] criterion %2d: %s (%.2fs)%s%s\n",
              check.ok ? "PASS" : "FAIL", number, title.c_str(), elapsed,
              check.ok ? "" : " -- ", check.ok ? "" : check.detail.c_str());
  std::fflush(stdout);
  if (!check.ok) ++g_failures;
}

AlignedUtterance random_utterance(Rng& rng, const std::string& id,
                                  std::size_t n) {
  AlignedUtterance u;
  u.id = id;
  for (std::size_t k = 0; k < n; ++k) {
    u.phonemes.push_back(static_cast<int>(rng.below(40)));
    u.durations.push_back(static_cast<int>(rng.below(25)));
  }
  return u;
}

EmissionMatrix random_emissions(Rng& rng, std::size_t frames,
                                std::size_t symbols) {
  EmissionMatrix e(frames, symbols);
  for (std::size_t t = 0; t < frames; ++t) {
    double norm = 0.0;
    std::vector<double> raw(symbols);
    for (auto& v : raw) {
      v = 0.05 + rng.uniform();
      norm += v;
    }
    for (std::size_t s = 0; s < symbols; ++s) {
      e.at(t, s) = std::log(raw[s] / norm);
    }
  }
  return e;
}

// ---------------------------------------------------------------------------

void criterion_1_walk_identity(Check& check) {
  Rng rng(11);
  RandomWalkConfig cfg;
  cfg.sigma = 0.0;
  cfg.seed = 42;
  for (int i = 0; i < 1000; ++i) {
    const auto u = random_utterance(rng, "utt-" + std::to_string(i),
                                    1 + rng.below(40));
    const auto modified = apply_random_walk(u, cfg);
    check.expect(modified.durations == u.durations,
                 "sigma=0 changed durations of " + u.id);
  }
  for (std::size_t n : {1u, 2u, 10u, 1000u}) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Rng walk_rng(derive_seed(seed, n));
      const auto centered =
          center_walk(random_walk_steps(n, 0.05, walk_rng));
      double mean = 0.0;
      for (double a : centered) mean += a;
      mean /= static_cast<double>(centered.size());
      check.expect(std::abs(mean - 1.0) < 1e-9,
                   "pre-clip mean off at n=" + std::to_string(n));
    }
  }
}

void criterion_2_clip_asymmetry(Check& check) {
  RandomWalkConfig cfg;
  cfg.sigma = 5.0;
  cfg.seed = 7;
  double total = 0.0;
  std::size_t count = 0;
  for (int walk = 0; walk < 1000; ++walk) {
    cfg.seed = derive_seed(7, static_cast<std::uint64_t>(walk));
    const auto scales = random_walk_scales(100, cfg);
    for (double a : scales.alphas) {
      total += a;
      ++count;
    }
  }
  const double mean = total / static_cast<double>(count);
  check.expect(count == 100000, "wrong sample count");
  check.expect(std::abs(mean - 1.05) <= 0.01,
               "post-clip mean " + std::to_string(mean) + " not 1.05 +- 0.01");
}

void criterion_3_ctc_oracle(Check& check) {
  Rng rng(1234);
  int feasible = 0;
  while (feasible < 1000) {
    const std::size_t symbols = 2 + rng.below(3);
    const std::size_t frames = 1 + rng.below(6);
    const int blank = static_cast<int>(rng.below(symbols));
    const std::size_t n = rng.below(4);
    std::vector<int> labels;
    while (labels.size() < n) {
      const int label = static_cast<int>(rng.below(symbols));
      if (label != blank) labels.push_back(label);
    }
    const auto lattice = CtcLattice::build(labels, blank);
    if (frames < lattice.min_frames()) continue;
    const EmissionMatrix e = random_emissions(rng, frames, symbols);

    const auto oracle = enumerate_ctc(e, labels, blank);
    const double forward = ctc_forward_logprob(e, labels, blank);
    check.expect(std::abs(forward - oracle.forward_log_prob) < 1e-6,
                 "forward mismatch vs enumeration");

    if (!labels.empty()) {
      const double floor = 1e-4;
      const auto result = ctc_viterbi_align(e, labels, blank, floor);
      const auto floored_oracle =
          enumerate_ctc(floor_blank(e, blank, floor), labels, blank);
      check.expect(result.path_log_prob == floored_oracle.best_log_prob,
                   "viterbi score not exactly the enumerated max");
    }
    ++feasible;
  }
}

void criterion_4_ctc_durations(Check& check) {
  Rng rng(555);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t symbols = 3 + rng.below(4);
    const std::size_t frames = 4 + rng.below(20);
    const int blank = 0;
    const int space_column = 1;  // stands in for the word-boundary token
    std::vector<int> labels;
    const std::size_t n = 1 + rng.below(5);
    for (std::size_t k = 0; k < n; ++k) {
      if (k > 0 && rng.uniform() < 0.3) labels.push_back(space_column);
      labels.push_back(2 + static_cast<int>(rng.below(symbols - 2)));
    }
    const auto lattice = CtcLattice::build(labels, blank);
    if (frames < lattice.min_frames()) continue;
    const EmissionMatrix e = random_emissions(rng, frames, symbols);
    const auto result = ctc_viterbi_align(e, labels, blank);
    check.expect(result.durations.size() == labels.size(), "length mismatch");
    const int total = std::accumulate(result.durations.begin(),
                                      result.durations.end(), 0);
    check.expect(total == static_cast<int>(frames),
                 "durations do not sum to T");
    for (int d : result.durations) {
      check.expect(d >= 1, "duration below 1 in a CTC alignment");
    }
  }
}

testing::PlantedCorpus g_planted = make_planted_corpus(40, 20240);
TrainResult g_trained{HmmModel(g_planted.inventory, 2), {}};

void criterion_5_hmm_recovery(Check& check) {
  TrainOptions options;
  options.em_iters = 10;
  options.split_iters = 0;
  options.jobs = 2;
  g_trained = train_monophone(g_planted.utterances, g_planted.inventory,
                              options);

  double previous = -1e300;
  for (const auto& entry : g_trained.log) {
    check.expect(entry.per_frame_log_prob >= previous - 1e-6,
                 "EM objective decreased");
    previous = entry.per_frame_log_prob;
  }

  std::size_t correct = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < g_planted.utterances.size(); ++i) {
    const auto alignment = viterbi_align(
        g_trained.model, g_planted.utterances[i].features,
        g_planted.utterances[i].phonemes, true);
    for (std::size_t t = 0; t < alignment.frame_states.size(); ++t) {
      correct += alignment.frame_states[t] == g_planted.planted_states[i][t];
      ++total;
    }
  }
  const double accuracy =
      static_cast<double>(correct) / static_cast<double>(total);
  check.expect(accuracy >= 0.95, "frame accuracy " + std::to_string(accuracy) +
                                     " below 0.95");
}

void criterion_6_hmm_topology(Check& check) {
  bool saw_zero_space = false;
  for (const auto& utterance : g_planted.utterances) {
    const auto alignment = viterbi_align(g_trained.model, utterance.features,
                                         utterance.phonemes, true);
    const auto durations = extract_durations(alignment, g_planted.inventory);
    check.expect(durations.total_frames() ==
                     static_cast<std::int64_t>(utterance.features.rows()),
                 "durations do not tile the utterance");
    for (std::size_t n = 0; n < durations.phonemes.size(); ++n) {
      if (g_planted.inventory.is_space(durations.phonemes[n])) {
        saw_zero_space |= durations.durations[n] == 0;
      } else {
        check.expect(durations.durations[n] >= 3,
                     "non-space phoneme below 3 frames");
      }
    }
  }
  check.expect(saw_zero_space, "no skipped silence found to exercise the rule");
}

void criterion_7_kld_properties(Check& check) {
  DurationHistogram p;
  Rng rng(31);
  for (int bin = 0; bin < 12; ++bin) {
    p.add(0, 1 + static_cast<int>(rng.below(20)), 1 + rng.below(50));
  }
  check.expect(kld(p, p).mean == 0.0, "KLd(P,P) != 0");

  for (int trial = 0; trial < 10000; ++trial) {
    DurationHistogram a;
    DurationHistogram b;
    for (int bin = 0; bin < 5; ++bin) {
      a.add(0, 1 + static_cast<int>(rng.below(12)), 1 + rng.below(30));
      b.add(0, 1 + static_cast<int>(rng.below(12)), 1 + rng.below(30));
    }
    check.expect(kld(a, b).mean >= 0.0, "negative KLd");
  }

  DurationHistogram point;
  point.add(0, 1, 1000000);
  DurationHistogram uniform;
  const int k = 8;
  for (int d = 1; d <= k; ++d) uniform.add(0, d, 100000);
  const double value = kld(point, uniform, 1e-6).mean;
  check.expect(std::abs(value - std::log(double(k))) <
                   0.01 * std::log(double(k)),
               "point-vs-uniform KLd " + std::to_string(value) +
                   " not within 1% of ln(k)");
}

SweepReport g_sweep;

void criterion_8_sweep_ordering(Check& check) {
  SimConfig config;  // documented desk-scale defaults
  const auto reference = generate_reference(config);
  const auto predictions = generate_predictions(reference, config);
  g_sweep = run_sweep(reference, predictions, config);

  std::map<double, double> kld_by_sigma;
  std::map<double, double> kld_by_alpha;
  for (const auto& row : g_sweep.rows) {
    if (row.mode == "walk") kld_by_sigma[row.parameter] = row.mean_kld;
    if (row.mode == "constant") kld_by_alpha[row.parameter] = row.mean_kld;
  }
  check.expect(kld_by_sigma.size() == 5, "expected 5 sigma settings");

  double previous = 1e300;
  for (const auto& [sigma, value] : kld_by_sigma) {
    check.expect(value < previous,
                 "KLd not strictly decreasing at sigma=" +
                     std::to_string(sigma));
    previous = value;
  }
  const double best_walk = previous;
  check.expect(kld_by_alpha.at(1.2) > kld_by_alpha.at(1.0),
               "KLd(alpha=1.2) not above KLd(alpha=1.0)");
  check.expect(kld_by_alpha.at(1.0) > best_walk,
               "KLd(alpha=1.0) not above the best random-walk KLd");
}

void criterion_9_oracle_zero(Check& check) {
  bool found = false;
  for (const auto& row : g_sweep.rows) {
    if (row.mode == "oracle") {
      found = true;
      check.expect(row.mean_kld == 0.0, "oracle KLd not exactly 0");
    }
  }
  check.expect(found, "no oracle row in the sweep");

  // and directly through the library
  Rng rng(77);
  const auto predicted = random_utterance(rng, "u", 30);
  auto reference = predicted;
  for (auto& d : reference.durations) d += 3;
  const auto substituted = substitute_oracle(predicted, reference);
  check.expect(substituted.durations == reference.durations,
               "substitution did not copy durations");
}

void criterion_10_upsampling(Check& check) {
  Rng rng(909);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(10);
    std::vector<int> durations(n);
    std::int64_t total = 0;
    for (auto& d : durations) {
      d = static_cast<int>(rng.below(8));
      total += d;
    }
    if (total == 0) {
      durations[0] = 1;
      total = 1;
    }
    const double sigma_g = 0.3 + 4.0 * rng.uniform();
    const auto w = gaussian_upsample_weights(durations, sigma_g);
    check.expect(w.weights.rows() == static_cast<std::size_t>(total),
                 "frame count != sum of durations");
    for (std::size_t t = 0; t < w.weights.rows(); ++t) {
      double row_sum = 0.0;
      for (std::size_t c = 0; c < n; ++c) row_sum += w.weights.at(t, c);
      check.expect(std::abs(row_sum - 1.0) < 1e-6, "row sum off");
    }

    const std::size_t dims = 1 + rng.below(6);
    Matrix h1(n, dims);
    Matrix h2(n, dims);
    for (auto& v : h1.data()) v = rng.gaussian();
    for (auto& v : h2.data()) v = rng.gaussian();
    const double a = rng.gaussian();
    const double b = rng.gaussian();
    Matrix combined(n, dims);
    for (std::size_t i = 0; i < combined.data().size(); ++i) {
      combined.data()[i] = a * h1.data()[i] + b * h2.data()[i];
    }
    const auto lhs = upsample_states(combined, w);
    const auto u1 = upsample_states(h1, w);
    const auto u2 = upsample_states(h2, w);
    for (std::size_t i = 0; i < lhs.data().size(); ++i) {
      check.expect(std::abs(lhs.data()[i] -
                            (a * u1.data()[i] + b * u2.data()[i])) < 1e-9,
                   "upsampling not linear within 1e-9");
    }
  }
}

void criterion_11_cli_determinism(Check& check) {
  const auto dir = fresh_dir("durkit_acceptance_cli");
  const auto corpus = make_planted_corpus(24, 777);

  // lay the corpus out on disk
  const auto features_dir = dir / "features";
  std::filesystem::create_directories(features_dir);
  std::vector<io::UtteranceRecord> records;
  {
    std::ofstream transcripts(dir / "transcripts.jsonl");
    for (const auto& utterance : corpus.utterances) {
      io::write_matrix(features_dir / (utterance.id + ".fmat"),
                       utterance.features);
      std::string line = R"({"id":")" + utterance.id + R"(","phonemes":[)";
      for (std::size_t n = 0; n < utterance.phonemes.size(); ++n) {
        if (n > 0) line += ',';
        line += '"' + corpus.inventory.symbol(utterance.phonemes[n]) + '"';
      }
      line += "]}";
      transcripts << line << '\n';
    }
  }

  auto chain = [&](const std::string& tag, int jobs) {
    const auto base = dir / tag;
    std::filesystem::create_directories(base);
    const std::string jobs_flag = " --jobs " + std::to_string(jobs);
    CliResult r;
    r = run_cli("hmm-train --features " + features_dir.string() +
                " --transcripts " + (dir / "transcripts.jsonl").string() +
                " --em-iters 4 --split-iters 0 --seed 3" + jobs_flag +
                " --out " + (base / "model.json").string());
    check.expect(r.exit_code == 0, "hmm-train failed in " + tag);
    r = run_cli("hmm-align --model " + (base / "model.json").string() +
                " --features " + features_dir.string() + " --transcripts " +
                (dir / "transcripts.jsonl").string() + jobs_flag + " --out " +
                (base / "frames.jsonl").string());
    check.expect(r.exit_code == 0, "hmm-align failed in " + tag);
    r = run_cli("durations --in " + (base / "frames.jsonl").string() +
                " --out " + (base / "durations.jsonl").string());
    check.expect(r.exit_code == 0, "durations failed in " + tag);
    r = run_cli("modify --mode walk --sigma 0.025 --seed 7" + jobs_flag +
                " --in " + (base / "durations.jsonl").string() + " --out " +
                (base / "modified.jsonl").string());
    check.expect(r.exit_code == 0, "modify failed in " + tag);
    r = run_cli("stats --in " + (base / "modified.jsonl").string() +
                " --out " + (base / "stats.csv").string());
    check.expect(r.exit_code == 0, "stats failed in " + tag);
  };

  chain("run1", 1);
  chain("run2", 1);
  chain("run8", 8);

  for (const std::string name :
       {"model.json", "frames.jsonl", "durations.jsonl", "modified.jsonl",
        "stats.csv"}) {
    const std::string run1 = read_file(dir / "run1" / name);
    check.expect(!run1.empty(), name + " is empty");
    check.expect(run1 == read_file(dir / "run2" / name),
                 name + " differs between identical runs");
    check.expect(run1 == read_file(dir / "run8" / name),
                 name + " differs between --jobs 1 and --jobs 8");
  }
}

}  // namespace

int main() {
  criterion(1, "random-walk identity and centering", 1.0,
            criterion_1_walk_identity);
  criterion(2, "clip asymmetry limit", 5.0, criterion_2_clip_asymmetry);
  criterion(3, "CTC oracle equivalence", 30.0, criterion_3_ctc_oracle);
  criterion(4, "CTC duration contract", 30.0, criterion_4_ctc_durations);
  criterion(5, "HMM planted recovery", 60.0, criterion_5_hmm_recovery);
  criterion(6, "HMM topology and zero-duration spaces", 30.0,
            criterion_6_hmm_topology);
  criterion(7, "KLd metric properties", 30.0, criterion_7_kld_properties);
  criterion(8, "directional sweep reproduction", 30.0,
            criterion_8_sweep_ordering);
  criterion(9, "oracle substitution drives KLd to zero", 10.0,
            criterion_9_oracle_zero);
  criterion(10, "upsampling invariants", 30.0, criterion_10_upsampling);
  criterion(11, "end-to-end CLI determinism", 120.0,
            criterion_11_cli_determinism);

  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
