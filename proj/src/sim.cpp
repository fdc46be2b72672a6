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

#include "durkit/sim.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "durkit/durmod.hpp"
#include "durkit/error.hpp"
#include "durkit/stats.hpp"

namespace durkit {

void SimConfig::validate() const {
  if (phoneme_count < 1) fail("phoneme_count must be >= 1");
  if (utterances < 1) fail("utterances must be >= 1");
  if (utterance_length < 1) fail("utterance_length must be >= 1");
  if (min_duration < 0) fail("min_duration must be >= 0");
  if (!(mean_min > min_duration) || !(mean_max >= mean_min)) {
    fail("mean range must satisfy min_duration < mean_min <= mean_max");
  }
  if (dispersion < 0.0) fail("dispersion must be >= 0");
  if (!(mean_shrink > 0.0 && mean_shrink <= 1.0)) {
    fail("mean_shrink must be in (0, 1]");
  }
  if (!(variance_shrink > 0.0 && variance_shrink <= 1.0)) {
    fail("variance_shrink must be in (0, 1]");
  }
  if (family != "negative_binomial" && family != "lognormal") {
    fail("unknown duration family: " + family);
  }
  if (!(frame_shift_ms > 0.0)) fail("frame_shift_ms must be positive");
  if (!(kld_epsilon > 0.0)) fail("kld_epsilon must be positive");
  if (!(clip_lo <= 1.0 && 1.0 <= clip_hi)) {
    fail("clip range must satisfy clip_lo <= 1 <= clip_hi");
  }
  const double mean_excess = mean_shrink * mean_min - min_duration;
  if (!(mean_excess > 0.0)) {
    fail("mean_shrink pushes the predictor mean below the duration minimum");
  }
}

SimConfig load_sim_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open for reading: " + path.string());
  nlohmann::json root = nlohmann::json::parse(in, nullptr, false);
  if (root.is_discarded() || !root.is_object()) {
    fail("malformed simulation config: " + path.string());
  }
  SimConfig config;
  try {
    config.phoneme_count = root.value("phonemes", config.phoneme_count);
    config.utterances = root.value("utterances", config.utterances);
    config.utterance_length =
        root.value("utterance_length", config.utterance_length);
    config.seed = root.value("seed", config.seed);
    config.min_duration = root.value("min_duration", config.min_duration);
    if (root.contains("reference")) {
      const auto& ref = root["reference"];
      config.family = ref.value("family", config.family);
      config.mean_min = ref.value("mean_min", config.mean_min);
      config.mean_max = ref.value("mean_max", config.mean_max);
      config.dispersion = ref.value("dispersion", config.dispersion);
    }
    if (root.contains("predictor")) {
      const auto& pred = root["predictor"];
      config.mean_shrink = pred.value("mean_shrink", config.mean_shrink);
      config.variance_shrink =
          pred.value("variance_shrink", config.variance_shrink);
    }
    if (root.contains("sweep")) {
      const auto& sweep = root["sweep"];
      if (sweep.contains("sigmas")) {
        config.sigmas = sweep["sigmas"].get<std::vector<double>>();
      }
      if (sweep.contains("alphas")) {
        config.alphas = sweep["alphas"].get<std::vector<double>>();
      }
      config.clip_lo = sweep.value("clip_lo", config.clip_lo);
      config.clip_hi = sweep.value("clip_hi", config.clip_hi);
      config.kld_epsilon = sweep.value("kld_epsilon", config.kld_epsilon);
    }
    config.frame_shift_ms = root.value("frame_shift_ms", config.frame_shift_ms);
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("malformed simulation config: ") + e.what());
  }
  config.validate();
  return config;
}

namespace {

// Marsaglia-Tsang gamma draw; shape < 1 goes through the boost
// Gamma(shape + 1) * U^(1/shape).
double sample_gamma(Rng& rng, double shape, double scale) {
  if (shape < 1.0) {
    const double u = rng.uniform();
    return sample_gamma(rng, shape + 1.0, scale) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = rng.gaussian();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
      return d * v * scale;
    }
  }
}

int sample_poisson(Rng& rng, double lambda) {
  if (lambda <= 0.0) return 0;
  if (lambda > 500.0) {
    // Normal approximation; far outside the duration ranges in use.
    const double v = lambda + std::sqrt(lambda) * rng.gaussian();
    return v < 0.0 ? 0 : static_cast<int>(std::llround(v));
  }
  const double limit = std::exp(-lambda);
  int k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= rng.uniform();
  } while (p > limit);
  return k - 1;
}

int round_non_negative(double v) {
  return v < 0.0 ? 0 : static_cast<int>(std::llround(v));
}

}  // namespace

int sample_duration(Rng& rng, const std::string& family, double mean_excess,
                    double variance_excess, int minimum) {
  if (!(mean_excess > 0.0)) fail("duration mean must exceed the minimum");
  if (variance_excess <= 0.0) {
    return minimum + round_non_negative(mean_excess);
  }
  if (family == "lognormal") {
    // Match the first two moments of the excess.
    const double ratio = 1.0 + variance_excess / (mean_excess * mean_excess);
    const double mu = std::log(mean_excess) - 0.5 * std::log(ratio);
    const double s = std::sqrt(std::log(ratio));
    return minimum + round_non_negative(std::exp(rng.gaussian(mu, s)));
  }
  if (variance_excess > mean_excess) {
    // Negative binomial via a gamma-mixed Poisson.
    const double r =
        mean_excess * mean_excess / (variance_excess - mean_excess);
    const double lambda = sample_gamma(rng, r, mean_excess / r);
    return minimum + sample_poisson(rng, lambda);
  }
  if (variance_excess == mean_excess) {
    return minimum + sample_poisson(rng, mean_excess);
  }
  // Sub-Poisson narrowing: rounded Gaussian, clamped at the minimum.
  return minimum + round_non_negative(rng.gaussian(
                       mean_excess, std::sqrt(variance_excess)));
}

namespace {

std::string phoneme_symbol(int index) {
  char buffer[16];
  std::snprintf(buffer, sizeof(buffer), "P%02d", index);
  return buffer;
}

std::string utterance_id(int index) {
  char buffer[16];
  std::snprintf(buffer, sizeof(buffer), "sim-%06d", index);
  return buffer;
}

double phoneme_mean(const SimConfig& config, int phoneme) {
  if (config.phoneme_count == 1) return config.mean_min;
  const double t = static_cast<double>(phoneme) /
                   static_cast<double>(config.phoneme_count - 1);
  return config.mean_min + t * (config.mean_max - config.mean_min);
}

}  // namespace

SimCorpus generate_reference(const SimConfig& config) {
  config.validate();
  std::vector<std::string> symbols;
  symbols.reserve(config.phoneme_count);
  for (int p = 0; p < config.phoneme_count; ++p) {
    symbols.push_back(phoneme_symbol(p));
  }
  SimCorpus corpus{PhonemeInventory::from_observed(symbols), {}};
  corpus.utterances.reserve(config.utterances);

  for (int u = 0; u < config.utterances; ++u) {
    AlignedUtterance utterance;
    utterance.id = utterance_id(u);
    utterance.frame_shift_ms = config.frame_shift_ms;
    Rng seq_rng(derive_seed(config.seed, "seq/" + utterance.id));
    Rng dur_rng(derive_seed(config.seed, "ref/" + utterance.id));
    utterance.phonemes.reserve(config.utterance_length);
    utterance.durations.reserve(config.utterance_length);
    for (int n = 0; n < config.utterance_length; ++n) {
      const int symbol_index =
          static_cast<int>(seq_rng.below(config.phoneme_count));
      const int phoneme = corpus.inventory.id_of(phoneme_symbol(symbol_index));
      const double mean_excess =
          phoneme_mean(config, symbol_index) - config.min_duration;
      const double variance_excess =
          config.dispersion * mean_excess * mean_excess;
      utterance.phonemes.push_back(phoneme);
      utterance.durations.push_back(sample_duration(
          dur_rng, config.family, mean_excess, variance_excess,
          config.min_duration));
    }
    corpus.utterances.push_back(std::move(utterance));
  }
  return corpus;
}

std::vector<AlignedUtterance> generate_predictions(const SimCorpus& reference,
                                                   const SimConfig& config) {
  config.validate();
  std::vector<AlignedUtterance> predictions;
  predictions.reserve(reference.utterances.size());
  for (const auto& ref_utterance : reference.utterances) {
    AlignedUtterance prediction = ref_utterance;
    Rng dur_rng(derive_seed(config.seed, "pred/" + ref_utterance.id));
    for (std::size_t n = 0; n < prediction.phonemes.size(); ++n) {
      const std::string& symbol =
          reference.inventory.symbol(prediction.phonemes[n]);
      const int symbol_index = std::stoi(symbol.substr(1));
      const double ref_mean = phoneme_mean(config, symbol_index);
      const double ref_mean_excess = ref_mean - config.min_duration;
      const double ref_variance =
          config.dispersion * ref_mean_excess * ref_mean_excess;
      const double pred_mean_excess =
          config.mean_shrink * ref_mean - config.min_duration;
      const double pred_variance = config.variance_shrink * ref_variance;
      prediction.durations[n] = sample_duration(
          dur_rng, config.family, pred_mean_excess, pred_variance,
          config.min_duration);
    }
    predictions.push_back(std::move(prediction));
  }
  return predictions;
}

namespace {

SweepRow measure(const std::string& mode, double parameter,
                 const std::vector<AlignedUtterance>& modified,
                 const DurationHistogram& ref_hist,
                 std::int64_t ref_frames, const SimCorpus& reference,
                 const SimConfig& config) {
  SweepRow row;
  row.mode = mode;
  row.parameter = parameter;
  row.data_hours = total_audio_hours(modified);
  std::int64_t frames = 0;
  for (const auto& utterance : modified) frames += utterance.total_frames();
  row.length_ratio =
      static_cast<double>(frames) / static_cast<double>(ref_frames);
  const DurationHistogram hist =
      build_histograms(modified, reference.inventory);
  row.mean_kld = kld(hist, ref_hist, config.kld_epsilon).mean;
  return row;
}

void format_row(std::string& out, const SweepRow& row) {
  char buffer[160];
  if (std::isnan(row.parameter)) {
    std::snprintf(buffer, sizeof(buffer), "%s,,%.6f,%.6f,%.6f\n",
                  row.mode.c_str(), row.data_hours, row.length_ratio,
                  row.mean_kld);
  } else {
    std::snprintf(buffer, sizeof(buffer), "%s,%.6g,%.6f,%.6f,%.6f\n",
                  row.mode.c_str(), row.parameter, row.data_hours,
                  row.length_ratio, row.mean_kld);
  }
  out += buffer;
}

}  // namespace

std::string SweepReport::to_csv() const {
  std::string out = "mode,parameter,data_hours,length_ratio,mean_kld\n";
  for (const auto& row : rows) format_row(out, row);
  return out;
}

SweepReport run_sweep(const SimCorpus& reference,
                      const std::vector<AlignedUtterance>& predictions,
                      const SimConfig& config) {
  config.validate();
  if (reference.utterances.size() != predictions.size()) {
    fail("reference and prediction corpora differ in size");
  }
  const DurationHistogram ref_hist =
      build_histograms(reference.utterances, reference.inventory);
  std::int64_t ref_frames = 0;
  for (const auto& utterance : reference.utterances) {
    ref_frames += utterance.total_frames();
  }
  if (ref_frames == 0) fail("reference corpus has zero frames");

  SweepReport report;
  const double nan = std::nan("");
  report.rows.push_back(measure("none", nan, predictions, ref_hist, ref_frames,
                                reference, config));

  for (double alpha : config.alphas) {
    std::vector<AlignedUtterance> modified;
    modified.reserve(predictions.size());
    for (const auto& utterance : predictions) {
      modified.push_back(constant_scale(utterance, alpha));
    }
    report.rows.push_back(measure("constant", alpha, modified, ref_hist,
                                  ref_frames, reference, config));
  }

  for (std::size_t i = 0; i < config.sigmas.size(); ++i) {
    RandomWalkConfig walk;
    walk.sigma = config.sigmas[i];
    walk.clip_lo = config.clip_lo;
    walk.clip_hi = config.clip_hi;
    walk.seed = derive_seed(config.seed, "sweep-walk/" + std::to_string(i));
    std::vector<AlignedUtterance> modified;
    modified.reserve(predictions.size());
    for (const auto& utterance : predictions) {
      modified.push_back(apply_random_walk(utterance, walk));
    }
    report.rows.push_back(measure("walk", config.sigmas[i], modified, ref_hist,
                                  ref_frames, reference, config));
  }

  std::vector<AlignedUtterance> oracle;
  oracle.reserve(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    oracle.push_back(
        substitute_oracle(predictions[i], reference.utterances[i]));
  }
  report.rows.push_back(
      measure("oracle", nan, oracle, ref_hist, ref_frames, reference, config));

  return report;
}

}  // namespace durkit
