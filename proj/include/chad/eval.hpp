// Copyright 2026 The CHAD Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Average precision plus the experiment protocols: repeated train/score
// runs, the anomaly-ratio sweep, and the latent-noise ablation.

#ifndef CHAD_EVAL_HPP_
#define CHAD_EVAL_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "chad/common.hpp"
#include "chad/data.hpp"
#include "chad/model.hpp"
#include "chad/negsampler.hpp"
#include "chad/trainer.hpp"

namespace chad::eval {

struct ScoredSet {
  std::vector<real_t> scores;
  std::vector<std::uint8_t> labels;  // 1 = anomaly (the positive class)
  bool low_is_anomalous = true;      // estimator orientation
};

/// Step-wise AP = sum over positives of precision-at-that-rank / n_pos,
/// ranking by anomalousness with ties broken by stable input order.
/// Data error unless the set has at least one positive and one negative.
real_t average_precision(const ScoredSet& set);

/// (recall, precision) after each rank, anomaly-first order.
std::vector<std::pair<real_t, real_t>> pr_curve(const ScoredSet& set);
void write_pr_csv(const std::string& path, const ScoredSet& set);

struct ExperimentConfig {
  model::ArchConfig arch;
  trainer::TrainConfig train;   // its seed is overridden per run
  real_t train_fraction = real_t(0.7);  // of normal records, per run
  real_t anomaly_ratio = real_t(0.2);   // anomalies per test normal (1:5)
  std::size_t n_runs = 10;
  std::size_t n_anomaly_sets = 5;
  std::uint64_t seed = 0;

  std::uint64_t fingerprint() const;
};

struct RunRecord {
  std::size_t run = 0;
  std::size_t anomaly_set = 0;
  std::uint64_t train_seed = 0;
  real_t ap = real_t(0);
};

struct ExperimentReport {
  std::vector<RunRecord> runs;  // run-major, n_runs * n_anomaly_sets
  real_t mean = real_t(0);
  real_t stddev = real_t(0);  // sample std; 0 when fewer than 2 values
  std::uint64_t config_fingerprint = 0;

  std::vector<real_t> ap_values() const;
  /// One line per run x mix plus a mean +/- std summary block.
  void write_text(std::ostream& out) const;
};

/// Mean and sample standard deviation (n-1 denominator; 0 for n < 2).
std::pair<real_t, real_t> mean_and_std(const std::vector<real_t>& xs);

/// The repeated-runs protocol on a raw labeled dataset: per run, shuffle
/// the normals, split train/test, fit normalization on the train slice,
/// train a fresh model, then score n_anomaly_sets mixes against the test
/// normals. When out_last_* are given they receive run n_runs-1's trained
/// model and its normalized test normals (the ablation reuses them).
ExperimentReport run_experiment(const data::Dataset& raw_labeled,
                                const ExperimentConfig& config,
                                model::ChadModel* out_last_model = nullptr,
                                data::Dataset* out_last_test = nullptr);

inline const std::vector<real_t>& default_sweep_ratios() {
  static const std::vector<real_t> r{real_t(0.02), real_t(0.04), real_t(0.06),
                                     real_t(0.08), real_t(0.10)};
  return r;
}

struct SweepPoint {
  real_t ratio = real_t(0);
  real_t ap = real_t(0);
};

/// One AP per ratio from the same trained model; fresh seeded mix each
/// ratio. Data error if the pool cannot cover a ratio.
std::vector<SweepPoint> anomaly_ratio_sweep(const model::ChadModel& m,
                                            const data::Dataset& test_normals,
                                            const data::Dataset& anomaly_pool,
                                            const std::vector<real_t>& ratios,
                                            std::uint64_t seed);

/// Empirical covariance traces of negative latents for one model, on the
/// same negatives with and without injected noise. With unit Gaussian
/// noise, trace_noisy ~ trace_clean + latent_dim.
struct NoiseTraceReport {
  real_t trace_clean = real_t(0);
  real_t trace_noisy = real_t(0);
  std::size_t latent_dim = 0;
  std::size_t n_latents = 0;
};

NoiseTraceReport negative_latent_traces(const model::ChadModel& m,
                                        const data::Dataset& normals,
                                        const negsampler::SamplerConfig& cfg,
                                        std::size_t max_records,
                                        std::uint64_t seed);

/// Same protocol twice, differing only in latent_noise_enabled, plus the
/// covariance traces measured on each arm's final trained model.
struct AblationReport {
  ExperimentReport with_noise;
  ExperimentReport without_noise;
  NoiseTraceReport traces_with;
  NoiseTraceReport traces_without;
};

AblationReport noise_ablation(const data::Dataset& raw_labeled,
                              const ExperimentConfig& config);

}  // namespace chad::eval

#endif  // CHAD_EVAL_HPP_
