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

#include "chad/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>

namespace chad::eval {

namespace {

void check_scored_set(const ScoredSet& set) {
  if (set.scores.size() != set.labels.size())
    fail(ErrorKind::Data, "scores and labels differ in length");
  if (set.scores.empty()) fail(ErrorKind::Data, "empty scored set");
  std::size_t pos = 0;
  for (auto l : set.labels) pos += l ? 1 : 0;
  if (pos == 0)
    fail(ErrorKind::Data, "average precision undefined without positives");
  if (pos == set.labels.size())
    fail(ErrorKind::Data, "average precision undefined without negatives");
}

// Indices in anomaly-first order; stable, so ties keep input order.
std::vector<std::size_t> anomaly_order(const ScoredSet& set) {
  std::vector<std::size_t> idx(set.scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (set.low_is_anomalous) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return set.scores[a] < set.scores[b];
    });
  } else {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return set.scores[a] > set.scores[b];
    });
  }
  return idx;
}

void hash_u64(std::uint64_t v, std::uint64_t& h) {
  h = fnv1a(&v, sizeof(v), h);
}

void hash_f64(double v, std::uint64_t& h) { h = fnv1a(&v, sizeof(v), h); }

}  // namespace

real_t average_precision(const ScoredSet& set) {
  check_scored_set(set);
  const auto idx = anomaly_order(set);
  std::size_t n_pos = 0;
  for (auto l : set.labels) n_pos += l ? 1 : 0;
  std::size_t hits = 0;
  real_t sum = 0;
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (set.labels[idx[r]]) {
      ++hits;
      sum += static_cast<real_t>(hits) / static_cast<real_t>(r + 1);
    }
  }
  return sum / static_cast<real_t>(n_pos);
}

std::vector<std::pair<real_t, real_t>> pr_curve(const ScoredSet& set) {
  check_scored_set(set);
  const auto idx = anomaly_order(set);
  std::size_t n_pos = 0;
  for (auto l : set.labels) n_pos += l ? 1 : 0;
  std::vector<std::pair<real_t, real_t>> pts;
  pts.reserve(idx.size());
  std::size_t hits = 0;
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (set.labels[idx[r]]) ++hits;
    pts.emplace_back(static_cast<real_t>(hits) / static_cast<real_t>(n_pos),
                     static_cast<real_t>(hits) / static_cast<real_t>(r + 1));
  }
  return pts;
}

void write_pr_csv(const std::string& path, const ScoredSet& set) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Data, "cannot write pr curve: " + path);
  out << "recall,precision\n";
  for (const auto& [rec, prec] : pr_curve(set))
    out << static_cast<double>(rec) << ',' << static_cast<double>(prec)
        << '\n';
}

std::uint64_t ExperimentConfig::fingerprint() const {
  std::uint64_t h = fnv1a("chad-experiment-v1");
  for (auto w : arch.encoder_widths) hash_u64(w, h);
  hash_f64(static_cast<double>(arch.ae_dropout), h);
  hash_f64(static_cast<double>(arch.est_dropout), h);
  hash_u64(arch.embed_threshold, h);
  hash_u64(arch.embed_max_dim, h);
  hash_u64(arch.cont_proj_width, h);
  hash_f64(static_cast<double>(train.learning_rate), h);
  hash_u64(train.batch_size, h);
  hash_u64(train.sampler.negatives_per_instance, h);
  hash_f64(static_cast<double>(train.sampler.noise_deviation), h);
  hash_f64(static_cast<double>(train.sampler.dampening_exponent), h);
  hash_u64(train.sampler.latent_noise_enabled ? 1 : 0, h);
  hash_u64(train.schedule.phase1_epochs, h);
  hash_u64(train.schedule.phase2_epochs, h);
  hash_u64(train.schedule.phase3_epochs, h);
  hash_f64(static_cast<double>(train.gamma_max), h);
  hash_f64(static_cast<double>(train_fraction), h);
  hash_f64(static_cast<double>(anomaly_ratio), h);
  hash_u64(n_runs, h);
  hash_u64(n_anomaly_sets, h);
  hash_u64(seed, h);
  return h;
}

std::vector<real_t> ExperimentReport::ap_values() const {
  std::vector<real_t> out;
  out.reserve(runs.size());
  for (const auto& r : runs) out.push_back(r.ap);
  return out;
}

void ExperimentReport::write_text(std::ostream& out) const {
  for (const auto& r : runs)
    out << "run=" << r.run << " set=" << r.anomaly_set
        << " seed=" << r.train_seed << " ap=" << static_cast<double>(r.ap)
        << '\n';
  out << "mean=" << static_cast<double>(mean)
      << " std=" << static_cast<double>(stddev) << " n=" << runs.size()
      << " config=" << config_fingerprint << '\n';
}

std::pair<real_t, real_t> mean_and_std(const std::vector<real_t>& xs) {
  if (xs.empty()) return {real_t(0), real_t(0)};
  real_t mean = 0;
  for (auto x : xs) mean += x;
  mean /= static_cast<real_t>(xs.size());
  if (xs.size() < 2) return {mean, real_t(0)};
  real_t ss = 0;
  for (auto x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<real_t>(xs.size() - 1))};
}

ExperimentReport run_experiment(const data::Dataset& raw_labeled,
                                const ExperimentConfig& config,
                                model::ChadModel* out_last_model,
                                data::Dataset* out_last_test) {
  if (!raw_labeled.labeled())
    fail(ErrorKind::Config, "experiment needs a labeled dataset");
  if (config.n_runs == 0 || config.n_anomaly_sets == 0)
    fail(ErrorKind::Config, "experiment needs at least one run and one mix");
  if (!(config.train_fraction > real_t(0) && config.train_fraction < real_t(1)))
    fail(ErrorKind::Config, "train_fraction must lie in (0,1)");
  config.train.validate();

  auto [normals, anomalies] = split_by_label(raw_labeled);
  if (normals.records.empty())
    fail(ErrorKind::Config, "experiment needs normal records");
  if (anomalies.records.empty())
    fail(ErrorKind::Config, "experiment needs an anomaly pool");

  ExperimentReport report;
  report.config_fingerprint = config.fingerprint();

  for (std::size_t run = 0; run < config.n_runs; ++run) {
    const std::string rtag = "r" + std::to_string(run);
    RngStream split_rng(config.seed, "split/" + rtag);
    std::vector<std::size_t> order(normals.records.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    split_rng.shuffle(order);
    const std::size_t n_train = static_cast<std::size_t>(
        static_cast<double>(config.train_fraction) *
        static_cast<double>(order.size()));
    if (n_train == 0 || n_train == order.size())
      fail(ErrorKind::Config, "train/test split came out empty on one side");

    data::Dataset train_ds, test_ds;
    train_ds.schema = normals.schema;
    test_ds.schema = normals.schema;
    for (std::size_t i = 0; i < order.size(); ++i)
      (i < n_train ? train_ds : test_ds)
          .records.push_back(normals.records[order[i]]);

    data::fit_normalizer(train_ds);
    data::normalize_against(train_ds.schema, test_ds);
    data::Dataset anomaly_ds = anomalies;
    data::normalize_against(train_ds.schema, anomaly_ds);

    RngStream model_rng(config.seed, "model/" + rtag);
    auto m = model::ChadModel::build(train_ds.schema, config.arch, model_rng);
    trainer::TrainConfig tcfg = config.train;
    tcfg.seed = RngStream(config.seed, "train/" + rtag).next_u64();
    trainer::train(m, train_ds, tcfg);

    for (std::size_t set = 0; set < config.n_anomaly_sets; ++set) {
      RngStream mix_rng(config.seed,
                        "mix/" + rtag + "/s" + std::to_string(set));
      data::Dataset mix = data::build_eval_mix(
          test_ds, anomaly_ds, static_cast<double>(config.anomaly_ratio),
          mix_rng);
      const Mat scores = m.anomaly_score(mix.records);
      ScoredSet ss;
      ss.scores.assign(scores.data(), scores.data() + scores.size());
      ss.labels = mix.labels;
      ss.low_is_anomalous = true;
      RunRecord rec;
      rec.run = run;
      rec.anomaly_set = set;
      rec.train_seed = tcfg.seed;
      rec.ap = average_precision(ss);
      report.runs.push_back(rec);
    }

    if (run + 1 == config.n_runs) {
      if (out_last_model != nullptr) *out_last_model = std::move(m);
      if (out_last_test != nullptr) *out_last_test = std::move(test_ds);
    }
  }

  auto [mean, stddev] = mean_and_std(report.ap_values());
  report.mean = mean;
  report.stddev = stddev;
  return report;
}

std::vector<SweepPoint> anomaly_ratio_sweep(const model::ChadModel& m,
                                            const data::Dataset& test_normals,
                                            const data::Dataset& anomaly_pool,
                                            const std::vector<real_t>& ratios,
                                            std::uint64_t seed) {
  if (ratios.empty()) fail(ErrorKind::Config, "sweep needs at least one ratio");
  std::vector<SweepPoint> out;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    const real_t ratio = ratios[i];
    const auto n_anom = static_cast<std::size_t>(
        static_cast<double>(ratio) *
        static_cast<double>(test_normals.records.size()));
    if (n_anom == 0)
      fail(ErrorKind::Data, "ratio too small for the test set size");
    if (n_anom > anomaly_pool.records.size())
      fail(ErrorKind::Data, "anomaly pool too small for the requested ratio");
    RngStream mix_rng(seed, "sweep/" + std::to_string(i));
    data::Dataset mix = data::build_eval_mix(
        test_normals, anomaly_pool, static_cast<double>(ratio), mix_rng);
    const Mat scores = m.anomaly_score(mix.records);
    ScoredSet ss;
    ss.scores.assign(scores.data(), scores.data() + scores.size());
    ss.labels = mix.labels;
    out.push_back({ratio, average_precision(ss)});
  }
  return out;
}

NoiseTraceReport negative_latent_traces(const model::ChadModel& m,
                                        const data::Dataset& normals,
                                        const negsampler::SamplerConfig& cfg,
                                        std::size_t max_records,
                                        std::uint64_t seed) {
  if (normals.records.empty())
    fail(ErrorKind::Config, "no records to draw negatives from");
  RngStream pick_rng(seed, "trace/pick");
  RngStream neg_rng(seed, "trace/negs");
  RngStream noise_rng(seed, "trace/noise");

  std::vector<data::EncodedRecord> sample;
  if (normals.records.size() <= max_records) {
    sample = normals.records;
  } else {
    std::vector<std::size_t> order(normals.records.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    pick_rng.shuffle(order);
    sample.reserve(max_records);
    for (std::size_t i = 0; i < max_records; ++i)
      sample.push_back(normals.records[order[i]]);
  }

  auto negs = trainer::make_negatives(sample, normals.schema, cfg, neg_rng);
  model::EncodeCache ec;
  const Mat z = m.encode(negs, /*training=*/false, nullptr, ec);
  const Mat z_noisy = negsampler::inject_latent_noise(z, true, noise_rng);

  auto cov_trace = [](const Mat& x) {
    // Sum over dimensions of the per-column sample variance.
    const std::size_t n = x.rows(), p = x.cols();
    real_t trace = 0;
    for (std::size_t j = 0; j < p; ++j) {
      real_t mean = 0;
      for (std::size_t i = 0; i < n; ++i) mean += x(i, j);
      mean /= static_cast<real_t>(n);
      real_t ss = 0;
      for (std::size_t i = 0; i < n; ++i)
        ss += (x(i, j) - mean) * (x(i, j) - mean);
      trace += ss / static_cast<real_t>(n - 1);
    }
    return trace;
  };

  NoiseTraceReport rep;
  rep.latent_dim = m.latent_dim();
  rep.n_latents = z.rows();
  if (z.rows() < 2)
    fail(ErrorKind::Config, "need at least two negatives for a covariance");
  rep.trace_clean = cov_trace(z);
  rep.trace_noisy = cov_trace(z_noisy);
  return rep;
}

AblationReport noise_ablation(const data::Dataset& raw_labeled,
                              const ExperimentConfig& config) {
  AblationReport rep;
  ExperimentConfig with_cfg = config;
  with_cfg.train.sampler.latent_noise_enabled = true;
  ExperimentConfig without_cfg = config;
  without_cfg.train.sampler.latent_noise_enabled = false;

  model::ChadModel m_with, m_without;
  data::Dataset test_with, test_without;
  rep.with_noise = run_experiment(raw_labeled, with_cfg, &m_with, &test_with);
  rep.without_noise =
      run_experiment(raw_labeled, without_cfg, &m_without, &test_without);

  const std::size_t trace_cap = 512;
  rep.traces_with =
      negative_latent_traces(m_with, test_with, with_cfg.train.sampler,
                             trace_cap, config.seed ^ 0x9e3779b97f4a7c15ull);
  rep.traces_without = negative_latent_traces(
      m_without, test_without, without_cfg.train.sampler, trace_cap,
      config.seed ^ 0x9e3779b97f4a7c15ull);
  return rep;
}

}  // namespace chad::eval
