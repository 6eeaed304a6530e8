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

// Release gate: one criterion per numbered line, PASS / FLAG / FAIL, with
// the measured quantity and wall time. Exits nonzero if anything FAILs.
// Heavyweight artifacts (the trained desk-scale model) are built once and
// shared by the criteria that need them.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ap_oracle.hpp"
#include "chad/data.hpp"
#include "chad/eval.hpp"
#include "chad/model.hpp"
#include "chad/motivation.hpp"
#include "chad/negsampler.hpp"
#include "chad/nn.hpp"
#include "chad/rng.hpp"
#include "chad/synth.hpp"
#include "chad/trainer.hpp"

namespace fs = std::filesystem;
using namespace chad;

namespace {

struct Gate {
  int n_pass = 0, n_flag = 0, n_fail = 0;

  void line(int num, const char* name, const std::string& verdict,
            const std::string& detail, double secs, double budget_secs) {
    std::string timing;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1fs", secs);
    timing = buf;
    if (budget_secs > 0) {
      std::snprintf(buf, sizeof(buf), " (budget %.0fs%s)", budget_secs,
                    secs > budget_secs ? ", OVER" : "");
      timing += buf;
    }
    std::printf("[%s] %d %s: %s; %s\n", verdict.c_str(), num, name,
                detail.c_str(), timing.c_str());
    std::fflush(stdout);
    if (verdict == "PASS") ++n_pass;
    else if (verdict == "FLAG") ++n_flag;
    else ++n_fail;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string fmt(double v, const char* spec = "%.4g") {
  char buf[48];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

data::Schema make_schema(const std::vector<std::size_t>& arities,
                         std::size_t r) {
  data::Schema s;
  for (std::size_t w = 0; w < arities.size(); ++w) {
    data::CatField f;
    f.name = "c" + std::to_string(w);
    for (std::size_t v = 0; v < arities[w]; ++v) {
      f.values.push_back("v" + std::to_string(v));
      f.index[f.values.back()] = static_cast<std::uint32_t>(v);
    }
    s.cats.push_back(std::move(f));
  }
  for (std::size_t j = 0; j < r; ++j) {
    data::ContField f;
    f.name = "n" + std::to_string(j);
    f.min = real_t(0);
    f.max = real_t(1);
    f.fitted = true;
    s.conts.push_back(f);
  }
  return s;
}

std::vector<data::EncodedRecord> random_batch(const data::Schema& s,
                                              std::size_t n, RngStream& rng) {
  std::vector<data::EncodedRecord> out(n);
  for (auto& rec : out) {
    for (const auto& cf : s.cats)
      rec.cat.push_back(static_cast<std::uint32_t>(rng.index(cf.arity())));
    for (std::size_t j = 0; j < s.conts.size(); ++j)
      rec.cont.push_back(static_cast<real_t>(rng.u01()));
  }
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "<unreadable:" + path + ">";
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------- 1
// Analytic vs central-difference gradients for both losses on random tiny
// models: k <= 3 categorical fields (arities <= 6), r <= 5, widths <= 8,
// dropout disabled.
void criterion_gradients(Gate& gate) {
  const auto t0 = std::chrono::steady_clock::now();
  if (sizeof(real_t) != 8) {
    gate.line(1, "gradient-correctness", "FAIL",
              "needs the 64-bit build (CHAD_REAL32 is on)", 0, 60);
    return;
  }

  RngStream cfg_rng(2401, "acc/grad");
  double worst_overall = 0;
  std::string worst_where;
  for (int mi = 0; mi < 20; ++mi) {
    const std::size_t k = 1 + cfg_rng.index(3);
    std::vector<std::size_t> arities;
    for (std::size_t w = 0; w < k; ++w) arities.push_back(2 + cfg_rng.index(5));
    const std::size_t r = 1 + cfg_rng.index(5);
    auto schema = make_schema(arities, r);

    model::ArchConfig arch;
    arch.ae_dropout = 0;
    arch.est_dropout = 0;
    arch.encoder_widths.clear();
    const std::size_t depth = 1 + cfg_rng.index(2);
    for (std::size_t l = 0; l < depth; ++l)
      arch.encoder_widths.push_back(2 + cfg_rng.index(7));

    RngStream build_rng(cfg_rng.next_u64(), "acc/grad/build");
    auto m = model::ChadModel::build(schema, arch, build_rng);

    RngStream data_rng(cfg_rng.next_u64(), "acc/grad/data");
    const std::size_t n = 3, kk = 2;
    auto batch = random_batch(schema, n, data_rng);
    auto negs = random_batch(schema, n * kk, data_rng);
    Mat noise(n * kk, m.latent_dim());
    for (std::size_t i = 0; i < noise.size(); ++i)
      noise.data()[i] = static_cast<real_t>(data_rng.normal());
    const real_t gamma = real_t(1) + static_cast<real_t>(cfg_rng.u01());

    // Reconstruction loss over the autoencoder parameters.
    auto recon_loss = [&]() {
      model::EncodeCache ec;
      nn::MlpCache dc;
      Mat z = m.encode(batch, false, nullptr, ec);
      Mat xh = m.decode(z, false, nullptr, dc);
      return m.reconstruction_loss(batch, xh);
    };
    auto recon_grads = [&]() {
      m.zero_grad();
      model::EncodeCache ec;
      nn::MlpCache dc;
      Mat z = m.encode(batch, false, nullptr, ec);
      Mat xh = m.decode(z, false, nullptr, dc);
      Mat dxh;
      m.reconstruction_loss(batch, xh, &dxh);
      m.encoder_backward(m.decoder_backward(dxh, dc), ec, batch);
    };
    std::string worst;
    double err = static_cast<double>(nn::gradcheck(
        m.ae_params(), recon_loss, recon_grads, real_t(1e-5), &worst));
    if (err > worst_overall) {
      worst_overall = err;
      worst_where = "L_R model " + std::to_string(mi) + " " + worst;
    }

    // Estimation loss over every parameter on its gradient path: the
    // estimator plus the encoder stack and input transforms (positive and
    // negative latents both flow through them). The decoder is not on the
    // path, so it is excluded rather than checked against exact zero.
    struct Pass {
      Mat pos, negscores;
      model::EncodeCache ep, en;
      nn::MlpCache sp, sn;
    };
    auto run = [&](Pass& p) {
      Mat zp = m.encode(batch, false, nullptr, p.ep);
      Mat zn = m.encode(negs, false, nullptr, p.en);
      for (std::size_t i = 0; i < zn.size(); ++i)
        zn.data()[i] += noise.data()[i];
      p.pos = m.estimator_forward(zp, false, nullptr, p.sp);
      Mat flat = m.estimator_forward(zn, false, nullptr, p.sn);
      p.negscores.assign(n, kk);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < kk; ++j)
          p.negscores(i, j) = flat(i * kk + j, 0);
    };
    auto est_loss = [&]() {
      Pass p;
      run(p);
      return model::estimation_loss(p.pos, p.negscores, gamma);
    };
    auto est_grads = [&]() {
      m.zero_grad();
      Pass p;
      run(p);
      Mat dpos, dnegscores;
      model::estimation_loss(p.pos, p.negscores, gamma, &dpos, &dnegscores);
      Mat dflat(n * kk, 1);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < kk; ++j)
          dflat(i * kk + j, 0) = dnegscores(i, j);
      Mat dzp = m.estimator_backward(dpos, p.sp);
      Mat dzn = m.estimator_backward(dflat, p.sn);
      m.encoder_backward(dzp, p.ep, batch);
      m.encoder_backward(dzn, p.en, negs);
    };
    std::vector<nn::ParamRef> est_path;
    for (auto& p : m.all_params())
      if (p.name.rfind("dec", 0) != 0) est_path.push_back(p);
    err = static_cast<double>(
        nn::gradcheck(est_path, est_loss, est_grads, real_t(1e-5), &worst));
    if (err > worst_overall) {
      worst_overall = err;
      worst_where = "L_est model " + std::to_string(mi) + " " + worst;
    }
  }

  const bool ok = worst_overall <= 1e-4;
  gate.line(1, "gradient-correctness", ok ? "PASS" : "FAIL",
            "20 models, max rel err " + fmt(worst_overall, "%.2e") + " at " +
                (worst_where.empty() ? "-" : worst_where) + " (tol 1e-4)",
            seconds_since(t0), 60);
}

// ---------------------------------------------------------------- 2
void criterion_ap_oracle(Gate& gate) {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t mismatches = 0;
  double worst_gap = 0;

  RngStream rng(7321, "acc/ap");
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 2 + rng.index(19);  // 2..20
    eval::ScoredSet set;
    set.low_is_anomalous = rng.bernoulli(0.5);
    std::vector<double> scores;
    std::vector<int> labels;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse grid of score values so ties actually happen.
      const double s = static_cast<double>(rng.index(6)) / 5.0;
      const int l = rng.bernoulli(0.4) ? 1 : 0;
      scores.push_back(s);
      labels.push_back(l);
      set.scores.push_back(static_cast<real_t>(s));
      set.labels.push_back(static_cast<std::uint8_t>(l));
      n_pos += l;
    }
    if (n_pos == 0 || n_pos == n) continue;  // library rejects these by design
    const double ours = static_cast<double>(eval::average_precision(set));
    const double ref = chad_test::ap_oracle(scores, labels,
                                            set.low_is_anomalous);
    const double gap = std::abs(ours - ref);
    if (gap > worst_gap) worst_gap = gap;
    if (gap > 1e-12) ++mismatches;
  }

  // Hand examples: perfect ranking, late single positive, the 5/6 classic.
  auto hand = [](std::initializer_list<real_t> s,
                 std::initializer_list<int> l) {
    eval::ScoredSet set;
    set.low_is_anomalous = true;
    for (real_t v : s) set.scores.push_back(v);
    for (int v : l) set.labels.push_back(static_cast<std::uint8_t>(v));
    return static_cast<double>(eval::average_precision(set));
  };
  const double h1 = hand({real_t(0.1), real_t(0.2), real_t(0.9)}, {1, 1, 0});
  const double h2 = hand({real_t(0.1), real_t(0.2)}, {0, 1});
  const double h3 = hand({real_t(0.1), real_t(0.2), real_t(0.3)}, {1, 0, 1});
  const bool hands_ok = h1 == 1.0 && h2 == 0.5 &&
                        std::abs(h3 - 5.0 / 6.0) < 1e-15;

  const bool ok = mismatches == 0 && hands_ok;
  gate.line(2, "ap-oracle-equivalence", ok ? "PASS" : "FAIL",
            "1000 random sets, " + std::to_string(mismatches) +
                " mismatches (worst gap " + fmt(worst_gap, "%.1e") +
                "); hand values " + fmt(h1, "%.3f") + "/" + fmt(h2, "%.3f") +
                "/" + fmt(h3, "%.4f"),
            seconds_since(t0), 10);
}

// ---------------------------------------------------------------- 3
void criterion_sampler_stats(Gate& gate) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::size_t> arities{100, 10, 1};
  auto schema = make_schema(arities, 35);

  negsampler::SamplerConfig cfg;  // K=10, delta=0.5, exponent=0.75
  RngStream rng(515, "acc/sampler");
  auto src = random_batch(schema, 1, rng);

  negsampler::PerturbStats stats;
  const std::uint64_t want = 100000;
  while (stats.n_negatives < want)
    negsampler::perturb_record(src[0], schema, cfg, rng, &stats);

  // Independent oracle for the dampened multinomial: p_w ∝ (a_w/Σa)^0.75.
  double qsum = 0;
  std::vector<double> p(arities.size());
  for (std::size_t w = 0; w < arities.size(); ++w) {
    p[w] = std::pow(static_cast<double>(arities[w]) / 111.0, 0.75);
    qsum += p[w];
  }
  for (auto& v : p) v /= qsum;

  std::uint64_t draws = 0;
  for (auto d : stats.drawn) draws += d;
  std::string freq_detail;
  bool freqs_ok = true;
  for (std::size_t w = 0; w < arities.size(); ++w) {
    const double expect = static_cast<double>(draws) * p[w];
    const double sigma = std::sqrt(static_cast<double>(draws) * p[w] *
                                   (1.0 - p[w]));
    const double got = static_cast<double>(stats.drawn[w]);
    if (std::abs(got - expect) > 3.0 * sigma) freqs_ok = false;
    freq_detail += (w ? " " : "") + fmt(got / static_cast<double>(draws),
                                        "%.4f");
  }

  const bool cont_ok =
      stats.cont_features_min == 16 && stats.cont_features_max == 16;

  // Group noise means: U(0,1)±0.5 → 1.0 and 0.0, sd of the mean from the
  // uniform variance 1/12.
  const double plus_mean = stats.noise_plus_sum /
                           static_cast<double>(stats.noise_plus_n);
  const double minus_mean = stats.noise_minus_sum /
                            static_cast<double>(stats.noise_minus_n);
  const double sig_plus =
      std::sqrt(1.0 / 12.0 / static_cast<double>(stats.noise_plus_n));
  const double sig_minus =
      std::sqrt(1.0 / 12.0 / static_cast<double>(stats.noise_minus_n));
  const bool noise_ok = std::abs(plus_mean - 1.0) <= 3.0 * sig_plus &&
                        std::abs(minus_mean - 0.0) <= 3.0 * sig_minus;

  const bool ok = freqs_ok && cont_ok && noise_ok;
  gate.line(3, "negative-sampler-stats", ok ? "PASS" : "FAIL",
            std::to_string(stats.n_negatives) + " negatives; freqs [" +
                freq_detail + "] vs [" + fmt(p[0], "%.4f") + " " +
                fmt(p[1], "%.4f") + " " + fmt(p[2], "%.4f") + "]" +
                (freqs_ok ? "" : " OUT OF 3-SIGMA") + "; cont/sample " +
                std::to_string(stats.cont_features_min) + ".." +
                std::to_string(stats.cont_features_max) + "; noise means " +
                fmt(plus_mean, "%.5f") + "/" + fmt(minus_mean, "%.5f") +
                (noise_ok ? "" : " OUT OF 3-SIGMA"),
            seconds_since(t0), 60);
}

// ---------------------------------------------------------------- 4
void criterion_motivation(Gate& gate) {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t ordered = 0;
  double sum_c = 0, sum_k2 = 0, sum_g2 = 0, sum_k1 = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    motivation::SyntheticConfig cfg;
    cfg.seed = seed;
    const auto res = motivation::run_motivation(cfg);
    if (res.ap_contrast > res.ap_km2 && res.ap_km2 > res.ap_gmm2) ++ordered;
    sum_c += res.ap_contrast;
    sum_k2 += res.ap_km2;
    sum_g2 += res.ap_gmm2;
    sum_k1 += res.ap_km1;
  }
  const double mc = sum_c / 10, mk2 = sum_k2 / 10, mg2 = sum_g2 / 10,
               mk1 = sum_k1 / 10;
  const bool ok = ordered >= 8 && mc >= 0.85 && mg2 <= 0.6 &&
                  mk1 <= mk2 - 0.25;
  gate.line(4, "motivation-ordering", ok ? "PASS" : "FAIL",
            "contrast>km2>gmm2 in " + std::to_string(ordered) +
                "/10 seeds; means contrast " + fmt(mc, "%.3f") + " km2 " +
                fmt(mk2, "%.3f") + " gmm2 " + fmt(mg2, "%.3f") + " km1 " +
                fmt(mk1, "%.3f"),
            seconds_since(t0), 300);
}

// Shared artifacts from the desk-scale run (criteria 5-7).
struct DeskRun {
  data::Dataset raw;  // labeled, unfitted
  eval::ExperimentConfig config;
  eval::ExperimentReport report;
  model::ChadModel last_model;
  data::Dataset last_test;  // normalized test normals of the last run
  bool trained = false;
};

// ---------------------------------------------------------------- 5
void criterion_desk_scale(Gate& gate, DeskRun& desk, const fs::path& work) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string csv = (work / "bench.csv").string();
  synth::write_network_csv(csv, synth::SynthConfig{});
  const auto decl = data::parse_schema_decl(synth::network_schema_decl());
  desk.raw = data::load_csv(csv, decl).dataset;

  desk.config.n_runs = 3;
  desk.config.n_anomaly_sets = 3;
  desk.config.anomaly_ratio = real_t(0.2);  // 1:5
  desk.config.seed = 2026;
  desk.report = eval::run_experiment(desk.raw, desk.config, &desk.last_model,
                                     &desk.last_test);
  desk.trained = true;

  const double mean = static_cast<double>(desk.report.mean);
  std::string verdict = "FAIL";
  if (mean >= 0.90) verdict = "PASS";
  else if (mean >= 0.85) verdict = "FLAG";
  gate.line(5, "desk-scale-benchmark", verdict,
            "3 runs x 3 mixes at 1:5 on the synthetic network benchmark, "
            "mean AP " + fmt(mean, "%.4f") + " (+/- " +
                fmt(static_cast<double>(desk.report.stddev), "%.4f") +
                "); PASS needs >= 0.90, FLAG >= 0.85",
            seconds_since(t0), 1200);
}

// ---------------------------------------------------------------- 6
void criterion_ratio_trend(Gate& gate, DeskRun& desk) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!desk.trained) {
    gate.line(6, "anomaly-ratio-trend", "FAIL", "no desk-scale model", 0, 300);
    return;
  }
  auto anomalies = data::split_by_label(desk.raw).second;
  data::normalize_against(desk.last_test.schema, anomalies);
  const auto pts = eval::anomaly_ratio_sweep(
      desk.last_model, desk.last_test, anomalies,
      {real_t(0.02), real_t(0.10)}, desk.config.seed + 9);
  const double ap02 = static_cast<double>(pts[0].ap);
  const double ap10 = static_cast<double>(pts[1].ap);
  const bool ok = ap10 >= ap02 - 0.03;
  gate.line(6, "anomaly-ratio-trend", ok ? "PASS" : "FAIL",
            "same model, AP@2% " + fmt(ap02, "%.4f") + " vs AP@10% " +
                fmt(ap10, "%.4f") + " (need @10% >= @2% - 0.03)",
            seconds_since(t0), 300);
}

// ---------------------------------------------------------------- 7
void criterion_latent_noise(Gate& gate, DeskRun& desk) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!desk.trained) {
    gate.line(7, "latent-noise-covariance", "FAIL", "no desk-scale model", 0,
              60);
    return;
  }
  // 10^5 noisy negatives: 10,000 source records x K=10.
  auto normals = data::split_by_label(desk.raw).first;
  data::normalize_against(desk.last_test.schema, normals);
  const auto traces = eval::negative_latent_traces(
      desk.last_model, normals, desk.config.train.sampler, 10000,
      desk.config.seed + 31);
  const double expected = static_cast<double>(traces.trace_clean) +
                          static_cast<double>(traces.latent_dim);
  const double got = static_cast<double>(traces.trace_noisy);
  const bool ok = traces.n_latents == 100000 &&
                  std::abs(got - expected) <= 0.05 * expected;
  const double trace_secs = seconds_since(t0);

  // The ablation AP delta is reported, not asserted: the effect's direction
  // genuinely varies by dataset. One noise-off arm at the same desk scale.
  eval::ExperimentConfig off = desk.config;
  off.n_runs = 1;
  off.train.sampler.latent_noise_enabled = false;
  const auto off_report = eval::run_experiment(desk.raw, off);

  gate.line(7, "latent-noise-covariance", ok ? "PASS" : "FAIL",
            std::to_string(traces.n_latents) + " latents, trace clean " +
                fmt(static_cast<double>(traces.trace_clean), "%.3f") +
                " noisy " + fmt(got, "%.3f") + " vs clean+p " +
                fmt(expected, "%.3f") + " (tol 5%); reported ablation AP: "
                "noise-on " +
                fmt(static_cast<double>(desk.report.mean), "%.4f") +
                " vs noise-off " +
                fmt(static_cast<double>(off_report.mean), "%.4f") +
                " (not asserted)",
            trace_secs, 60);
}

// ---------------------------------------------------------------- 8
void criterion_phase_schedule(Gate& gate, DeskRun& desk) {
  const auto t0 = std::chrono::steady_clock::now();
  // A dedicated small run so the full default 50/10/25 schedule is cheap.
  auto normals = data::split_by_label(desk.raw).first;
  normals.records.resize(std::min<std::size_t>(normals.records.size(), 3000));
  normals.labels.clear();
  data::fit_normalizer(normals);

  trainer::TrainConfig tc;
  tc.seed = 77;
  RngStream build_rng(tc.seed, "model/build");
  auto m = model::ChadModel::build(normals.schema, model::ArchConfig{},
                                   build_rng);
  const auto log = trainer::train(m, normals, tc);

  std::vector<std::string> problems;
  const auto& sched = tc.schedule;
  if (log.epochs.size() != sched.total()) problems.push_back("epoch count");
  std::size_t at = 0;
  // Phase 1: reconstruction only, lambda pinned at 1.
  for (std::size_t e = 1; e <= sched.phase1_epochs; ++e, ++at) {
    const auto& el = log.epochs[at];
    if (el.phase != 1 || el.phase_epoch != e) problems.push_back("p1 index");
    if (!(el.mean_recon > 0) || el.mean_est != 0)
      problems.push_back("p1 indicators");
    if (el.lambda != real_t(1)) problems.push_back("p1 lambda");
  }
  // Phase 2: both terms live, lambda = e^{-t}.
  for (std::size_t e = 1; e <= sched.phase2_epochs; ++e, ++at) {
    const auto& el = log.epochs[at];
    if (el.phase != 2 || el.phase_epoch != e) problems.push_back("p2 index");
    if (!(el.mean_recon > 0) || !(el.mean_est > 0))
      problems.push_back("p2 indicators");
    if (el.lambda != trainer::phase2_lambda(e)) problems.push_back("p2 lambda");
  }
  // Phase 3: estimator only, gamma ramps monotonically to gamma_max.
  real_t prev_gamma = real_t(0);
  for (std::size_t e = 1; e <= sched.phase3_epochs; ++e, ++at) {
    const auto& el = log.epochs[at];
    if (el.phase != 3 || el.phase_epoch != e) problems.push_back("p3 index");
    if (el.mean_recon != 0 || !(el.mean_est > 0))
      problems.push_back("p3 indicators");
    if (el.lambda != real_t(0)) problems.push_back("p3 lambda");
    if (el.gamma < prev_gamma) problems.push_back("gamma decreased");
    prev_gamma = el.gamma;
  }
  if (prev_gamma != tc.gamma_max) problems.push_back("gamma endpoint");
  if (log.ae_digest_phase3_start != log.ae_digest_phase3_end)
    problems.push_back("autoencoder moved during phase 3");

  std::string what = "lambda 1x" + std::to_string(sched.phase1_epochs) +
                     " then e^-1..e^-" + std::to_string(sched.phase2_epochs) +
                     ", gamma -> " + fmt(static_cast<double>(tc.gamma_max)) +
                     ", frozen AE digest " +
                     (log.ae_digest_phase3_start == log.ae_digest_phase3_end
                          ? "held"
                          : "CHANGED");
  if (!problems.empty()) {
    what += "; problems:";
    for (const auto& p : problems) what += " [" + p + "]";
  }
  gate.line(8, "phase-schedule-invariants", problems.empty() ? "PASS" : "FAIL",
            what, seconds_since(t0), 120);
}

// ---------------------------------------------------------------- 9
void criterion_determinism(Gate& gate, const fs::path& work) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string bin = CHAD_CLI_BINARY;

  // One dataset and one config; only the output directories differ.
  const std::string w = work.string();
  bool ran = std::system((bin + " synth --seed 19 --out " + w +
                          "/gen >/dev/null 2>&1")
                             .c_str()) == 0;
  {
    std::ofstream cfg(w + "/run.cfg");
    cfg << "[data]\nschema = " << w << "/gen/network.schema\ncsv = " << w
        << "/gen/network.csv\n[train]\nphase1_epochs = 2\n"
           "phase2_epochs = 2\nphase3_epochs = 2\nseed = 12\n"
           "[eval]\nruns = 1\nanomaly_sets = 2\nseed = 13\n";
  }
  const auto run_pipeline = [&](const std::string& tag) -> bool {
    const std::string d = (work / tag).string();
    fs::create_directories(d);
    {
      std::ofstream sc(d + "/score.cfg");
      sc << "[score]\nmodel = " << d << "/train/model.chm\nschema_bin = " << d
         << "/train/schema.bin\n";
    }
    const std::string steps[] = {
        "train --config " + w + "/run.cfg --out " + d + "/train",
        "score " + w + "/gen/network.csv --config " + d +
            "/score.cfg --out " + d + "/score --sorted",
        "eval --config " + w + "/run.cfg --out " + d + "/eval",
    };
    for (const auto& step : steps) {
      const int rc =
          std::system((bin + " " + step + " >/dev/null 2>&1").c_str());
      if (rc != 0) return false;
    }
    return true;
  };

  ran = ran && run_pipeline("dupA") && run_pipeline("dupB");
  bool same = ran;
  std::string which = "pipeline step failed";
  if (ran) {
    which.clear();
    for (const char* f :
         {"train/model.chm", "train/schema.bin", "score/scores.csv",
          "eval/eval_report.txt", "train/config-echo.txt"}) {
      if (slurp((work / "dupA" / f).string()) !=
          slurp((work / "dupB" / f).string())) {
        same = false;
        which += std::string(which.empty() ? "" : ", ") + f;
      }
    }
  }
  gate.line(9, "pipeline-determinism", same ? "PASS" : "FAIL",
            same ? "synth+train+score+eval twice, model/scores/reports "
                   "byte-identical"
                 : "differs: " + which,
            seconds_since(t0), 0);
}

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / "chad_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  Gate gate;
  DeskRun desk;
  try {
    criterion_gradients(gate);
    criterion_ap_oracle(gate);
    criterion_sampler_stats(gate);
    criterion_motivation(gate);
    criterion_desk_scale(gate, desk, work);
    criterion_ratio_trend(gate, desk);
    criterion_latent_noise(gate, desk);
    criterion_phase_schedule(gate, desk);
    criterion_determinism(gate, work);
  } catch (const Error& e) {
    std::printf("[FAIL] aborted: %s\n", e.what());
    ++gate.n_fail;
  } catch (const std::exception& e) {
    std::printf("[FAIL] aborted: %s\n", e.what());
    ++gate.n_fail;
  }

  std::printf("acceptance: %d pass, %d flag, %d fail\n", gate.n_pass,
              gate.n_flag, gate.n_fail);
  return gate.n_fail == 0 ? 0 : 1;
}
