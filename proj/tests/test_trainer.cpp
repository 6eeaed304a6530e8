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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "chad/trainer.hpp"

using chad::Mat;
using chad::real_t;
using chad::RngStream;
namespace data = chad::data;
namespace model = chad::model;
namespace negsampler = chad::negsampler;
namespace trainer = chad::trainer;

namespace {

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

// Two clustered profiles so the autoencoder has real structure to learn.
data::Dataset make_profile_data(std::size_t n, std::uint64_t seed) {
  data::Dataset ds;
  ds.schema = make_schema({2, 4}, 3);
  RngStream rng(seed, "profiles");
  for (std::size_t i = 0; i < n; ++i) {
    data::EncodedRecord rec;
    const bool a = rng.bernoulli(0.5);
    rec.cat.push_back(a ? 0u : 1u);
    rec.cat.push_back(a ? static_cast<std::uint32_t>(rng.index(2))
                        : 2u + static_cast<std::uint32_t>(rng.index(2)));
    const real_t base[3] = {a ? real_t(0.2) : real_t(0.8),
                            a ? real_t(0.3) : real_t(0.7),
                            a ? real_t(0.4) : real_t(0.6)};
    for (int j = 0; j < 3; ++j) {
      real_t v = base[j] + static_cast<real_t>(rng.normal(0.0, 0.05));
      rec.cont.push_back(std::clamp(v, real_t(0), real_t(1)));
    }
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

trainer::TrainConfig tiny_config() {
  trainer::TrainConfig cfg;
  cfg.learning_rate = real_t(3e-3);
  cfg.batch_size = 32;
  cfg.sampler.negatives_per_instance = 3;
  cfg.schedule = {5, 2, 3};
  cfg.seed = 99;
  return cfg;
}

model::ChadModel tiny_model(const data::Schema& s, std::uint64_t seed) {
  model::ArchConfig arch;
  arch.encoder_widths = {8, 4};
  RngStream rng(seed, "model");
  return model::ChadModel::build(s, arch, rng);
}

}  // namespace

TEST_CASE("config validation rejects nonsense") {
  trainer::TrainConfig cfg = tiny_config();
  cfg.learning_rate = real_t(0);
  CHECK_THROWS_AS(cfg.validate(), chad::Error);
  cfg = tiny_config();
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), chad::Error);
  cfg = tiny_config();
  cfg.gamma_max = real_t(0.5);
  CHECK_THROWS_AS(cfg.validate(), chad::Error);
  cfg = tiny_config();
  cfg.schedule = {0, 0, 0};
  CHECK_THROWS_AS(cfg.validate(), chad::Error);
  CHECK_NOTHROW(tiny_config().validate());
}

TEST_CASE("phase-2 lambda follows exp(-t)") {
  CHECK(trainer::phase2_lambda(1) == doctest::Approx(0.36787944117144233));
  CHECK(trainer::phase2_lambda(2) == doctest::Approx(0.1353352832366127));
  CHECK(trainer::phase2_lambda(3) == doctest::Approx(std::exp(-3.0)));
}

TEST_CASE("phase-3 gamma ramps linearly from 1 to gamma_max") {
  CHECK(trainer::phase3_gamma(1, 25, real_t(2)) == doctest::Approx(1.0));
  CHECK(trainer::phase3_gamma(13, 25, real_t(2)) == doctest::Approx(1.5));
  CHECK(trainer::phase3_gamma(25, 25, real_t(2)) == doctest::Approx(2.0));
  CHECK(trainer::phase3_gamma(1, 1, real_t(2)) == doctest::Approx(2.0));
  for (std::size_t e = 2; e <= 25; ++e)
    CHECK(trainer::phase3_gamma(e, 25, real_t(2)) >
          trainer::phase3_gamma(e - 1, 25, real_t(2)));
}

TEST_CASE("make_negatives yields K per instance in i-major order") {
  auto s = make_schema({5}, 4);
  std::vector<data::EncodedRecord> batch;
  for (std::uint32_t i = 0; i < 4; ++i) {
    data::EncodedRecord rec;
    rec.cat = {i % 5};
    // A distinctive constant marks which instance a negative came from:
    // only half the continuous features get perturbed.
    rec.cont.assign(4, real_t(i) / real_t(10));
    batch.push_back(rec);
  }
  negsampler::SamplerConfig scfg;
  scfg.negatives_per_instance = 3;
  RngStream rng(5, "negs");
  auto negs = trainer::make_negatives(batch, s, scfg, rng);
  REQUIRE(negs.size() == 12);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t k = 0; k < 3; ++k) {
      const auto& ng = negs[i * 3 + k];
      // r=4: one feature +delta, one -delta, two untouched.
      std::size_t untouched = 0;
      for (std::size_t j = 0; j < 4; ++j)
        if (ng.cont[j] == batch[i].cont[j]) ++untouched;
      CHECK(untouched == 2);
      CHECK(ng.cat[0] != batch[i].cat[0]);  // k=1, arity > 1: always changed
    }
  }
}

TEST_CASE("full schedule: log shape, lambda/gamma sequences, freeze") {
  auto ds = make_profile_data(400, 17);
  auto m = tiny_model(ds.schema, 23);
  auto cfg = tiny_config();
  const auto log = trainer::train(m, ds, cfg);

  REQUIRE(log.epochs.size() == 10);
  CHECK(log.n_train_records == 400);

  for (std::size_t i = 0; i < 10; ++i)
    CHECK(log.epochs[i].global_epoch == i + 1);

  // Phase 1: lambda 1, gamma 1, no estimation term.
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& e = log.epochs[i];
    CHECK(e.phase == 1);
    CHECK(e.phase_epoch == i + 1);
    CHECK(e.lambda == real_t(1));
    CHECK(e.gamma == real_t(1));
    CHECK(e.mean_est == real_t(0));
    CHECK(e.mean_recon > real_t(0));
  }
  // Phase 2: decaying lambda, estimation live on alternating batches.
  CHECK(log.epochs[5].phase == 2);
  CHECK(log.epochs[5].lambda ==
        doctest::Approx(0.36787944117144233).epsilon(1e-12));
  CHECK(log.epochs[6].lambda ==
        doctest::Approx(0.1353352832366127).epsilon(1e-12));
  for (std::size_t i = 5; i < 7; ++i) {
    CHECK(log.epochs[i].gamma == real_t(1));
    CHECK(log.epochs[i].mean_est > real_t(0));
    CHECK(log.epochs[i].mean_recon > real_t(0));
  }
  // Phase 3: recon off, gamma ramps 1 -> 2 and the autoencoder is frozen.
  const real_t want_gamma[3] = {real_t(1), real_t(1.5), real_t(2)};
  for (std::size_t i = 7; i < 10; ++i) {
    const auto& e = log.epochs[i];
    CHECK(e.phase == 3);
    CHECK(e.lambda == real_t(0));
    CHECK(e.gamma == doctest::Approx(want_gamma[i - 7]));
    CHECK(e.mean_recon == real_t(0));
    CHECK(e.mean_est > real_t(0));
  }
  CHECK(log.ae_digest_phase3_start == log.ae_digest_phase3_end);
}

TEST_CASE("phase 1 reconstruction loss strictly decreases on clustered data") {
  auto ds = make_profile_data(1000, 31);
  auto m = tiny_model(ds.schema, 37);
  auto cfg = tiny_config();
  cfg.schedule = {5, 0, 0};
  const auto log = trainer::train(m, ds, cfg);
  REQUIRE(log.epochs.size() == 5);
  for (std::size_t i = 1; i < 5; ++i)
    CHECK(log.epochs[i].mean_recon < log.epochs[i - 1].mean_recon);
}

TEST_CASE("training is deterministic for a fixed seed") {
  auto ds = make_profile_data(200, 41);
  auto cfg = tiny_config();
  cfg.schedule = {2, 2, 2};

  auto m1 = tiny_model(ds.schema, 43);
  auto m2 = tiny_model(ds.schema, 43);
  const auto log1 = trainer::train(m1, ds, cfg);
  const auto log2 = trainer::train(m2, ds, cfg);

  Mat s1 = m1.anomaly_score(ds.records);
  Mat s2 = m2.anomaly_score(ds.records);
  CHECK(s1 == s2);
  CHECK(m1.ae_param_digest() == m2.ae_param_digest());
  REQUIRE(log1.epochs.size() == log2.epochs.size());
  for (std::size_t i = 0; i < log1.epochs.size(); ++i) {
    CHECK(log1.epochs[i].mean_recon == log2.epochs[i].mean_recon);
    CHECK(log1.epochs[i].mean_est == log2.epochs[i].mean_est);
    CHECK(log1.epochs[i].lambda == log2.epochs[i].lambda);
    CHECK(log1.epochs[i].gamma == log2.epochs[i].gamma);
  }
}

TEST_CASE("phase 3 leaves the autoencoder bit-identical but moves the "
          "estimator") {
  auto ds = make_profile_data(200, 51);
  auto m = tiny_model(ds.schema, 53);
  auto cfg = tiny_config();
  cfg.schedule = {1, 1, 0};
  trainer::train(m, ds, cfg);

  const std::uint64_t ae_before = m.ae_param_digest();
  const real_t est_before = m.estimator().layer(0).weights()(0, 0);
  cfg.schedule = {0, 0, 2};
  trainer::train(m, ds, cfg);
  CHECK(m.ae_param_digest() == ae_before);
  CHECK(m.estimator().layer(0).weights()(0, 0) != est_before);
}

TEST_CASE("schema fingerprint mismatch and empty data are refused") {
  auto ds = make_profile_data(50, 61);
  auto other = make_schema({3, 3}, 2);
  RngStream rng(63, "model");
  auto m = model::ChadModel::build(other, {}, rng);
  CHECK_THROWS_AS((void)trainer::train(m, ds, tiny_config()), chad::Error);

  auto m2 = tiny_model(ds.schema, 65);
  data::Dataset empty;
  empty.schema = ds.schema;
  CHECK_THROWS_AS((void)trainer::train(m2, empty, tiny_config()),
                  chad::Error);
}

TEST_CASE("non-finite parameters abort with phase/epoch/batch context") {
  auto ds = make_profile_data(64, 71);
  auto m = tiny_model(ds.schema, 73);
  m.encoder().layer(0).weights()(0, 0) =
      std::numeric_limits<real_t>::quiet_NaN();
  auto cfg = tiny_config();
  cfg.schedule = {1, 0, 0};
  try {
    trainer::train(m, ds, cfg);
    FAIL("expected a Train error");
  } catch (const chad::Error& e) {
    CHECK(e.kind() == chad::ErrorKind::Train);
    CHECK(std::string(e.what()).find("phase 1") != std::string::npos);
    CHECK(std::string(e.what()).find("batch 0") != std::string::npos);
  }
}

TEST_CASE("phase-boundary checkpoints are written and loadable") {
  auto ds = make_profile_data(100, 81);
  auto m = tiny_model(ds.schema, 83);
  auto cfg = tiny_config();
  cfg.schedule = {1, 1, 1};
  const auto dir =
      (std::filesystem::temp_directory_path() / "chad_ckpt_test").string();
  std::filesystem::remove_all(dir);
  cfg.checkpoint_dir = dir;
  trainer::train(m, ds, cfg);
  for (int p = 1; p <= 3; ++p) {
    const auto path = dir + "/phase" + std::to_string(p) + ".chm";
    CHECK(std::filesystem::exists(path));
    auto loaded = model::ChadModel::load(path);
    CHECK(loaded.schema_fingerprint() == ds.schema.fingerprint());
  }
  // The phase-3 checkpoint is the final model.
  auto final_ckpt = model::ChadModel::load(dir + "/phase3.chm");
  CHECK(final_ckpt.anomaly_score(ds.records) == m.anomaly_score(ds.records));
  std::filesystem::remove_all(dir);
}

TEST_CASE("train log serializes one json object per epoch") {
  auto ds = make_profile_data(64, 91);
  auto m = tiny_model(ds.schema, 93);
  auto cfg = tiny_config();
  cfg.schedule = {2, 1, 1};
  const auto log = trainer::train(m, ds, cfg);
  const auto path =
      (std::filesystem::temp_directory_path() / "chad_trainlog.jsonl")
          .string();
  log.write_jsonl(path);
  std::ifstream in(path);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    CHECK(line.find("\"phase\"") != std::string::npos);
    CHECK(line.find("\"lambda\"") != std::string::npos);
    CHECK(line.find("\"gamma\"") != std::string::npos);
  }
  CHECK(lines == 4);
  std::filesystem::remove(path.c_str());
}
