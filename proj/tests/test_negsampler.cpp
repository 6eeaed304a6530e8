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
#include <cmath>
#include <set>

#include "chad/negsampler.hpp"
#include "doctest.h"

using namespace chad;
using namespace chad::negsampler;

namespace {

data::Schema make_schema(const std::vector<std::size_t>& arities,
                         std::size_t r) {
  data::Schema s;
  for (std::size_t w = 0; w < arities.size(); ++w) {
    data::CatField f;
    f.name = "c" + std::to_string(w);
    for (std::size_t v = 0; v < arities[w]; ++v) {
      f.values.push_back("v" + std::to_string(v));
      f.index.emplace(f.values.back(), static_cast<std::uint32_t>(v));
    }
    s.cats.push_back(std::move(f));
  }
  for (std::size_t j = 0; j < r; ++j)
    s.conts.push_back(data::ContField{"x" + std::to_string(j), 0, 1, true});
  return s;
}

data::EncodedRecord make_record(const data::Schema& s, real_t cont_fill) {
  data::EncodedRecord rec;
  rec.cat.assign(s.k(), 0);
  rec.cont.assign(s.r(), cont_fill);
  return rec;
}

// Independent evaluation of the dampened multinomial.
std::vector<double> oracle_probs(const std::vector<std::size_t>& arities,
                                 double e) {
  double total = 0;
  for (auto a : arities) total += static_cast<double>(a);
  std::vector<double> q;
  double norm = 0;
  for (auto a : arities) {
    q.push_back(std::pow(static_cast<double>(a) / total, e));
    norm += q.back();
  }
  for (auto& v : q) v /= norm;
  return q;
}

}  // namespace

TEST_CASE("category_probs oracles") {
  auto p = category_probs({5, 5}, 0.75);
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(0.5));

  p = category_probs({3, 1}, 1.0);
  CHECK(p[0] == doctest::Approx(0.75));
  CHECK(p[1] == doctest::Approx(0.25));

  p = category_probs({100, 10, 1}, 0.75);
  const auto want = oracle_probs({100, 10, 1}, 0.75);
  for (int w = 0; w < 3; ++w)
    CHECK(p[w] == doctest::Approx(want[w]).epsilon(1e-12));
  // ballpark from the dampening formula
  CHECK(p[0] == doctest::Approx(0.827).epsilon(1e-3));
  CHECK(p[1] == doctest::Approx(0.147).epsilon(1e-2));
  CHECK(p[2] == doctest::Approx(0.026).epsilon(1e-1));

  double sum = 0;
  for (auto v : p) sum += static_cast<double>(v);
  CHECK(std::abs(sum - 1.0) < 1e-9);

  CHECK_THROWS_AS(category_probs({}, 0.75), Error);
  CHECK_THROWS_AS(category_probs({3, 0}, 0.75), Error);
}

TEST_CASE("category_probs is scale-invariant") {
  const auto a = category_probs({2, 4, 6}, 0.75);
  const auto b = category_probs({20, 40, 60}, 0.75);
  for (int w = 0; w < 3; ++w)
    CHECK(a[w] == doctest::Approx(b[w]).epsilon(1e-12));
}

TEST_CASE("picker draws distinct fields; full draw returns all") {
  RngStream rng(1, "picker");
  CategoryPicker picker({4, 4, 4, 4}, 0.75);
  for (int rep = 0; rep < 100; ++rep) {
    const auto sel = picker.pick(3, rng);
    CHECK(std::set<std::size_t>(sel.begin(), sel.end()).size() == 3);
  }
  const auto all = picker.pick(4, rng);
  CHECK(std::set<std::size_t>(all.begin(), all.end()) ==
        std::set<std::size_t>{0, 1, 2, 3});
  CHECK_THROWS_AS(picker.pick(5, rng), Error);
}

TEST_CASE("picker single-draw frequencies match probabilities") {
  RngStream rng(2, "picker_freq");
  CategoryPicker picker({100, 10, 1}, 0.75);
  const int n = 100000;
  std::vector<int> count(3, 0);
  for (int i = 0; i < n; ++i) ++count[picker.pick(1, rng)[0]];
  for (int w = 0; w < 3; ++w) {
    const double pw = static_cast<double>(picker.probs()[w]);
    const double sigma = std::sqrt(pw * (1 - pw) / n);
    CHECK(std::abs(static_cast<double>(count[w]) / n - pw) <= 3 * sigma);
  }
}

TEST_CASE("perturb_record: kdd-shaped counts") {
  // k=6, r=35: i in {1,2,3}; 8+8=16 continuous features perturbed.
  const auto schema = make_schema({3, 65, 11, 2, 2, 2}, 35);
  const auto x = make_record(schema, real_t(0.5));
  SamplerConfig cfg;
  cfg.negatives_per_instance = 50;
  RngStream rng(3, "kdd_counts");
  PerturbStats stats;
  const auto negs = perturb_record(x, schema, cfg, rng, &stats);
  REQUIRE(negs.size() == 50);
  CHECK(stats.cont_features_min == 16);
  CHECK(stats.cont_features_max == 16);
  for (const auto& neg : negs) {
    std::size_t cat_diff = 0;
    for (std::size_t w = 0; w < schema.k(); ++w)
      cat_diff += neg.cat[w] != x.cat[w];
    CHECK(cat_diff >= 1);
    CHECK(cat_diff <= 3 + 1);  // i <= 3, augmentation can add one
    std::size_t cont_diff = 0;
    for (std::size_t j = 0; j < schema.r(); ++j)
      cont_diff += neg.cont[j] != x.cont[j];
    CHECK(cont_diff == 16);
  }
}

TEST_CASE("perturb_record: i spans its full range for k=6") {
  const auto schema = make_schema({3, 3, 3, 3, 3, 3}, 4);
  const auto x = make_record(schema, real_t(0.5));
  SamplerConfig cfg;
  cfg.negatives_per_instance = 1;
  RngStream rng(4, "i_range");
  std::set<std::uint64_t> seen;
  std::uint64_t prev = 0;
  for (int rep = 0; rep < 300; ++rep) {
    PerturbStats stats;
    perturb_record(x, schema, cfg, rng, &stats);
    std::uint64_t drawn = 0;
    for (auto c : stats.drawn) drawn += c;
    seen.insert(drawn);
    prev = drawn;
    (void)prev;
    CHECK(drawn >= 1);
    CHECK(drawn <= 3);
  }
  CHECK(seen == std::set<std::uint64_t>{1, 2, 3});
}

TEST_CASE("perturb_record: replacement never keeps the original value") {
  const auto schema = make_schema({2}, 0);
  data::EncodedRecord x;
  x.cat = {1};
  SamplerConfig cfg;
  cfg.negatives_per_instance = 200;
  RngStream rng(5, "repl");
  for (const auto& neg : perturb_record(x, schema, cfg, rng))
    CHECK(neg.cat[0] == 0);
}

TEST_CASE("perturb_record: arity-1-only draw still changes a field") {
  // With [100,10,1]-like probabilities shrunk to [3,2,1], force many
  // samples; every negative must differ categorically, and the top-up
  // path must have fired at least once for the arity-1 field.
  const auto schema = make_schema({3, 2, 1}, 0);
  const auto x = make_record(schema, 0);
  SamplerConfig cfg;
  cfg.negatives_per_instance = 5000;
  RngStream rng(6, "aug");
  PerturbStats stats;
  const auto negs = perturb_record(x, schema, cfg, rng, &stats);
  for (const auto& neg : negs) {
    std::size_t diff = 0;
    for (std::size_t w = 0; w < 3; ++w) diff += neg.cat[w] != x.cat[w];
    CHECK(diff >= 1);
  }
  CHECK(stats.n_augmented > 0);
  CHECK(stats.changed[2] == 0);  // arity-1 field can never change value
  CHECK(stats.drawn[2] > 0);     // but it does get drawn
}

TEST_CASE("perturb_record: all fields arity 1 leaves categories alone") {
  const auto schema = make_schema({1, 1}, 8);
  const auto x = make_record(schema, real_t(0.25));
  SamplerConfig cfg;
  cfg.negatives_per_instance = 20;
  RngStream rng(7, "flat");
  for (const auto& neg : perturb_record(x, schema, cfg, rng)) {
    CHECK(neg.cat == x.cat);
    std::size_t cont_diff = 0;
    for (std::size_t j = 0; j < 8; ++j) cont_diff += neg.cont[j] != x.cont[j];
    CHECK(cont_diff == 4);  // floor(8/4) * 2
  }
}

TEST_CASE("perturb_record: degenerate continuous widths") {
  SamplerConfig cfg;
  cfg.negatives_per_instance = 30;
  for (const auto& [r, want] : std::vector<std::pair<std::size_t, std::size_t>>{
           {0, 0}, {1, 1}, {2, 1}, {3, 1}, {4, 2}, {7, 2}, {8, 4}}) {
    const auto schema = make_schema({4}, r);
    const auto x = make_record(schema, real_t(0.5));
    RngStream rng(100 + r, "deg");
    for (const auto& neg : perturb_record(x, schema, cfg, rng)) {
      std::size_t cont_diff = 0;
      for (std::size_t j = 0; j < r; ++j)
        cont_diff += neg.cont[j] != x.cont[j];
      CHECK(cont_diff == want);
    }
  }
  // continuous-only schema (k=0)
  const auto schema = make_schema({}, 12);
  const auto x = make_record(schema, real_t(0.5));
  RngStream rng(8, "k0");
  for (const auto& neg : perturb_record(x, schema, cfg, rng)) {
    CHECK(neg.cat.empty());
    std::size_t cont_diff = 0;
    for (std::size_t j = 0; j < 12; ++j) cont_diff += neg.cont[j] != x.cont[j];
    CHECK(cont_diff == 6);
  }
}

TEST_CASE("perturb_record: noise moments and ranges at delta=0.5") {
  const auto schema = make_schema({4}, 8);
  const auto x = make_record(schema, real_t(0));  // additive noise readable
  SamplerConfig cfg;
  cfg.negatives_per_instance = 20000;
  cfg.noise_deviation = real_t(0.5);
  RngStream rng(9, "moments");
  PerturbStats stats;
  const auto negs = perturb_record(x, schema, cfg, rng, &stats);
  REQUIRE(stats.noise_plus_n == 40000);   // 2 features * 20000
  REQUIRE(stats.noise_minus_n == 40000);
  const double mean_plus = stats.noise_plus_sum / stats.noise_plus_n;
  const double mean_minus = stats.noise_minus_sum / stats.noise_minus_n;
  const double sigma = std::sqrt(1.0 / 12 / 40000);
  CHECK(std::abs(mean_plus - 1.0) <= 3 * sigma);
  CHECK(std::abs(mean_minus - 0.0) <= 3 * sigma);
  // noise ranges: (0.5, 1.5) and (-0.5, 0.5); x was 0 so values = noise
  for (const auto& neg : negs)
    for (std::size_t j = 0; j < 8; ++j) {
      const real_t v = neg.cont[j];
      if (v == 0) continue;
      const bool plus = v >= real_t(0.5) && v < real_t(1.5);
      const bool minus = v > real_t(-0.5) && v < real_t(0.5);
      CHECK((plus || minus));
    }
}

TEST_CASE("perturb_record: delta=0 groups are distributionally identical") {
  const auto schema = make_schema({4}, 8);
  const auto x = make_record(schema, real_t(0));
  SamplerConfig cfg;
  cfg.negatives_per_instance = 20000;
  cfg.noise_deviation = real_t(0);
  RngStream rng(10, "delta0");
  PerturbStats stats;
  perturb_record(x, schema, cfg, rng, &stats);
  const double mp = stats.noise_plus_sum / stats.noise_plus_n;
  const double mm = stats.noise_minus_sum / stats.noise_minus_n;
  const double vp =
      stats.noise_plus_sq / stats.noise_plus_n - mp * mp;
  const double vm =
      stats.noise_minus_sq / stats.noise_minus_n - mm * mm;
  const double sigma = std::sqrt(1.0 / 12 / 40000);
  CHECK(std::abs(mp - 0.5) <= 3 * sigma);
  CHECK(std::abs(mm - 0.5) <= 3 * sigma);
  CHECK(vp == doctest::Approx(1.0 / 12).epsilon(0.05));
  CHECK(vm == doctest::Approx(1.0 / 12).epsilon(0.05));
}

TEST_CASE("perturb_record: no clamping beyond [0,1]") {
  const auto schema = make_schema({4}, 8);
  const auto x = make_record(schema, real_t(1));  // at the top of the range
  SamplerConfig cfg;
  cfg.negatives_per_instance = 50;
  RngStream rng(11, "noclamp");
  bool above = false;
  for (const auto& neg : perturb_record(x, schema, cfg, rng))
    for (std::size_t j = 0; j < 8; ++j) above |= neg.cont[j] > real_t(1);
  CHECK(above);
}

TEST_CASE("perturb_record: deterministic under fixed seed") {
  const auto schema = make_schema({5, 3}, 10);
  const auto x = make_record(schema, real_t(0.3));
  SamplerConfig cfg;
  auto run = [&] {
    RngStream rng(12, "det");
    return perturb_record(x, schema, cfg, rng);
  };
  const auto a = run();
  const auto b = run();
  REQUIRE(a.size() == b.size());
  for (std::size_t s = 0; s < a.size(); ++s) {
    CHECK(a[s].cat == b[s].cat);
    CHECK(a[s].cont == b[s].cont);
  }
}

TEST_CASE("inject_latent_noise: identity when disabled") {
  RngStream rng(13, "noise_off");
  Mat z(3, 4);
  for (std::size_t i = 0; i < z.size(); ++i)
    z.data()[i] = static_cast<real_t>(rng.uniform(-1, 1));
  const Mat out = inject_latent_noise(z, false, rng);
  CHECK(out == z);
}

TEST_CASE("inject_latent_noise: unit variance at z=0") {
  RngStream rng(14, "noise_var");
  const std::size_t n = 100000;
  Mat z(n, 1, real_t(0));
  const Mat out = inject_latent_noise(z, true, rng);
  double sum = 0, sq = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += static_cast<double>(out.data()[i]);
    sq += static_cast<double>(out.data()[i]) * out.data()[i];
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) <= 3.0 / std::sqrt(static_cast<double>(n)));
  // var of sample variance of N(0,1) is ~2/n
  CHECK(std::abs(var - 1.0) <= 3 * std::sqrt(2.0 / n));
}

TEST_CASE("inject_latent_noise: covariance additivity") {
  RngStream rng(15, "noise_cov");
  const std::size_t n = 20000, p = 4;
  Mat z(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    const double base = rng.uniform(-1, 1);
    for (std::size_t j = 0; j < p; ++j)
      z(i, j) = static_cast<real_t>(base + 0.1 * rng.uniform(-1, 1));
  }
  const Mat noisy = inject_latent_noise(z, true, rng);
  auto cov = [&](const Mat& m) {
    std::vector<double> mean(p, 0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < p; ++j)
        mean[j] += static_cast<double>(m(i, j));
    for (auto& v : mean) v /= static_cast<double>(n);
    std::vector<double> c(p * p, 0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < p; ++b)
          c[a * p + b] += (static_cast<double>(m(i, a)) - mean[a]) *
                          (static_cast<double>(m(i, b)) - mean[b]);
    for (auto& v : c) v /= static_cast<double>(n - 1);
    return c;
  };
  const auto cz = cov(z);
  const auto cn = cov(noisy);
  double frob = 0;
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b) {
      const double want = cz[a * p + b] + (a == b ? 1.0 : 0.0);
      frob += (cn[a * p + b] - want) * (cn[a * p + b] - want);
    }
  CHECK(std::sqrt(frob) < 0.1);
}
