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

#include "chad/negsampler.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "chad/common.hpp"

namespace chad::negsampler {

std::vector<real_t> category_probs(const std::vector<std::size_t>& arities,
                                   real_t exponent) {
  if (arities.empty())
    fail(ErrorKind::Internal, "category_probs: empty arity list");
  double total = 0;
  for (std::size_t a : arities) {
    if (a < 1) fail(ErrorKind::Internal, "category_probs: arity < 1");
    total += static_cast<double>(a);
  }
  std::vector<real_t> p(arities.size());
  double norm = 0;
  for (std::size_t w = 0; w < arities.size(); ++w) {
    const double q = std::pow(static_cast<double>(arities[w]) / total,
                              static_cast<double>(exponent));
    p[w] = static_cast<real_t>(q);
    norm += q;
  }
  for (auto& v : p) v = static_cast<real_t>(static_cast<double>(v) / norm);
  return p;
}

CategoryPicker::CategoryPicker(const std::vector<std::size_t>& arities,
                               real_t exponent)
    : probs_(category_probs(arities, exponent)) {}

std::vector<std::size_t> CategoryPicker::pick(std::size_t n,
                                              RngStream& rng) const {
  if (n > probs_.size())
    fail(ErrorKind::Internal, "picker: asked for more fields than exist");
  std::vector<std::size_t> pool(probs_.size());
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
  std::vector<double> weight(probs_.begin(), probs_.end());
  std::vector<std::size_t> out;
  out.reserve(n);
  for (std::size_t d = 0; d < n; ++d) {
    double total = 0;
    for (std::size_t i = 0; i < pool.size(); ++i) total += weight[i];
    double u = rng.u01() * total;
    std::size_t hit = pool.size() - 1;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      u -= weight[i];
      if (u < 0) {
        hit = i;
        break;
      }
    }
    out.push_back(pool[hit]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(hit));
    weight.erase(weight.begin() + static_cast<std::ptrdiff_t>(hit));
  }
  return out;
}

void PerturbStats::ensure_k(std::size_t k) {
  if (drawn.size() < k) drawn.resize(k, 0);
  if (changed.size() < k) changed.resize(k, 0);
}

namespace {

// Uniform replacement excluding the current index; requires arity > 1.
std::uint32_t replacement_index(std::uint32_t orig, std::size_t arity,
                                RngStream& rng) {
  std::uint32_t pick = static_cast<std::uint32_t>(rng.index(arity - 1));
  if (pick >= orig) ++pick;
  return pick;
}

}  // namespace

std::vector<data::EncodedRecord> perturb_record(const data::EncodedRecord& x,
                                                const data::Schema& schema,
                                                const SamplerConfig& config,
                                                RngStream& rng,
                                                PerturbStats* stats) {
  const std::size_t k = schema.k();
  const std::size_t r = schema.r();
  if (k == 0 && r == 0)
    fail(ErrorKind::Internal, "perturb_record: empty schema");
  if (x.cat.size() != k || x.cont.size() != r)
    fail(ErrorKind::Internal, "perturb_record: record does not match schema");
  if (config.negatives_per_instance < 1)
    fail(ErrorKind::Config, "negatives_per_instance must be >= 1");

  std::vector<std::size_t> arities(k);
  bool any_multi = false;
  for (std::size_t w = 0; w < k; ++w) {
    arities[w] = schema.cats[w].arity();
    any_multi |= arities[w] > 1;
  }
  std::optional<CategoryPicker> picker;
  if (k > 0) picker.emplace(arities, config.dampening_exponent);

  // Continuous group sizes: floor(r/4) each when r >= 4, else
  // max(1, floor(r/2)) features total, extra one to the +delta group.
  std::size_t g_plus = 0, g_minus = 0;
  if (r >= 4) {
    g_plus = g_minus = r / 4;
  } else if (r >= 1) {
    const std::size_t total = std::max<std::size_t>(1, r / 2);
    g_plus = (total + 1) / 2;
    g_minus = total / 2;
  }

  const std::size_t i_max = std::max<std::size_t>(1, k / 2);
  const real_t delta = config.noise_deviation;
  if (stats) stats->ensure_k(k);

  std::vector<data::EncodedRecord> out;
  out.reserve(config.negatives_per_instance);
  for (std::size_t s = 0; s < config.negatives_per_instance; ++s) {
    data::EncodedRecord neg = x;
    if (k > 0) {
      const std::size_t i = 1 + rng.index(i_max);
      std::vector<std::size_t> fields = picker->pick(i, rng);
      if (stats)
        for (std::size_t w : fields) ++stats->drawn[w];
      bool changed_any = false;
      for (std::size_t w : fields) {
        if (arities[w] <= 1) continue;
        neg.cat[w] = replacement_index(neg.cat[w], arities[w], rng);
        changed_any = true;
        if (stats) ++stats->changed[w];
      }
      // The draw can land only on arity-1 fields, which cannot take a
      // different value. Top up with one weighted pick from the arity>1
      // fields so every negative really differs categorically.
      if (!changed_any && any_multi) {
        std::vector<std::size_t> pool;
        std::vector<double> weights;
        for (std::size_t w = 0; w < k; ++w)
          if (arities[w] > 1) {
            pool.push_back(w);
            weights.push_back(static_cast<double>(picker->probs()[w]));
          }
        double total = 0;
        for (double wgt : weights) total += wgt;
        double u = rng.u01() * total;
        std::size_t hit = pool.size() - 1;
        for (std::size_t j = 0; j < pool.size(); ++j) {
          u -= weights[j];
          if (u < 0) {
            hit = j;
            break;
          }
        }
        const std::size_t w = pool[hit];
        neg.cat[w] = replacement_index(neg.cat[w], arities[w], rng);
        if (stats) {
          ++stats->changed[w];
          ++stats->n_augmented;
        }
      }
    }

    if (g_plus + g_minus > 0) {
      // Disjoint groups: partial shuffle, first g_plus then g_minus.
      std::vector<std::size_t> idx(r);
      for (std::size_t j = 0; j < r; ++j) idx[j] = j;
      for (std::size_t j = 0; j < g_plus + g_minus; ++j) {
        const std::size_t t = j + rng.index(r - j);
        std::swap(idx[j], idx[t]);
      }
      for (std::size_t j = 0; j < g_plus; ++j) {
        const real_t noise = static_cast<real_t>(rng.u01()) + delta;
        neg.cont[idx[j]] += noise;
        if (stats) {
          stats->noise_plus_sum += static_cast<double>(noise);
          stats->noise_plus_sq +=
              static_cast<double>(noise) * static_cast<double>(noise);
          ++stats->noise_plus_n;
        }
      }
      for (std::size_t j = g_plus; j < g_plus + g_minus; ++j) {
        const real_t noise = static_cast<real_t>(rng.u01()) - delta;
        neg.cont[idx[j]] += noise;
        if (stats) {
          stats->noise_minus_sum += static_cast<double>(noise);
          stats->noise_minus_sq +=
              static_cast<double>(noise) * static_cast<double>(noise);
          ++stats->noise_minus_n;
        }
      }
    }
    if (stats) {
      ++stats->n_negatives;
      const std::uint64_t nc = g_plus + g_minus;
      stats->cont_features_min = std::min(stats->cont_features_min, nc);
      stats->cont_features_max = std::max(stats->cont_features_max, nc);
    }
    out.push_back(std::move(neg));
  }
  return out;
}

Mat inject_latent_noise(const Mat& z, bool enabled, RngStream& rng) {
  Mat out = z;
  if (!enabled) return out;
  for (std::size_t i = 0; i < out.size(); ++i)
    out.data()[i] += static_cast<real_t>(rng.normal());
  return out;
}

}  // namespace chad::negsampler
