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

#pragma once

#include <cstdint>
#include <vector>

#include "chad/data.hpp"
#include "chad/matrix.hpp"
#include "chad/rng.hpp"

// Random-subspace negative sampling. Each negative perturbs a source
// record in two subspaces: a few categorical fields (picked by
// arity-dampened multinomial probabilities, each replaced by a different
// value) and two disjoint groups of floor(r/4) continuous features that
// receive U(0,1)+delta and U(0,1)-delta noise, unclamped, pushing
// negatives outside the normalized data range.

namespace chad::negsampler {

struct SamplerConfig {
  std::size_t negatives_per_instance = 10;  // K
  real_t noise_deviation = real_t(0.5);     // delta
  real_t dampening_exponent = real_t(0.75);
  bool latent_noise_enabled = true;
};

/// p_w = q_w / sum(q), q_w = (a_w / sum(a))^exponent. Scale-invariant in
/// the arities.
std::vector<real_t> category_probs(const std::vector<std::size_t>& arities,
                                   real_t exponent);

/// Weighted field picker over the categorical fields of a schema.
class CategoryPicker {
 public:
  CategoryPicker(const std::vector<std::size_t>& arities, real_t exponent);

  const std::vector<real_t>& probs() const { return probs_; }

  /// n distinct field indices, sequential weighted draws without
  /// replacement.
  std::vector<std::size_t> pick(std::size_t n, RngStream& rng) const;

 private:
  std::vector<real_t> probs_;
};

/// Aggregate bookkeeping for audits and tests. `drawn` counts the raw
/// picker selections; `changed` counts fields whose value was actually
/// replaced, which additionally includes the arity>1 field injected when a
/// draw landed only on arity-1 fields (kept out of `drawn` so the counts
/// stay a clean multinomial sample).
struct PerturbStats {
  std::vector<std::uint64_t> drawn;
  std::vector<std::uint64_t> changed;
  std::uint64_t n_negatives = 0;
  std::uint64_t n_augmented = 0;
  std::uint64_t cont_features_min = UINT64_MAX;
  std::uint64_t cont_features_max = 0;
  double noise_plus_sum = 0, noise_plus_sq = 0;
  std::uint64_t noise_plus_n = 0;
  double noise_minus_sum = 0, noise_minus_sq = 0;
  std::uint64_t noise_minus_n = 0;

  void ensure_k(std::size_t k);
};

/// Random-subspace negatives: config.negatives_per_instance perturbed copies
/// of x. Deterministic given the rng state.
std::vector<data::EncodedRecord> perturb_record(const data::EncodedRecord& x,
                                                const data::Schema& schema,
                                                const SamplerConfig& config,
                                                RngStream& rng,
                                                PerturbStats* stats = nullptr);

/// z + n, n ~ N(0, I) fresh per element. Disabled -> identity copy.
Mat inject_latent_noise(const Mat& z, bool enabled, RngStream& rng);

}  // namespace chad::negsampler
