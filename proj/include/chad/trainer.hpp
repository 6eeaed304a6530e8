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

// Three-phase training loop. Phase 1 trains the autoencoder alone; phase 2
// blends a decaying reconstruction term with the estimation loss on
// alternating mini-batches; phase 3 freezes the autoencoder and trains only
// the density estimator while gamma ramps up.

#ifndef CHAD_TRAINER_HPP_
#define CHAD_TRAINER_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "chad/common.hpp"
#include "chad/data.hpp"
#include "chad/model.hpp"
#include "chad/negsampler.hpp"
#include "chad/rng.hpp"

namespace chad::trainer {

struct PhaseSchedule {
  std::size_t phase1_epochs = 50;
  std::size_t phase2_epochs = 10;
  std::size_t phase3_epochs = 25;
  std::size_t total() const {
    return phase1_epochs + phase2_epochs + phase3_epochs;
  }
};

struct TrainConfig {
  real_t learning_rate = real_t(5e-4);
  std::size_t batch_size = 256;
  negsampler::SamplerConfig sampler;  // K, delta, dampening, latent noise
  PhaseSchedule schedule;
  real_t gamma_max = real_t(2);
  std::uint64_t seed = 0;
  std::string checkpoint_dir;  // empty -> no phase-boundary checkpoints

  void validate() const;  // Config error on nonsense values
};

struct EpochLog {
  int phase = 0;              // 1..3
  std::size_t phase_epoch = 0;   // 1-based within its phase
  std::size_t global_epoch = 0;  // 1-based across the whole run
  real_t mean_recon = real_t(0);  // 0 when the term is inactive
  real_t mean_est = real_t(0);    // per-instance mean; 0 when inactive
  real_t lambda = real_t(0);
  real_t gamma = real_t(0);
  double wall_ms = 0;
};

struct TrainLog {
  std::vector<EpochLog> epochs;
  std::size_t n_train_records = 0;
  // Autoencoder digests bracketing phase 3; equal iff the freeze held.
  std::uint64_t ae_digest_phase3_start = 0;
  std::uint64_t ae_digest_phase3_end = 0;

  /// One JSON object per line; wall_ms is the only nondeterministic field.
  void write_jsonl(const std::string& path) const;
};

/// lambda = exp(-t), t = 1-based phase-2 epoch index.
real_t phase2_lambda(std::size_t t);

/// Linear 1 -> gamma_max across phase-3 epochs (1-based e of n_epochs).
/// A single-epoch phase 3 jumps straight to gamma_max.
real_t phase3_gamma(std::size_t e, std::size_t n_epochs, real_t gamma_max);

/// K negatives per instance, i-major: result[i*K + k] belongs to batch[i].
/// Drawn fresh from the rng on every call; never cached across batches.
std::vector<data::EncodedRecord> make_negatives(
    const std::vector<data::EncodedRecord>& batch, const data::Schema& schema,
    const negsampler::SamplerConfig& config, RngStream& rng,
    negsampler::PerturbStats* stats = nullptr);

/// Run the full schedule in place. Fixed seed -> identical final parameters
/// and log (wall_ms aside). Non-finite losses abort with phase/epoch/batch
/// context in the message.
TrainLog train(model::ChadModel& m, const data::Dataset& train_data,
               const TrainConfig& config);

}  // namespace chad::trainer

#endif  // CHAD_TRAINER_HPP_
