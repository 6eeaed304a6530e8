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

#include "chad/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "chad/kernels.hpp"
#include "chad/nn.hpp"

namespace chad::trainer {

namespace ck = chad::kernels;

void TrainConfig::validate() const {
  if (!(learning_rate > real_t(0)))
    fail(ErrorKind::Config, "learning_rate must be positive");
  if (batch_size == 0) fail(ErrorKind::Config, "batch_size must be positive");
  if (sampler.negatives_per_instance == 0)
    fail(ErrorKind::Config, "negatives_per_instance must be positive");
  if (!(sampler.noise_deviation > real_t(0)))
    fail(ErrorKind::Config, "noise_deviation must be positive");
  if (!(gamma_max >= real_t(1)))
    fail(ErrorKind::Config, "gamma_max must be at least 1");
  if (schedule.total() == 0)
    fail(ErrorKind::Config, "schedule has no epochs");
}

real_t phase2_lambda(std::size_t t) {
  return std::exp(-static_cast<real_t>(t));
}

real_t phase3_gamma(std::size_t e, std::size_t n_epochs, real_t gamma_max) {
  if (n_epochs <= 1) return gamma_max;
  const real_t frac =
      static_cast<real_t>(e - 1) / static_cast<real_t>(n_epochs - 1);
  return real_t(1) + (gamma_max - real_t(1)) * frac;
}

std::vector<data::EncodedRecord> make_negatives(
    const std::vector<data::EncodedRecord>& batch, const data::Schema& schema,
    const negsampler::SamplerConfig& config, RngStream& rng,
    negsampler::PerturbStats* stats) {
  std::vector<data::EncodedRecord> out;
  out.reserve(batch.size() * config.negatives_per_instance);
  for (const auto& rec : batch) {
    auto negs = negsampler::perturb_record(rec, schema, config, rng, stats);
    for (auto& n : negs) out.push_back(std::move(n));
  }
  return out;
}

void TrainLog::write_jsonl(const std::string& path) const {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Data, "cannot write train log: " + path);
  for (const auto& e : epochs) {
    nlohmann::json j{{"phase", e.phase},
                     {"phase_epoch", e.phase_epoch},
                     {"epoch", e.global_epoch},
                     {"mean_recon", static_cast<double>(e.mean_recon)},
                     {"mean_est", static_cast<double>(e.mean_est)},
                     {"lambda", static_cast<double>(e.lambda)},
                     {"gamma", static_cast<double>(e.gamma)},
                     {"wall_ms", e.wall_ms}};
    out << j.dump() << '\n';
  }
}

namespace {

std::string at_context(int phase, std::size_t epoch, std::size_t batch) {
  return " (phase " + std::to_string(phase) + ", epoch " +
         std::to_string(epoch) + ", batch " + std::to_string(batch) + ")";
}

struct EpochAccum {
  real_t recon_sum = 0;  // sum over instances of per-record mean sq error
  std::size_t recon_n = 0;
  real_t est_sum = 0;  // sum over instances of per-instance estimation terms
  std::size_t est_n = 0;
};

}  // namespace

TrainLog train(model::ChadModel& m, const data::Dataset& train_data,
               const TrainConfig& config) {
  config.validate();
  if (train_data.records.empty())
    fail(ErrorKind::Config, "training dataset is empty");
  if (train_data.schema.fingerprint() != m.schema_fingerprint())
    fail(ErrorKind::Config,
         "training data schema does not match the model's schema");

  const std::size_t n = train_data.records.size();
  const std::size_t kk = config.sampler.negatives_per_instance;
  TrainLog log;
  log.n_train_records = n;

  if (!config.checkpoint_dir.empty())
    std::filesystem::create_directories(config.checkpoint_dir);

  std::size_t global_epoch = 0;

  auto run_phase = [&](int phase, std::size_t n_epochs) {
    nn::Adam opt(config.learning_rate);  // fresh moments each phase
    for (std::size_t pe = 1; pe <= n_epochs; ++pe) {
      ++global_epoch;
      const auto t0 = std::chrono::steady_clock::now();
      const std::string tag =
          "p" + std::to_string(phase) + "/e" + std::to_string(global_epoch);
      RngStream shuffle_rng(config.seed, "shuffle/" + tag);
      RngStream drop_rng(config.seed, "drop/" + tag);
      RngStream neg_rng(config.seed, "neg/" + tag);
      RngStream noise_rng(config.seed, "noise/" + tag);

      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), std::size_t{0});
      shuffle_rng.shuffle(order);

      const real_t lambda = phase == 1   ? real_t(1)
                            : phase == 2 ? phase2_lambda(pe)
                                         : real_t(0);
      const real_t gamma =
          phase == 3 ? phase3_gamma(pe, n_epochs, config.gamma_max)
                     : real_t(1);

      EpochAccum acc;
      std::size_t batch_idx = 0;
      for (std::size_t start = 0; start < n;
           start += config.batch_size, ++batch_idx) {
        const std::size_t bn = std::min(config.batch_size, n - start);
        std::vector<data::EncodedRecord> batch(bn);
        for (std::size_t i = 0; i < bn; ++i)
          batch[i] = train_data.records[order[start + i]];

        const bool do_recon = phase <= 2;
        const bool do_est = phase == 3 || (phase == 2 && batch_idx % 2 == 0);

        try {
          m.zero_grad();
          model::EncodeCache ec;
          // Phase 3 treats the frozen encoder as a fixed feature map: no
          // dropout, deterministic latents.
          const bool ae_training = phase <= 2;
          Mat z = m.encode(batch, ae_training, ae_training ? &drop_rng : nullptr,
                           ec);
          Mat dz_enc(bn, m.latent_dim());

          if (do_recon) {
            nn::MlpCache dc;
            Mat x_hat = m.decode(z, true, &drop_rng, dc);
            Mat dxh;
            const real_t loss_r = m.reconstruction_loss(batch, x_hat, &dxh);
            if (!std::isfinite(static_cast<double>(loss_r)))
              fail(ErrorKind::Train, "non-finite reconstruction loss");
            acc.recon_sum += loss_r * static_cast<real_t>(bn);
            acc.recon_n += bn;
            if (lambda != real_t(1))
              ck::scale(dxh.size(), lambda, dxh.data());
            dz_enc = m.decoder_backward(dxh, dc);
          }

          if (do_est) {
            auto negs =
                make_negatives(batch, train_data.schema, config.sampler,
                               neg_rng);
            model::EncodeCache en;
            Mat zn = m.encode(negs, ae_training,
                              ae_training ? &drop_rng : nullptr, en);
            Mat zn_noisy = negsampler::inject_latent_noise(
                zn, config.sampler.latent_noise_enabled, noise_rng);
            nn::MlpCache sp, sn;
            Mat pos = m.estimator_forward(z, true, &drop_rng, sp);
            Mat neg_flat = m.estimator_forward(zn_noisy, true, &drop_rng, sn);
            Mat neg_scores(bn, kk);
            for (std::size_t i = 0; i < bn; ++i)
              for (std::size_t k = 0; k < kk; ++k)
                neg_scores(i, k) = neg_flat(i * kk + k, 0);

            Mat dpos, dneg;
            const real_t loss_e =
                model::estimation_loss(pos, neg_scores, gamma, &dpos, &dneg);
            if (!std::isfinite(static_cast<double>(loss_e)))
              fail(ErrorKind::Train, "non-finite estimation loss");
            acc.est_sum += loss_e;
            acc.est_n += bn;

            Mat dneg_flat(bn * kk, 1);
            for (std::size_t i = 0; i < bn; ++i)
              for (std::size_t k = 0; k < kk; ++k)
                dneg_flat(i * kk + k, 0) = dneg(i, k);

            Mat dz_pos = m.estimator_backward(dpos, sp);
            Mat dz_neg = m.estimator_backward(dneg_flat, sn);
            if (phase == 2) {
              // Estimation gradients reach the autoencoder only while it is
              // still unfrozen.
              ck::axpy(dz_enc.size(), real_t(1), dz_pos.data(), dz_enc.data());
              m.encoder_backward(dz_neg, en, negs);
            }
          }

          if (phase <= 2) m.encoder_backward(dz_enc, ec, batch);

          if (phase == 1) {
            opt.step(m.ae_params());
          } else if (phase == 2) {
            opt.step(do_est ? m.all_params() : m.ae_params());
          } else {
            opt.step(m.estimator_params());
          }
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::Train) throw;
          fail(ErrorKind::Train,
               std::string(e.what()) + at_context(phase, pe, batch_idx));
        }
      }

      EpochLog el;
      el.phase = phase;
      el.phase_epoch = pe;
      el.global_epoch = global_epoch;
      el.mean_recon = acc.recon_n > 0
                          ? acc.recon_sum / static_cast<real_t>(acc.recon_n)
                          : real_t(0);
      el.mean_est =
          acc.est_n > 0 ? acc.est_sum / static_cast<real_t>(acc.est_n)
                        : real_t(0);
      el.lambda = lambda;
      el.gamma = gamma;
      el.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
      log.epochs.push_back(el);
    }
    if (!config.checkpoint_dir.empty() && n_epochs > 0)
      m.save(config.checkpoint_dir + "/phase" + std::to_string(phase) +
             ".chm");
  };

  run_phase(1, config.schedule.phase1_epochs);
  run_phase(2, config.schedule.phase2_epochs);
  log.ae_digest_phase3_start = m.ae_param_digest();
  run_phase(3, config.schedule.phase3_epochs);
  log.ae_digest_phase3_end = m.ae_param_digest();
  return log;
}

}  // namespace chad::trainer
