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
#include <string>
#include <vector>

#include "chad/data.hpp"
#include "chad/matrix.hpp"
#include "chad/nn.hpp"
#include "chad/rng.hpp"

// The CHAD network. Input records pass through per-field transforms
// (one-hot for small arities, trainable linear embeddings above the
// threshold, optional projection of wide continuous blocks), an
// asymmetric autoencoder (encoder to a p-dim latent; decoder back to
// one-hot + continuous targets under a final sigmoid), and a small
// estimator MLP on the latent that learns P(data | z) against sampled
// negatives. Scoring is the estimator output: lower = more anomalous.

namespace chad::model {

struct ArchConfig {
  std::vector<std::size_t> encoder_widths = {64, 32, 16};
  real_t ae_dropout = real_t(0.2);
  real_t est_dropout = real_t(0.1);
  std::size_t embed_threshold = 8;   // arity > threshold -> embedding
  std::size_t embed_max_dim = 16;    // d_w = min(max_dim, ceil(sqrt(a_w)))
  std::size_t cont_proj_width = 32;  // r > width -> project down to width
};

struct FieldTransform {
  bool embedding = false;
  std::size_t arity = 0;
  std::size_t out_dim = 0;  // arity when one-hot, d_w when embedding
  Mat emb;                  // arity x out_dim, empty for one-hot
  Mat demb;
};

struct ContTransform {
  bool linear = false;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;  // in_dim when identity
  Mat proj;                 // in_dim x out_dim, empty for identity
  Mat dproj;
};

struct EncodeCache {
  Mat xt;  // transformed input actually fed to the encoder stack
  nn::MlpCache mlp;
};

class ChadModel {
 public:
  ChadModel() = default;

  static ChadModel build(const data::Schema& schema, const ArchConfig& arch,
                         RngStream& rng);

  std::size_t latent_dim() const { return latent_dim_; }
  std::size_t transformed_dim() const { return transformed_dim_; }
  std::size_t target_dim() const { return target_dim_; }
  std::uint64_t schema_fingerprint() const { return schema_fingerprint_; }
  const ArchConfig& arch() const { return arch_; }
  std::size_t n_fields() const { return fields_.size(); }
  const FieldTransform& field(std::size_t w) const { return fields_[w]; }
  const ContTransform& cont() const { return cont_; }

  /// Concatenated per-field transform outputs.
  Mat transform_input(const std::vector<data::EncodedRecord>& batch) const;

  /// Accumulate embedding/projection gradients for d(loss)/d(x_t).
  void transform_backward(const Mat& dxt,
                          const std::vector<data::EncodedRecord>& batch);

  Mat encode(const std::vector<data::EncodedRecord>& batch, bool training,
             RngStream* rng, EncodeCache& cache) const;
  Mat decode(const Mat& z, bool training, RngStream* rng,
             nn::MlpCache& cache) const;
  Mat estimator_forward(const Mat& z, bool training, RngStream* rng,
                        nn::MlpCache& cache) const;

  /// dz for the encoder stack + transform params, given upstream d(loss)/dz.
  void encoder_backward(const Mat& dz, const EncodeCache& cache,
                        const std::vector<data::EncodedRecord>& batch);
  /// Returns d(loss)/dz given upstream d(loss)/d(x_hat).
  Mat decoder_backward(const Mat& dxhat, const nn::MlpCache& cache);
  /// Returns d(loss)/dz given upstream d(loss)/d(score).
  Mat estimator_backward(const Mat& dscore, const nn::MlpCache& cache);

  /// Decoder target: one-hot categoricals then normalized continuous.
  Mat expand_target(const std::vector<data::EncodedRecord>& batch) const;

  /// Mean squared error against the expanded target.
  real_t reconstruction_loss(const std::vector<data::EncodedRecord>& batch,
                             const Mat& x_hat, Mat* grad_x_hat = nullptr) const;

  /// Inference-mode estimator score per record, in (0,1); lower = more
  /// anomalous. No dropout, no latent noise.
  Mat anomaly_score(const std::vector<data::EncodedRecord>& batch) const;

  /// Per-record summed squared reconstruction error; higher = anomalous.
  Mat reconstruction_score(const std::vector<data::EncodedRecord>& batch) const;

  std::vector<nn::ParamRef> ae_params();
  std::vector<nn::ParamRef> estimator_params();
  std::vector<nn::ParamRef> all_params();
  void zero_grad();

  /// Digest over autoencoder + transform parameter bytes; the phase-3
  /// freeze check compares it across epochs.
  std::uint64_t ae_param_digest() const;

  void save(const std::string& path) const;
  static ChadModel load(const std::string& path);

  nn::Mlp& encoder() { return encoder_; }
  nn::Mlp& decoder() { return decoder_; }
  nn::Mlp& estimator() { return estimator_; }

 private:
  ArchConfig arch_;
  std::vector<FieldTransform> fields_;
  ContTransform cont_;
  nn::Mlp encoder_{{1, 1}, {nn::Activation::Identity}};
  nn::Mlp decoder_{{1, 1}, {nn::Activation::Identity}};
  nn::Mlp estimator_{{1, 1}, {nn::Activation::Identity}};
  std::size_t latent_dim_ = 0;
  std::size_t transformed_dim_ = 0;
  std::size_t target_dim_ = 0;
  std::uint64_t schema_fingerprint_ = 0;

  Mat cont_block(const std::vector<data::EncodedRecord>& batch) const;
};

/// Contrastive estimation loss: -gamma * sum ln f(pos) - sum ln(1 - mean_k
/// f(neg)). pos is (N x 1), neg is (N x K) of estimator outputs on noisy
/// negative latents. Log arguments clamp to [1e-7, 1-1e-7]; gradients pass
/// straight through the clamp. Non-finite scores raise a Train error.
real_t estimation_loss(const Mat& pos, const Mat& neg, real_t gamma,
                       Mat* dpos = nullptr, Mat* dneg = nullptr);

}  // namespace chad::model
