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
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "chad/matrix.hpp"
#include "chad/rng.hpp"

// Dense NN substrate: layers, dropout, MSE, Adam, gradcheck. Caches are
// caller-owned so one layer can serve several forward streams in a single
// step (e.g. positives and negatives) before any backward runs. backward()
// accumulates into the stored parameter grads; call zero_grad() per batch.

namespace chad::nn {

enum class Activation { Identity, Tanh, Sigmoid };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

struct DenseCache {
  Mat input;   // batch fed to forward
  Mat output;  // post-activation; derivatives are expressed through it
};

/// name identifies the block for Adam state and error messages.
struct ParamRef {
  std::string name;
  Mat* value = nullptr;
  Mat* grad = nullptr;
};

class DenseLayer {
 public:
  DenseLayer(std::size_t in_dim, std::size_t out_dim, Activation act);

  /// Glorot-uniform weights in +-sqrt(6/(fan_in+fan_out)); zero bias.
  void init_params(RngStream& rng);

  /// y = act(x W + b), x is (batch x in_dim). Fills cache.
  Mat forward(const Mat& x, DenseCache& cache) const;

  /// upstream is dL/dy. Accumulates into weight/bias grads, returns dL/dx.
  Mat backward(const Mat& upstream, const DenseCache& cache);

  std::size_t in_dim() const { return in_dim_; }
  std::size_t out_dim() const { return out_dim_; }
  Activation activation() const { return act_; }

  Mat& weights() { return w_; }
  const Mat& weights() const { return w_; }
  Mat& bias() { return b_; }
  const Mat& bias() const { return b_; }

  void zero_grad();
  std::vector<ParamRef> params(const std::string& prefix);

 private:
  std::size_t in_dim_, out_dim_;
  Activation act_;
  Mat w_;   // in_dim x out_dim
  Mat b_;   // 1 x out_dim
  Mat dw_;
  Mat db_;
};

struct DropoutCache {
  Mat mask;  // empty when the pass was an identity (inference or rate 0)
};

/// Inverted dropout: train-time zeroing with 1/(1-rate) survivor scaling,
/// inference is exactly the identity.
class Dropout {
 public:
  explicit Dropout(real_t rate);
  real_t rate() const { return rate_; }

  Mat forward(const Mat& x, bool training, RngStream* rng,
              DropoutCache& cache) const;
  Mat backward(const Mat& upstream, const DropoutCache& cache) const;

 private:
  real_t rate_;
};

/// (1/N) * sum of squared errors, N = batch rows. Gradient wrt x_hat.
real_t mse_loss(const Mat& x, const Mat& x_hat, Mat* grad_x_hat = nullptr);

class Adam {
 public:
  explicit Adam(real_t lr, real_t beta1 = real_t(0.9),
                real_t beta2 = real_t(0.999), real_t eps = real_t(1e-8));

  /// One update on the given blocks. State is keyed by block name, with a
  /// per-block step count, so a block that sits out some batches keeps
  /// correct bias correction. Throws on non-finite gradients.
  void step(const std::vector<ParamRef>& params);

  /// Drop all moment state (fresh optimizer, e.g. at a phase boundary).
  void reset();

  real_t lr() const { return lr_; }
  void set_lr(real_t lr) { lr_ = lr; }

 private:
  struct BlockState {
    std::vector<real_t> m, v;
    std::int64_t steps = 0;
  };
  real_t lr_, beta1_, beta2_, eps_;
  std::map<std::string, BlockState> state_;
};

struct MlpCache {
  std::vector<DenseCache> layers;
  std::vector<DropoutCache> drops;
};

/// Plain stack of DenseLayer with optional per-layer dropout applied after
/// the activation. drop_rates[i] follows layer i; empty means no dropout.
class Mlp {
 public:
  Mlp(const std::vector<std::size_t>& widths,
      const std::vector<Activation>& acts,
      const std::vector<real_t>& drop_rates = {});

  void init_params(RngStream& rng);
  Mat forward(const Mat& x, bool training, RngStream* rng,
              MlpCache& cache) const;
  Mat backward(const Mat& upstream, const MlpCache& cache);

  std::vector<ParamRef> params(const std::string& prefix);
  void zero_grad();

  std::size_t n_layers() const { return layers_.size(); }
  DenseLayer& layer(std::size_t i) { return layers_[i]; }
  const DenseLayer& layer(std::size_t i) const { return layers_[i]; }
  std::size_t in_dim() const { return layers_.front().in_dim(); }
  std::size_t out_dim() const { return layers_.back().out_dim(); }
  std::size_t n_params() const;
  bool has_dropout() const;

 private:
  std::vector<DenseLayer> layers_;
  std::vector<Dropout> drops_;
};

/// Central-difference check of dL/dtheta for a deterministic loss.
/// compute_grads must zero and then fill every ParamRef grad; loss must be
/// a pure function of the current parameter values. Returns the max over
/// parameters of |analytic - cd| / max(|analytic|, |cd|, 1e-8).
real_t gradcheck(const std::vector<ParamRef>& params,
                 const std::function<real_t()>& loss,
                 const std::function<void()>& compute_grads,
                 real_t h = real_t(1e-5), std::string* worst = nullptr);

/// Convenience: gradcheck an Mlp under MSE against a fixed target.
/// Rejects networks with live dropout (non-deterministic forward).
real_t gradcheck_mlp(Mlp& net, const Mat& input, const Mat& target,
                     real_t h = real_t(1e-5));

}  // namespace chad::nn
