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

#include "chad/nn.hpp"

#include <cmath>
#include <cstring>

#include "chad/common.hpp"
#include "chad/kernels.hpp"

namespace chad::nn {

namespace ck = chad::kernels;

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Identity:
      return "identity";
    case Activation::Tanh:
      return "tanh";
    case Activation::Sigmoid:
      return "sigmoid";
  }
  return "?";
}

Activation activation_from_name(const std::string& name) {
  if (name == "identity") return Activation::Identity;
  if (name == "tanh") return Activation::Tanh;
  if (name == "sigmoid") return Activation::Sigmoid;
  fail(ErrorKind::Config, "unknown activation: " + name);
}

namespace {

void apply_activation(Activation a, Mat& y) {
  real_t* p = y.data();
  const std::size_t n = y.size();
  switch (a) {
    case Activation::Identity:
      return;
    case Activation::Tanh:
      for (std::size_t i = 0; i < n; ++i) p[i] = std::tanh(p[i]);
      return;
    case Activation::Sigmoid:
      for (std::size_t i = 0; i < n; ++i)
        p[i] = real_t(1) / (real_t(1) + std::exp(-p[i]));
      return;
  }
}

// dpre = upstream .* act'(y), with act' written in terms of the output y.
Mat activation_grad(Activation a, const Mat& upstream, const Mat& y) {
  Mat dpre = upstream;
  real_t* d = dpre.data();
  const real_t* o = y.data();
  const std::size_t n = dpre.size();
  switch (a) {
    case Activation::Identity:
      break;
    case Activation::Tanh:
      for (std::size_t i = 0; i < n; ++i) d[i] *= real_t(1) - o[i] * o[i];
      break;
    case Activation::Sigmoid:
      for (std::size_t i = 0; i < n; ++i) d[i] *= o[i] * (real_t(1) - o[i]);
      break;
  }
  return dpre;
}

}  // namespace

DenseLayer::DenseLayer(std::size_t in_dim, std::size_t out_dim, Activation act)
    : in_dim_(in_dim),
      out_dim_(out_dim),
      act_(act),
      w_(in_dim, out_dim),
      b_(1, out_dim),
      dw_(in_dim, out_dim),
      db_(1, out_dim) {
  if (in_dim == 0 || out_dim == 0)
    fail(ErrorKind::Internal, "dense layer with zero dimension");
}

void DenseLayer::init_params(RngStream& rng) {
  const double bound =
      std::sqrt(6.0 / static_cast<double>(in_dim_ + out_dim_));
  for (std::size_t i = 0; i < w_.size(); ++i)
    w_.data()[i] = static_cast<real_t>(rng.uniform(-bound, bound));
  b_.set_zero();
}

Mat DenseLayer::forward(const Mat& x, DenseCache& cache) const {
  require_shape(x, x.rows(), in_dim_, "dense input");
  Mat y(x.rows(), out_dim_);
  ck::gemm_nn(x.data(), w_.data(), y.data(), x.rows(), in_dim_, out_dim_);
  for (std::size_t i = 0; i < y.rows(); ++i)
    ck::axpy(out_dim_, real_t(1), b_.data(), y.row(i).data());
  apply_activation(act_, y);
  cache.input = x;
  cache.output = y;
  return y;
}

Mat DenseLayer::backward(const Mat& upstream, const DenseCache& cache) {
  require_shape(upstream, cache.output.rows(), out_dim_, "dense upstream");
  if (cache.input.rows() != upstream.rows())
    fail(ErrorKind::Internal, "dense backward: stale cache");
  const Mat dpre = activation_grad(act_, upstream, cache.output);
  const std::size_t batch = upstream.rows();
  ck::gemm_tn(cache.input.data(), dpre.data(), dw_.data(), in_dim_, batch,
              out_dim_, /*accumulate=*/true);
  for (std::size_t i = 0; i < batch; ++i)
    ck::axpy(out_dim_, real_t(1), dpre.row(i).data(), db_.data());
  Mat dx(batch, in_dim_);
  ck::gemm_nt(dpre.data(), w_.data(), dx.data(), batch, out_dim_, in_dim_);
  return dx;
}

void DenseLayer::zero_grad() {
  dw_.set_zero();
  db_.set_zero();
}

std::vector<ParamRef> DenseLayer::params(const std::string& prefix) {
  return {{prefix + ".w", &w_, &dw_}, {prefix + ".b", &b_, &db_}};
}

Dropout::Dropout(real_t rate) : rate_(rate) {
  if (!(rate >= real_t(0) && rate < real_t(1)))
    fail(ErrorKind::Config, "dropout rate must be in [0,1)");
}

Mat Dropout::forward(const Mat& x, bool training, RngStream* rng,
                     DropoutCache& cache) const {
  if (!training || rate_ == real_t(0)) {
    cache.mask = Mat();
    return x;
  }
  if (rng == nullptr)
    fail(ErrorKind::Internal, "training-mode dropout needs an rng");
  const real_t keep_scale = real_t(1) / (real_t(1) - rate_);
  cache.mask.assign(x.rows(), x.cols());
  Mat y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const real_t m = rng->u01() < static_cast<double>(rate_)
                         ? real_t(0)
                         : keep_scale;
    cache.mask.data()[i] = m;
    y.data()[i] = x.data()[i] * m;
  }
  return y;
}

Mat Dropout::backward(const Mat& upstream, const DropoutCache& cache) const {
  if (cache.mask.size() == 0) return upstream;
  if (!cache.mask.same_shape(upstream))
    fail(ErrorKind::Internal, "dropout backward: mask/upstream mismatch");
  Mat dx = upstream;
  for (std::size_t i = 0; i < dx.size(); ++i)
    dx.data()[i] *= cache.mask.data()[i];
  return dx;
}

real_t mse_loss(const Mat& x, const Mat& x_hat, Mat* grad_x_hat) {
  if (!x.same_shape(x_hat))
    fail(ErrorKind::Internal, "mse_loss: shape mismatch");
  if (x.rows() == 0) fail(ErrorKind::Internal, "mse_loss: empty batch");
  const real_t n = static_cast<real_t>(x.rows());
  const real_t loss = ck::sum_sq_diff(x.size(), x.data(), x_hat.data()) / n;
  if (grad_x_hat != nullptr) {
    grad_x_hat->assign(x.rows(), x.cols());
    const real_t c = real_t(2) / n;
    for (std::size_t i = 0; i < x.size(); ++i)
      grad_x_hat->data()[i] = c * (x_hat.data()[i] - x.data()[i]);
  }
  return loss;
}

Adam::Adam(real_t lr, real_t beta1, real_t beta2, real_t eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  if (!(lr > real_t(0))) fail(ErrorKind::Config, "adam: lr must be positive");
  if (!(beta1 > real_t(0) && beta1 < real_t(1) && beta2 > real_t(0) &&
        beta2 < real_t(1)))
    fail(ErrorKind::Config, "adam: betas must lie in (0,1)");
}

void Adam::step(const std::vector<ParamRef>& params) {
  for (const ParamRef& p : params) {
    if (p.value == nullptr || p.grad == nullptr)
      fail(ErrorKind::Internal, "adam: null param block " + p.name);
    if (!p.grad->all_finite())
      fail(ErrorKind::Train, "non-finite gradient in block " + p.name);
    BlockState& st = state_[p.name];
    if (st.m.empty()) {
      st.m.assign(p.value->size(), real_t(0));
      st.v.assign(p.value->size(), real_t(0));
    } else if (st.m.size() != p.value->size()) {
      fail(ErrorKind::Internal, "adam: block size changed: " + p.name);
    }
    ++st.steps;
    ck::adam_update(p.value->size(), p.value->data(), p.grad->data(),
                    st.m.data(), st.v.data(), beta1_, beta2_, eps_, lr_,
                    st.steps);
  }
}

void Adam::reset() { state_.clear(); }

Mlp::Mlp(const std::vector<std::size_t>& widths,
         const std::vector<Activation>& acts,
         const std::vector<real_t>& drop_rates) {
  if (widths.size() < 2) fail(ErrorKind::Config, "mlp needs >= 2 widths");
  if (acts.size() != widths.size() - 1)
    fail(ErrorKind::Config, "mlp: one activation per layer required");
  if (!drop_rates.empty() && drop_rates.size() != acts.size())
    fail(ErrorKind::Config, "mlp: one dropout rate per layer required");
  for (std::size_t i = 0; i + 1 < widths.size(); ++i)
    layers_.emplace_back(widths[i], widths[i + 1], acts[i]);
  for (std::size_t i = 0; i < layers_.size(); ++i)
    drops_.emplace_back(drop_rates.empty() ? real_t(0) : drop_rates[i]);
}

void Mlp::init_params(RngStream& rng) {
  for (auto& l : layers_) l.init_params(rng);
}

Mat Mlp::forward(const Mat& x, bool training, RngStream* rng,
                 MlpCache& cache) const {
  cache.layers.assign(layers_.size(), DenseCache{});
  cache.drops.assign(layers_.size(), DropoutCache{});
  Mat h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i].forward(h, cache.layers[i]);
    h = drops_[i].forward(h, training, rng, cache.drops[i]);
  }
  return h;
}

Mat Mlp::backward(const Mat& upstream, const MlpCache& cache) {
  if (cache.layers.size() != layers_.size())
    fail(ErrorKind::Internal, "mlp backward: missing cache");
  Mat g = upstream;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    g = drops_[i].backward(g, cache.drops[i]);
    g = layers_[i].backward(g, cache.layers[i]);
  }
  return g;
}

std::vector<ParamRef> Mlp::params(const std::string& prefix) {
  std::vector<ParamRef> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    auto ps = layers_[i].params(prefix + ".l" + std::to_string(i));
    out.insert(out.end(), ps.begin(), ps.end());
  }
  return out;
}

void Mlp::zero_grad() {
  for (auto& l : layers_) l.zero_grad();
}

std::size_t Mlp::n_params() const {
  std::size_t n = 0;
  for (const auto& l : layers_)
    n += l.weights().size() + l.bias().size();
  return n;
}

bool Mlp::has_dropout() const {
  for (const auto& d : drops_)
    if (d.rate() > real_t(0)) return true;
  return false;
}

real_t gradcheck(const std::vector<ParamRef>& params,
                 const std::function<real_t()>& loss,
                 const std::function<void()>& compute_grads, real_t h,
                 std::string* worst) {
  compute_grads();
  std::vector<Mat> analytic;
  analytic.reserve(params.size());
  for (const ParamRef& p : params) analytic.push_back(*p.grad);

  real_t max_rel = real_t(0);
  for (std::size_t b = 0; b < params.size(); ++b) {
    Mat& value = *params[b].value;
    for (std::size_t i = 0; i < value.size(); ++i) {
      const real_t orig = value.data()[i];
      value.data()[i] = orig + h;
      const real_t lp = loss();
      value.data()[i] = orig - h;
      const real_t lm = loss();
      value.data()[i] = orig;
      const real_t cd = (lp - lm) / (real_t(2) * h);
      const real_t a = analytic[b].data()[i];
      const real_t denom =
          std::max({std::abs(a), std::abs(cd), real_t(1e-8)});
      const real_t rel = std::abs(a - cd) / denom;
      if (rel > max_rel) {
        max_rel = rel;
        if (worst != nullptr)
          *worst = params[b].name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return max_rel;
}

real_t gradcheck_mlp(Mlp& net, const Mat& input, const Mat& target, real_t h) {
  if (net.has_dropout())
    fail(ErrorKind::Internal,
         "gradcheck requires a deterministic forward pass; disable dropout");
  auto loss = [&]() {
    MlpCache cache;
    const Mat out = net.forward(input, /*training=*/false, nullptr, cache);
    return mse_loss(target, out);
  };
  auto compute = [&]() {
    net.zero_grad();
    MlpCache cache;
    const Mat out = net.forward(input, /*training=*/false, nullptr, cache);
    Mat g;
    mse_loss(target, out, &g);
    net.backward(g, cache);
  };
  return gradcheck(net.params("net"), loss, compute, h);
}

}  // namespace chad::nn
