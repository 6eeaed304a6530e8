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

#include "chad/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "chad/kernels.hpp"
#include "io_util.hpp"

namespace chad::model {

namespace ck = chad::kernels;

namespace {

constexpr char kModelMagic[5] = "CHMD";
constexpr std::uint32_t kModelVersion = 1;

std::vector<std::size_t> decoder_widths(
    const std::vector<std::size_t>& encoder_widths, std::size_t target_dim) {
  // Mirror of the encoder: latent back up through the reversed interior
  // widths to the target dimension.
  std::vector<std::size_t> w;
  w.push_back(encoder_widths.back());
  for (std::size_t i = encoder_widths.size() - 1; i-- > 0;)
    w.push_back(encoder_widths[i]);
  w.push_back(target_dim);
  return w;
}

nn::Mlp make_stack(const std::vector<std::size_t>& widths, real_t dropout,
                   bool final_sigmoid, real_t final_dropout) {
  const std::size_t n_layers = widths.size() - 1;
  std::vector<nn::Activation> acts(n_layers, nn::Activation::Tanh);
  if (final_sigmoid) acts.back() = nn::Activation::Sigmoid;
  std::vector<real_t> drops(n_layers, dropout);
  drops.back() = final_dropout;
  return nn::Mlp(widths, acts, drops);
}

void init_glorot(Mat& m, std::size_t fan_in, std::size_t fan_out,
                 RngStream& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (std::size_t i = 0; i < m.size(); ++i)
    m.data()[i] = static_cast<real_t>(rng.uniform(-bound, bound));
}

}  // namespace

ChadModel ChadModel::build(const data::Schema& schema, const ArchConfig& arch,
                           RngStream& rng) {
  if (schema.k() == 0 && schema.r() == 0)
    fail(ErrorKind::Config, "cannot build a model over an empty schema");
  if (schema.r() > 0 && !schema.fitted())
    fail(ErrorKind::Config, "schema must be fitted before building a model");
  if (arch.encoder_widths.empty())
    fail(ErrorKind::Config, "encoder widths must be non-empty");

  ChadModel m;
  m.arch_ = arch;
  m.schema_fingerprint_ = schema.fingerprint();

  std::size_t d_t = 0, d_target = 0;
  for (const auto& cf : schema.cats) {
    FieldTransform ft;
    ft.arity = cf.arity();
    if (ft.arity == 0) fail(ErrorKind::Config, "field with no values");
    if (ft.arity > arch.embed_threshold) {
      ft.embedding = true;
      ft.out_dim = std::min<std::size_t>(
          arch.embed_max_dim,
          static_cast<std::size_t>(
              std::ceil(std::sqrt(static_cast<double>(ft.arity)))));
      ft.emb.assign(ft.arity, ft.out_dim);
      ft.demb.assign(ft.arity, ft.out_dim);
      init_glorot(ft.emb, ft.arity, ft.out_dim, rng);
    } else {
      ft.out_dim = ft.arity;
    }
    d_t += ft.out_dim;
    d_target += ft.arity;
    m.fields_.push_back(std::move(ft));
  }
  m.cont_.in_dim = schema.r();
  if (schema.r() > arch.cont_proj_width) {
    m.cont_.linear = true;
    m.cont_.out_dim = arch.cont_proj_width;
    m.cont_.proj.assign(schema.r(), m.cont_.out_dim);
    m.cont_.dproj.assign(schema.r(), m.cont_.out_dim);
    init_glorot(m.cont_.proj, schema.r(), m.cont_.out_dim, rng);
  } else {
    m.cont_.out_dim = schema.r();
  }
  d_t += m.cont_.out_dim;
  d_target += schema.r();

  m.transformed_dim_ = d_t;
  m.target_dim_ = d_target;
  m.latent_dim_ = arch.encoder_widths.back();

  std::vector<std::size_t> enc_w;
  enc_w.push_back(d_t);
  enc_w.insert(enc_w.end(), arch.encoder_widths.begin(),
               arch.encoder_widths.end());
  m.encoder_ = make_stack(enc_w, arch.ae_dropout, /*final_sigmoid=*/false,
                          arch.ae_dropout);
  m.decoder_ = make_stack(decoder_widths(arch.encoder_widths, d_target),
                          arch.ae_dropout, /*final_sigmoid=*/true, real_t(0));
  const std::size_t est_hidden = (m.latent_dim_ + 1) / 2;
  m.estimator_ = nn::Mlp({m.latent_dim_, est_hidden, 1},
                         {nn::Activation::Tanh, nn::Activation::Sigmoid},
                         {arch.est_dropout, real_t(0)});
  m.encoder_.init_params(rng);
  m.decoder_.init_params(rng);
  m.estimator_.init_params(rng);
  return m;
}

Mat ChadModel::cont_block(
    const std::vector<data::EncodedRecord>& batch) const {
  const std::size_t n = batch.size();
  Mat xr(n, cont_.in_dim);
  for (std::size_t i = 0; i < n; ++i) {
    if (batch[i].cont.size() != cont_.in_dim)
      fail(ErrorKind::Data, "record continuous width does not match model");
    for (std::size_t j = 0; j < cont_.in_dim; ++j)
      xr(i, j) = batch[i].cont[j];
  }
  return xr;
}

Mat ChadModel::transform_input(
    const std::vector<data::EncodedRecord>& batch) const {
  const std::size_t n = batch.size();
  Mat xt(n, transformed_dim_);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& rec = batch[i];
    if (rec.cat.size() != fields_.size())
      fail(ErrorKind::Data, "record field count does not match model");
    std::size_t off = 0;
    for (std::size_t w = 0; w < fields_.size(); ++w) {
      const FieldTransform& ft = fields_[w];
      const std::uint32_t v = rec.cat[w];
      if (v >= ft.arity)
        fail(ErrorKind::Data, "categorical index out of arity range");
      if (ft.embedding) {
        for (std::size_t j = 0; j < ft.out_dim; ++j)
          xt(i, off + j) = ft.emb(v, j);
      } else {
        xt(i, off + v) = real_t(1);
      }
      off += ft.out_dim;
    }
  }
  if (cont_.in_dim > 0) {
    const std::size_t off = transformed_dim_ - cont_.out_dim;
    const Mat xr = cont_block(batch);
    if (cont_.linear) {
      Mat prj(n, cont_.out_dim);
      ck::gemm_nn(xr.data(), cont_.proj.data(), prj.data(), n, cont_.in_dim,
                  cont_.out_dim);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < cont_.out_dim; ++j)
          xt(i, off + j) = prj(i, j);
    } else {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < cont_.out_dim; ++j)
          xt(i, off + j) = xr(i, j);
    }
  }
  return xt;
}

void ChadModel::transform_backward(
    const Mat& dxt, const std::vector<data::EncodedRecord>& batch) {
  const std::size_t n = batch.size();
  require_shape(dxt, n, transformed_dim_, "transform upstream");
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t off = 0;
    for (std::size_t w = 0; w < fields_.size(); ++w) {
      FieldTransform& ft = fields_[w];
      if (ft.embedding) {
        const std::uint32_t v = batch[i].cat[w];
        for (std::size_t j = 0; j < ft.out_dim; ++j)
          ft.demb(v, j) += dxt(i, off + j);
      }
      off += ft.out_dim;
    }
  }
  if (cont_.linear) {
    const std::size_t off = transformed_dim_ - cont_.out_dim;
    const Mat xr = cont_block(batch);
    Mat dslice(n, cont_.out_dim);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < cont_.out_dim; ++j)
        dslice(i, j) = dxt(i, off + j);
    ck::gemm_tn(xr.data(), dslice.data(), cont_.dproj.data(), cont_.in_dim, n,
                cont_.out_dim, /*accumulate=*/true);
  }
}

Mat ChadModel::encode(const std::vector<data::EncodedRecord>& batch,
                      bool training, RngStream* rng,
                      EncodeCache& cache) const {
  cache.xt = transform_input(batch);
  return const_cast<nn::Mlp&>(encoder_).forward(cache.xt, training, rng,
                                                cache.mlp);
}

Mat ChadModel::decode(const Mat& z, bool training, RngStream* rng,
                      nn::MlpCache& cache) const {
  return const_cast<nn::Mlp&>(decoder_).forward(z, training, rng, cache);
}

Mat ChadModel::estimator_forward(const Mat& z, bool training, RngStream* rng,
                                 nn::MlpCache& cache) const {
  return const_cast<nn::Mlp&>(estimator_).forward(z, training, rng, cache);
}

void ChadModel::encoder_backward(
    const Mat& dz, const EncodeCache& cache,
    const std::vector<data::EncodedRecord>& batch) {
  const Mat dxt = encoder_.backward(dz, cache.mlp);
  transform_backward(dxt, batch);
}

Mat ChadModel::decoder_backward(const Mat& dxhat, const nn::MlpCache& cache) {
  return decoder_.backward(dxhat, cache);
}

Mat ChadModel::estimator_backward(const Mat& dscore,
                                  const nn::MlpCache& cache) {
  return estimator_.backward(dscore, cache);
}

Mat ChadModel::expand_target(
    const std::vector<data::EncodedRecord>& batch) const {
  const std::size_t n = batch.size();
  Mat t(n, target_dim_);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t off = 0;
    for (std::size_t w = 0; w < fields_.size(); ++w) {
      const std::uint32_t v = batch[i].cat[w];
      if (v >= fields_[w].arity)
        fail(ErrorKind::Data, "categorical index out of arity range");
      t(i, off + v) = real_t(1);
      off += fields_[w].arity;
    }
    for (std::size_t j = 0; j < cont_.in_dim; ++j)
      t(i, off + j) = batch[i].cont[j];
  }
  return t;
}

real_t ChadModel::reconstruction_loss(
    const std::vector<data::EncodedRecord>& batch, const Mat& x_hat,
    Mat* grad_x_hat) const {
  return nn::mse_loss(expand_target(batch), x_hat, grad_x_hat);
}

Mat ChadModel::anomaly_score(
    const std::vector<data::EncodedRecord>& batch) const {
  EncodeCache ec;
  const Mat z = encode(batch, /*training=*/false, nullptr, ec);
  nn::MlpCache sc;
  return estimator_forward(z, /*training=*/false, nullptr, sc);
}

Mat ChadModel::reconstruction_score(
    const std::vector<data::EncodedRecord>& batch) const {
  EncodeCache ec;
  const Mat z = encode(batch, /*training=*/false, nullptr, ec);
  nn::MlpCache dc;
  const Mat x_hat = decode(z, /*training=*/false, nullptr, dc);
  const Mat target = expand_target(batch);
  Mat scores(batch.size(), 1);
  for (std::size_t i = 0; i < batch.size(); ++i)
    scores(i, 0) = ck::sum_sq_diff(target_dim_, target.row(i).data(),
                                   x_hat.row(i).data());
  return scores;
}

std::vector<nn::ParamRef> ChadModel::ae_params() {
  std::vector<nn::ParamRef> out;
  for (std::size_t w = 0; w < fields_.size(); ++w)
    if (fields_[w].embedding)
      out.push_back({"emb.f" + std::to_string(w), &fields_[w].emb,
                     &fields_[w].demb});
  if (cont_.linear) out.push_back({"cont.proj", &cont_.proj, &cont_.dproj});
  auto enc = encoder_.params("enc");
  out.insert(out.end(), enc.begin(), enc.end());
  auto dec = decoder_.params("dec");
  out.insert(out.end(), dec.begin(), dec.end());
  return out;
}

std::vector<nn::ParamRef> ChadModel::estimator_params() {
  return estimator_.params("est");
}

std::vector<nn::ParamRef> ChadModel::all_params() {
  auto out = ae_params();
  auto est = estimator_params();
  out.insert(out.end(), est.begin(), est.end());
  return out;
}

void ChadModel::zero_grad() {
  for (auto& f : fields_)
    if (f.embedding) f.demb.set_zero();
  if (cont_.linear) cont_.dproj.set_zero();
  encoder_.zero_grad();
  decoder_.zero_grad();
  estimator_.zero_grad();
}

std::uint64_t ChadModel::ae_param_digest() const {
  std::uint64_t h = fnv1a("chad-ae-params");
  auto& self = const_cast<ChadModel&>(*this);
  for (const auto& p : self.ae_params()) {
    h = fnv1a(p.name.data(), p.name.size(), h);
    for (std::size_t i = 0; i < p.value->size(); ++i) {
      const double v = static_cast<double>(p.value->data()[i]);
      h = fnv1a(&v, sizeof(v), h);
    }
  }
  return h;
}

void ChadModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Data, "cannot write model: " + path);
  io::put_bytes(out, kModelMagic, 4);
  io::put_u32(out, kModelVersion);
  io::put_u64(out, schema_fingerprint_);
  io::put_f64(out, static_cast<double>(arch_.ae_dropout));
  io::put_f64(out, static_cast<double>(arch_.est_dropout));
  io::put_u64(out, arch_.embed_threshold);
  io::put_u64(out, arch_.embed_max_dim);
  io::put_u64(out, arch_.cont_proj_width);
  io::put_u64(out, arch_.encoder_widths.size());
  for (std::size_t w : arch_.encoder_widths) io::put_u64(out, w);
  io::put_u64(out, fields_.size());
  for (const auto& f : fields_) {
    io::put_u8(out, f.embedding ? 1 : 0);
    io::put_u64(out, f.arity);
    io::put_u64(out, f.out_dim);
  }
  io::put_u8(out, cont_.linear ? 1 : 0);
  io::put_u64(out, cont_.in_dim);
  io::put_u64(out, cont_.out_dim);

  // all_params() fixes the block order; save and load share it.
  auto blocks = const_cast<ChadModel&>(*this).all_params();
  io::put_u64(out, blocks.size());
  for (const auto& p : blocks) {
    io::put_u64(out, p.value->rows());
    io::put_u64(out, p.value->cols());
    for (std::size_t i = 0; i < p.value->size(); ++i)
      io::put_f64(out, static_cast<double>(p.value->data()[i]));
  }
  if (!out) fail(ErrorKind::Data, "short write saving model: " + path);
}

ChadModel ChadModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Data, "cannot open model: " + path);
  io::expect_magic(in, kModelMagic, "model");
  const std::uint32_t ver = io::get_u32(in);
  if (ver != kModelVersion)
    fail(ErrorKind::Data, "unsupported model version " + std::to_string(ver));

  ChadModel m;
  m.schema_fingerprint_ = io::get_u64(in);
  m.arch_.ae_dropout = static_cast<real_t>(io::get_f64(in));
  m.arch_.est_dropout = static_cast<real_t>(io::get_f64(in));
  m.arch_.embed_threshold = io::get_u64(in);
  m.arch_.embed_max_dim = io::get_u64(in);
  m.arch_.cont_proj_width = io::get_u64(in);
  const std::uint64_t nw = io::get_u64(in);
  if (nw == 0 || nw > 64) fail(ErrorKind::Data, "model: bad width count");
  m.arch_.encoder_widths.resize(nw);
  for (auto& w : m.arch_.encoder_widths) w = io::get_u64(in);

  const std::uint64_t k = io::get_u64(in);
  std::size_t d_t = 0, d_target = 0;
  m.fields_.resize(k);
  for (auto& f : m.fields_) {
    f.embedding = io::get_u8(in) != 0;
    f.arity = io::get_u64(in);
    f.out_dim = io::get_u64(in);
    if (f.arity == 0 || f.out_dim == 0)
      fail(ErrorKind::Data, "model: bad field dims");
    if (f.embedding) {
      f.emb.assign(f.arity, f.out_dim);
      f.demb.assign(f.arity, f.out_dim);
    } else if (f.out_dim != f.arity) {
      fail(ErrorKind::Data, "model: one-hot dim mismatch");
    }
    d_t += f.out_dim;
    d_target += f.arity;
  }
  m.cont_.linear = io::get_u8(in) != 0;
  m.cont_.in_dim = io::get_u64(in);
  m.cont_.out_dim = io::get_u64(in);
  if (m.cont_.linear) {
    m.cont_.proj.assign(m.cont_.in_dim, m.cont_.out_dim);
    m.cont_.dproj.assign(m.cont_.in_dim, m.cont_.out_dim);
  } else if (m.cont_.out_dim != m.cont_.in_dim) {
    fail(ErrorKind::Data, "model: continuous dim mismatch");
  }
  d_t += m.cont_.out_dim;
  d_target += m.cont_.in_dim;

  m.transformed_dim_ = d_t;
  m.target_dim_ = d_target;
  m.latent_dim_ = m.arch_.encoder_widths.back();

  std::vector<std::size_t> enc_w;
  enc_w.push_back(d_t);
  enc_w.insert(enc_w.end(), m.arch_.encoder_widths.begin(),
               m.arch_.encoder_widths.end());
  m.encoder_ = make_stack(enc_w, m.arch_.ae_dropout, false, m.arch_.ae_dropout);
  m.decoder_ = make_stack(decoder_widths(m.arch_.encoder_widths, d_target),
                          m.arch_.ae_dropout, true, real_t(0));
  const std::size_t est_hidden = (m.latent_dim_ + 1) / 2;
  m.estimator_ = nn::Mlp({m.latent_dim_, est_hidden, 1},
                         {nn::Activation::Tanh, nn::Activation::Sigmoid},
                         {m.arch_.est_dropout, real_t(0)});

  const std::uint64_t n_blocks = io::get_u64(in);
  auto blocks = m.all_params();
  if (n_blocks != blocks.size())
    fail(ErrorKind::Data, "model: parameter block count mismatch");
  for (auto& p : blocks) {
    const std::uint64_t rows = io::get_u64(in);
    const std::uint64_t cols = io::get_u64(in);
    if (rows != p.value->rows() || cols != p.value->cols())
      fail(ErrorKind::Data, "model: block shape mismatch at " + p.name);
    for (std::size_t i = 0; i < p.value->size(); ++i)
      p.value->data()[i] = static_cast<real_t>(io::get_f64(in));
  }
  return m;
}

real_t estimation_loss(const Mat& pos, const Mat& neg, real_t gamma,
                       Mat* dpos, Mat* dneg) {
  if (pos.cols() != 1) fail(ErrorKind::Internal, "estimation_loss: pos shape");
  if (neg.rows() != pos.rows())
    fail(ErrorKind::Internal, "estimation_loss: batch mismatch");
  if (neg.cols() < 1) fail(ErrorKind::Internal, "estimation_loss: K < 1");
  if (!pos.all_finite() || !neg.all_finite())
    fail(ErrorKind::Train, "non-finite score in estimation loss");

  const std::size_t n = pos.rows();
  const std::size_t kk = neg.cols();
  const real_t lo = real_t(1e-7);
  const real_t hi = real_t(1) - real_t(1e-7);
  auto clamp = [&](real_t v) { return std::clamp(v, lo, hi); };

  if (dpos != nullptr) dpos->assign(n, 1);
  if (dneg != nullptr) dneg->assign(n, kk);

  real_t loss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const real_t sp = clamp(pos(i, 0));
    loss -= gamma * std::log(sp);
    if (dpos != nullptr) (*dpos)(i, 0) = -gamma / sp;
    real_t mean_neg = 0;
    for (std::size_t j = 0; j < kk; ++j) mean_neg += neg(i, j);
    mean_neg /= static_cast<real_t>(kk);
    const real_t u = clamp(real_t(1) - mean_neg);
    loss -= std::log(u);
    if (dneg != nullptr) {
      const real_t g = real_t(1) / (static_cast<real_t>(kk) * u);
      for (std::size_t j = 0; j < kk; ++j) (*dneg)(i, j) = g;
    }
  }
  return loss;
}

}  // namespace chad::model
