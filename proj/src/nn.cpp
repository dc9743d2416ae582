// src/nn.cpp

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "emogest/nn.hpp"

#include <cmath>

#include "emogest/errors.hpp"

namespace emogest {
namespace nn {

ad::Var make_param(int rows, int cols, Rng& rng, double std) {
  return ad::Var(rng.normal_tensor(rows, cols, std), /*requires_grad=*/true);
}

Tensor sinusoidal_embedding(double t, int dim) {
  Tensor out(1, dim);
  const int half = dim / 2;
  for (int i = 0; i < half; ++i) {
    const double freq = std::pow(10000.0, -2.0 * i / static_cast<double>(dim));
    out.at(0, 2 * i) = std::sin(t * freq);
    out.at(0, 2 * i + 1) = std::cos(t * freq);
  }
  if (dim % 2 == 1) out.at(0, dim - 1) = std::sin(t * std::pow(10000.0, -1.0));
  return out;
}

Linear::Linear(int in_dim, int out_dim, Rng& rng) {
  const double std = std::sqrt(2.0 / static_cast<double>(in_dim + out_dim));
  weight = make_param(in_dim, out_dim, rng, std);
  bias = ad::Var(Tensor::zeros(1, out_dim), true);
}

ad::Var Linear::forward(const ad::Var& x) const {
  return ad::add_rowvec(ad::matmul(x, weight), bias);
}

void Linear::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
  out.push_back({prefix + ".weight", &weight});
  out.push_back({prefix + ".bias", &bias});
}

LayerNorm::LayerNorm(int dim) {
  gamma = ad::Var(Tensor::full(1, dim, 1.0), true);
  beta = ad::Var(Tensor::zeros(1, dim), true);
}

ad::Var LayerNorm::forward(const ad::Var& x) const {
  return ad::layer_norm_rows(x, gamma, beta);
}

void LayerNorm::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
  out.push_back({prefix + ".gamma", &gamma});
  out.push_back({prefix + ".beta", &beta});
}

MultiHeadAttention::MultiHeadAttention(int d, int h, Rng& rng)
    : d_model(d), heads(h), wq(d, d, rng), wk(d, d, rng), wv(d, d, rng), wo(d, d, rng) {
  if (d % h != 0) throw ConfigError("MultiHeadAttention: d_model must divide by heads");
}

ad::Var MultiHeadAttention::forward(const ad::Var& q_in, const ad::Var& kv_in,
                                    const ad::Var& q_pos, const ad::Var& k_pos) const {
  const ad::Var q_src = q_pos.defined() ? ad::add(q_in, q_pos) : q_in;
  const ad::Var k_src = k_pos.defined() ? ad::add(kv_in, k_pos) : kv_in;
  const ad::Var q = wq.forward(q_src);
  const ad::Var k = wk.forward(k_src);
  const ad::Var v = wv.forward(kv_in);
  const int dh = d_model / heads;
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<ad::Var> head_out;
  head_out.reserve(heads);
  for (int h = 0; h < heads; ++h) {
    const ad::Var qh = ad::slice_cols(q, h * dh, (h + 1) * dh);
    const ad::Var kh = ad::slice_cols(k, h * dh, (h + 1) * dh);
    const ad::Var vh = ad::slice_cols(v, h * dh, (h + 1) * dh);
    const ad::Var att = ad::softmax_rows(ad::scale(ad::matmul_nt(qh, kh), inv_sqrt_dh));
    head_out.push_back(ad::matmul(att, vh));
  }
  return wo.forward(ad::concat_cols(head_out));
}

void MultiHeadAttention::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
  wq.collect_params(prefix + ".wq", out);
  wk.collect_params(prefix + ".wk", out);
  wv.collect_params(prefix + ".wv", out);
  wo.collect_params(prefix + ".wo", out);
}

FeedForward::FeedForward(int d_model, int d_ff, Rng& rng)
    : fc1(d_model, d_ff, rng), fc2(d_ff, d_model, rng) {}

ad::Var FeedForward::forward(const ad::Var& x) const {
  return fc2.forward(ad::gelu(fc1.forward(x)));
}

void FeedForward::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
  fc1.collect_params(prefix + ".fc1", out);
  fc2.collect_params(prefix + ".fc2", out);
}

EncoderBlock::EncoderBlock(int d_model, int heads, int d_ff, Rng& rng)
    : ln1(d_model), ln2(d_model), attn(d_model, heads, rng), ff(d_model, d_ff, rng) {}

ad::Var EncoderBlock::forward(const ad::Var& x, const ad::Var& pos) const {
  const ad::Var h = ln1.forward(x);
  const ad::Var x1 = ad::add(x, attn.forward(h, h, pos, pos));
  return ad::add(x1, ff.forward(ln2.forward(x1)));
}

void EncoderBlock::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
  ln1.collect_params(prefix + ".ln1", out);
  ln2.collect_params(prefix + ".ln2", out);
  attn.collect_params(prefix + ".attn", out);
  ff.collect_params(prefix + ".ff", out);
}

CrossBlock::CrossBlock(int d_model, int heads, int d_ff, Rng& rng)
    : ln1(d_model),
      ln2(d_model),
      ln3(d_model),
      self_attn(d_model, heads, rng),
      cross_attn(d_model, heads, rng),
      ff(d_model, d_ff, rng) {}

ad::Var CrossBlock::forward(const ad::Var& x, const ad::Var& memory, const ad::Var& q_pos,
                            const ad::Var& mem_pos) const {
  const ad::Var h = ln1.forward(x);
  const ad::Var x1 = ad::add(x, self_attn.forward(h, h, q_pos, q_pos));
  const ad::Var x2 =
      ad::add(x1, cross_attn.forward(ln2.forward(x1), memory, q_pos, mem_pos));
  return ad::add(x2, ff.forward(ln3.forward(x2)));
}

void CrossBlock::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
  ln1.collect_params(prefix + ".ln1", out);
  ln2.collect_params(prefix + ".ln2", out);
  ln3.collect_params(prefix + ".ln3", out);
  self_attn.collect_params(prefix + ".self_attn", out);
  cross_attn.collect_params(prefix + ".cross_attn", out);
  ff.collect_params(prefix + ".ff", out);
}

UNetEncoderStack::UNetEncoderStack(int layers, int d_model, int heads, int d_ff, Rng& rng)
    : final_ln(d_model) {
  if (layers < 1) throw ConfigError("UNetEncoderStack: layers must be >= 1");
  blocks.reserve(layers);
  for (int i = 0; i < layers; ++i) blocks.emplace_back(d_model, heads, d_ff, rng);
  const int half = layers / 2;
  skip_proj.reserve(half);
  for (int i = 0; i < half; ++i) skip_proj.emplace_back(2 * d_model, d_model, rng);
}

ad::Var UNetEncoderStack::forward(const ad::Var& x, const ad::Var& pos) const {
  const int n = static_cast<int>(blocks.size());
  const int half = n / 2;
  std::vector<ad::Var> down_out;
  ad::Var h = x;
  for (int i = 0; i < n; ++i) {
    if (i >= n - half) {
      const int skip_idx = i - (n - half);
      const ad::Var& mirrored = down_out[half - 1 - skip_idx];
      h = skip_proj[skip_idx].forward(ad::concat_cols({h, mirrored}));
    }
    h = blocks[i].forward(h, pos);
    if (i < half) down_out.push_back(h);
  }
  return final_ln.forward(h);
}

void UNetEncoderStack::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
  for (std::size_t i = 0; i < blocks.size(); ++i)
    blocks[i].collect_params(prefix + ".block" + std::to_string(i), out);
  for (std::size_t i = 0; i < skip_proj.size(); ++i)
    skip_proj[i].collect_params(prefix + ".skip" + std::to_string(i), out);
  final_ln.collect_params(prefix + ".final_ln", out);
}

UNetCrossStack::UNetCrossStack(int layers, int d_model, int heads, int d_ff, Rng& rng)
    : final_ln(d_model) {
  if (layers < 1) throw ConfigError("UNetCrossStack: layers must be >= 1");
  blocks.reserve(layers);
  for (int i = 0; i < layers; ++i) blocks.emplace_back(d_model, heads, d_ff, rng);
  const int half = layers / 2;
  skip_proj.reserve(half);
  for (int i = 0; i < half; ++i) skip_proj.emplace_back(2 * d_model, d_model, rng);
}

ad::Var UNetCrossStack::forward(const ad::Var& x, const ad::Var& memory, const ad::Var& q_pos,
                                const ad::Var& mem_pos) const {
  const int n = static_cast<int>(blocks.size());
  const int half = n / 2;
  std::vector<ad::Var> down_out;
  ad::Var h = x;
  for (int i = 0; i < n; ++i) {
    if (i >= n - half) {
      const int skip_idx = i - (n - half);
      const ad::Var& mirrored = down_out[half - 1 - skip_idx];
      h = skip_proj[skip_idx].forward(ad::concat_cols({h, mirrored}));
    }
    h = blocks[i].forward(h, memory, q_pos, mem_pos);
    if (i < half) down_out.push_back(h);
  }
  return final_ln.forward(h);
}

void UNetCrossStack::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
  for (std::size_t i = 0; i < blocks.size(); ++i)
    blocks[i].collect_params(prefix + ".block" + std::to_string(i), out);
  for (std::size_t i = 0; i < skip_proj.size(); ++i)
    skip_proj[i].collect_params(prefix + ".skip" + std::to_string(i), out);
  final_ln.collect_params(prefix + ".final_ln", out);
}

AdamW::AdamW(std::vector<ParamRef> params, double lr, double weight_decay, double beta1,
             double beta2, double eps)
    : params_(std::move(params)),
      lr_(lr),
      weight_decay_(weight_decay),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    m_.push_back(Tensor::zeros(p.var->rows(), p.var->cols()));
    v_.push_back(Tensor::zeros(p.var->rows(), p.var->cols()));
  }
}

void AdamW::step() {
  ++step_count_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_count_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_count_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor g = params_[i].var->grad();
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    Tensor& w = params_[i].var->mutable_value();
    for (std::int64_t k = 0; k < g.size(); ++k) {
      auto j = static_cast<std::size_t>(k);
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * g[j];
      v[j] = beta2_ * v[j] + (1.0 - beta2_) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      w[j] -= lr_ * (mhat / (std::sqrt(vhat) + eps_) + weight_decay_ * w[j]);
    }
  }
}

void AdamW::zero_grad() {
  for (auto& p : params_) p.var->zero_grad();
}

double AdamW::grad_norm() const {
  double s = 0.0;
  for (const auto& p : params_) {
    const Tensor g = p.var->grad();
    for (std::int64_t k = 0; k < g.size(); ++k) {
      const double v = g[static_cast<std::size_t>(k)];
      s += v * v;
    }
  }
  return std::sqrt(s);
}

}  // namespace nn
}  // namespace emogest
