// src/prior.cpp

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

#include "emogest/prior.hpp"

#include <cmath>

#include "emogest/errors.hpp"

namespace emogest {
namespace prior {

nlohmann::json PriorConfig::to_json() const {
  return {{"frames", frames},   {"input_dim", input_dim}, {"d_model", d_model},
          {"layers", layers},   {"heads", heads},         {"d_ff", d_ff},
          {"latent_dim", latent_dim}, {"memory_tokens", memory_tokens}};
}

PriorConfig PriorConfig::from_json(const nlohmann::json& j) {
  PriorConfig c;
  c.frames = j.at("frames").get<int>();
  c.input_dim = j.at("input_dim").get<int>();
  c.d_model = j.at("d_model").get<int>();
  c.layers = j.at("layers").get<int>();
  c.heads = j.at("heads").get<int>();
  c.d_ff = j.at("d_ff").get<int>();
  c.latent_dim = j.at("latent_dim").get<int>();
  c.memory_tokens = j.at("memory_tokens").get<int>();
  return c;
}

PriorEncoder::PriorEncoder(const PriorConfig& c, Rng& rng)
    : cfg(c),
      in_proj(c.input_dim, c.d_model, rng),
      mu_token(nn::make_param(1, c.d_model, rng, 0.02)),
      sigma_token(nn::make_param(1, c.d_model, rng, 0.02)),
      pos(nn::make_param(c.frames + 2, c.d_model, rng, 0.02)),
      stack(c.layers, c.d_model, c.heads, c.ff_dim(), rng),
      mu_proj(c.d_model, c.latent_dim, rng),
      logvar_proj(c.d_model, c.latent_dim, rng) {}

PriorEncoder::Output PriorEncoder::forward(const ad::Var& pose_frames) const {
  if (pose_frames.cols() != cfg.input_dim)
    throw InvalidInput("PriorEncoder: pose width does not match config");
  if (pose_frames.rows() != cfg.frames)
    throw InvalidInput("PriorEncoder: needs exactly " + std::to_string(cfg.frames) +
                       " frames (windows are cut so no masking is required)");
  const ad::Var tokens =
      ad::concat_rows({mu_token, sigma_token, in_proj.forward(pose_frames)});
  const ad::Var h = stack.forward(tokens, pos);
  return {mu_proj.forward(ad::slice_rows(h, 0, 1)),
          logvar_proj.forward(ad::slice_rows(h, 1, 2))};
}

void PriorEncoder::collect_params(const std::string& prefix, std::vector<nn::ParamRef>& out) {
  in_proj.collect_params(prefix + ".in_proj", out);
  out.push_back({prefix + ".mu_token", &mu_token});
  out.push_back({prefix + ".sigma_token", &sigma_token});
  out.push_back({prefix + ".pos", &pos});
  stack.collect_params(prefix + ".stack", out);
  mu_proj.collect_params(prefix + ".mu_proj", out);
  logvar_proj.collect_params(prefix + ".logvar_proj", out);
}

PriorDecoder::PriorDecoder(const PriorConfig& c, Rng& rng)
    : cfg(c),
      mem_proj(c.latent_dim, c.memory_tokens * c.d_model, rng),
      query_pos(nn::make_param(c.frames, c.d_model, rng, 0.02)),
      stack(c.layers, c.d_model, c.heads, c.ff_dim(), rng),
      out_proj(c.d_model, c.input_dim, rng) {
  Tensor rest(1, c.input_dim);
  for (int j = 0; j < c.input_dim / 6; ++j)
    for (int k = 0; k < 6; ++k) rest.at(0, 6 * j + k) = body::kIdentityRot6d[k];
  rest_offset = ad::Var(rest, false);
}

ad::Var PriorDecoder::forward(const ad::Var& z, int frames) const {
  if (z.rows() != 1 || z.cols() != cfg.latent_dim)
    throw InvalidInput("PriorDecoder: latent must be 1 x latent_dim");
  if (frames != cfg.frames)
    throw InvalidInput("PriorDecoder: needs exactly " + std::to_string(cfg.frames) + " frames");
  // Queries start as the positional embeddings themselves (zero input plus
  // injected positions); with a single memory token the value path is the
  // only way position can reach the output.
  const ad::Var queries = query_pos;
  const ad::Var memory =
      ad::reshape(mem_proj.forward(z), cfg.memory_tokens, cfg.d_model);
  const ad::Var h = stack.forward(queries, memory, query_pos, ad::Var());
  return ad::add_rowvec(out_proj.forward(h), rest_offset);
}

void PriorDecoder::collect_params(const std::string& prefix, std::vector<nn::ParamRef>& out) {
  mem_proj.collect_params(prefix + ".mem_proj", out);
  out.push_back({prefix + ".query_pos", &query_pos});
  stack.collect_params(prefix + ".stack", out);
  out_proj.collect_params(prefix + ".out_proj", out);
}

double smooth_l1(const Tensor& x, const Tensor& y) {
  if (!x.same_shape(y)) throw InvalidInput("smooth_l1: shape mismatch");
  double s = 0.0;
  for (std::int64_t i = 0; i < x.size(); ++i) {
    const double d = x[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(i)];
    s += std::fabs(d) < 1.0 ? 0.5 * d * d : std::fabs(d) - 0.5;
  }
  return s / static_cast<double>(x.size());
}

double kl_loss(const Tensor& mu, const Tensor& sigma) {
  if (!mu.same_shape(sigma)) throw InvalidInput("kl_loss: shape mismatch");
  double s = 0.0;
  for (std::int64_t i = 0; i < mu.size(); ++i) {
    const double m = mu[static_cast<std::size_t>(i)];
    const double sd = sigma[static_cast<std::size_t>(i)];
    if (sd <= 0.0) throw InvalidInput("kl_loss: sigma must be positive");
    s += m * m + sd * sd - std::log(sd * sd) - 1.0;
  }
  return 0.5 * s;
}

ad::Var kl_loss_var(const ad::Var& mu, const ad::Var& logvar) {
  const ad::Var mu2 = ad::mul(mu, mu);
  const ad::Var var = ad::exp_(logvar);
  const ad::Var ones = ad::constant(Tensor::full(1, mu.cols(), 1.0));
  return ad::scale(ad::sum(ad::sub(ad::add(mu2, var), ad::add(logvar, ones))), 0.5);
}

EncodeResult encode_motion(const body::PoseSequence& m, const PriorEncoder& enc, bool sample,
                           std::uint64_t seed) {
  const auto out = enc.forward(ad::constant(m.frames));
  EncodeResult r;
  r.mu = out.mu.value();
  r.sigma = out.logvar.value();
  for (std::int64_t i = 0; i < r.sigma.size(); ++i) {
    auto k = static_cast<std::size_t>(i);
    r.sigma[k] = std::exp(0.5 * r.sigma[k]);
  }
  r.z = r.mu;
  if (sample) {
    Rng rng(seed);
    for (std::int64_t i = 0; i < r.z.size(); ++i) {
      auto k = static_cast<std::size_t>(i);
      r.z[k] = r.mu[k] + r.sigma[k] * rng.normal();
    }
  }
  return r;
}

body::PoseSequence decode_motion(const Tensor& z, const PriorDecoder& dec, int frames,
                                 double fps) {
  if (!z.all_finite()) throw InvalidInput("decode_motion: latent has non-finite entries");
  body::PoseSequence m;
  m.fps = fps;
  m.frames = dec.forward(ad::constant(z), frames).value();
  return m;
}

PriorLossBundle prior_losses(const Tensor& m, const Tensor& m_hat, const Tensor& verts,
                             const Tensor& verts_hat, const Tensor& mu, const Tensor& sigma,
                             double kl_weight) {
  PriorLossBundle b;
  b.l_rec = smooth_l1(m, m_hat);
  b.l_vrec = smooth_l1(verts, verts_hat);
  b.l_kl = kl_weight * kl_loss(mu, sigma);
  return b;
}

}  // namespace prior
}  // namespace emogest
