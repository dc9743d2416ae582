// src/diffusion.cpp

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

#include "emogest/diffusion.hpp"

#include <algorithm>
#include <cmath>

#include "emogest/checkpoint.hpp"
#include "emogest/errors.hpp"

namespace emogest {
namespace diffusion {

DiffusionSchedule make_schedule(int steps, double beta_min, double beta_max) {
  if (steps < 2) throw ConfigError("make_schedule: need at least 2 steps");
  if (!(0.0 < beta_min && beta_min < beta_max && beta_max < 1.0))
    throw ConfigError("make_schedule: need 0 < beta_min < beta_max < 1");
  DiffusionSchedule s;
  s.steps = steps;
  s.betas.resize(steps);
  s.alphas.resize(steps);
  s.alpha_bars.resize(steps);
  double prod = 1.0;
  for (int t = 0; t < steps; ++t) {
    s.betas[t] = beta_min + (beta_max - beta_min) * t / (steps - 1);
    s.alphas[t] = 1.0 - s.betas[t];
    prod *= s.alphas[t];
    s.alpha_bars[t] = prod;
  }
  return s;
}

Tensor q_sample(const Tensor& z0, int t, const Tensor& noise, const DiffusionSchedule& sched) {
  if (t < 0 || t >= sched.steps) throw InvalidInput("q_sample: timestep out of range");
  if (!z0.same_shape(noise)) throw InvalidInput("q_sample: noise shape mismatch");
  const double a = std::sqrt(sched.alpha_bars[t]);
  const double b = std::sqrt(1.0 - sched.alpha_bars[t]);
  Tensor out = z0;
  for (std::int64_t i = 0; i < out.size(); ++i) {
    auto k = static_cast<std::size_t>(i);
    out[k] = a * z0[k] + b * noise[k];
  }
  return out;
}

double ld_loss(const Tensor& noise_true, const Tensor& noise_pred) {
  if (!noise_true.same_shape(noise_pred)) throw InvalidInput("ld_loss: shape mismatch");
  double s = 0.0;
  for (std::int64_t i = 0; i < noise_true.size(); ++i) {
    const double d =
        noise_true[static_cast<std::size_t>(i)] - noise_pred[static_cast<std::size_t>(i)];
    s += d * d;
  }
  return s;
}

nlohmann::json DenoiserConfig::to_json() const {
  return {{"latent_dim", latent_dim},
          {"d_model", d_model},
          {"layers", layers},
          {"heads", heads},
          {"d_ff", d_ff}};
}

DenoiserConfig DenoiserConfig::from_json(const nlohmann::json& j) {
  DenoiserConfig c;
  c.latent_dim = j.at("latent_dim").get<int>();
  c.d_model = j.at("d_model").get<int>();
  c.layers = j.at("layers").get<int>();
  c.heads = j.at("heads").get<int>();
  c.d_ff = j.at("d_ff").get<int>();
  return c;
}

Denoiser::Denoiser(const DenoiserConfig& c, Rng& rng)
    : cfg(c),
      in_proj(c.latent_dim, c.d_model, rng),
      pos(nn::make_param(5, c.d_model, rng, 0.02)),
      stack(c.layers, c.d_model, c.heads, c.ff_dim(), rng),
      out_proj(c.d_model, c.latent_dim, rng) {}

ad::Var Denoiser::forward(const ad::Var& z_t, int t, const AudioLatents& cond) const {
  if (z_t.rows() != 1 || z_t.cols() != cfg.latent_dim)
    throw InvalidInput("Denoiser: z_t must be 1 x latent_dim");
  if (cond.dim() != cfg.latent_dim)
    throw InvalidInput("Denoiser: conditioning latents do not match latent_dim");
  const ad::Var tokens = ad::concat_rows(
      {z_t, ad::constant(nn::sinusoidal_embedding(static_cast<double>(t), cfg.latent_dim)),
       ad::constant(cond.content), ad::constant(cond.emotion), ad::constant(cond.style)});
  const ad::Var h = stack.forward(in_proj.forward(tokens), pos);
  return out_proj.forward(ad::slice_rows(h, 0, 1));
}

Tensor Denoiser::predict_values(const Tensor& z_t, int t, const AudioLatents& cond) const {
  return forward(ad::constant(z_t), t, cond).value();
}

void Denoiser::collect_params(const std::string& prefix, std::vector<nn::ParamRef>& out) {
  in_proj.collect_params(prefix + ".in_proj", out);
  out.push_back({prefix + ".pos", &pos});
  stack.collect_params(prefix + ".stack", out);
  out_proj.collect_params(prefix + ".out_proj", out);
}

std::vector<int> ddim_timesteps(int steps, int train_steps) {
  if (steps < 1) throw ConfigError("ddim_timesteps: steps must be >= 1");
  if (steps > train_steps)
    throw ConfigError("ddim_timesteps: inference steps exceed the training schedule");
  std::vector<int> ts;
  if (steps == 1) {
    ts.push_back(train_steps - 1);
    return ts;
  }
  for (int i = 0; i < steps; ++i) {
    const int t = static_cast<int>(
        std::lround(static_cast<double>(i) * (train_steps - 1) / (steps - 1)));
    if (ts.empty() || ts.back() != t) ts.push_back(t);
  }
  return ts;  // ascending, includes 0 and train_steps - 1
}

namespace {

Tensor ddim_run(const NoisePredictor& predictor, Tensor z, const std::vector<int>& ts,
                const DiffusionSchedule& sched) {
  for (int i = static_cast<int>(ts.size()) - 1; i >= 0; --i) {
    const int t = ts[i];
    const Tensor eps = predictor.predict(z, t);
    const double abar = sched.alpha_bars[t];
    const double sa = std::sqrt(abar), sb = std::sqrt(1.0 - abar);
    Tensor x0 = z;
    for (std::int64_t k = 0; k < z.size(); ++k) {
      auto j = static_cast<std::size_t>(k);
      x0[j] = (z[j] - sb * eps[j]) / sa;
    }
    if (i == 0) {
      z = std::move(x0);  // final update maps to the clean latent
    } else {
      const double abar_prev = sched.alpha_bars[ts[i - 1]];
      const double pa = std::sqrt(abar_prev), pb = std::sqrt(1.0 - abar_prev);
      for (std::int64_t k = 0; k < z.size(); ++k) {
        auto j = static_cast<std::size_t>(k);
        z[j] = pa * x0[j] + pb * eps[j];
      }
    }
  }
  return z;
}

}  // namespace

Tensor ddim_sample(const NoisePredictor& predictor, int latent_dim, int steps,
                   const DiffusionSchedule& sched, std::uint64_t seed) {
  const std::vector<int> ts = ddim_timesteps(steps, sched.steps);
  Rng rng(seed);
  Tensor z = rng.normal_tensor(1, latent_dim);
  return ddim_run(predictor, std::move(z), ts, sched);
}

Tensor ddim_denoise_from(const NoisePredictor& predictor, Tensor z_top, int steps,
                         const DiffusionSchedule& sched) {
  const std::vector<int> ts = ddim_timesteps(steps, sched.steps);
  return ddim_run(predictor, std::move(z_top), ts, sched);
}

JointForward joint_forward(const GestureBatchItem& item, const prior::PriorEncoder& enc,
                           const prior::PriorDecoder& dec, const Denoiser& den,
                           const body::BodyModel& bodymodel, const DiffusionSchedule& sched,
                           const JointTrainConfig& cfg, Rng& rng) {
  const int T = item.pose.n_frames();
  const int dz = enc.cfg.latent_dim;
  const ad::Var m_ref = ad::constant(item.pose.frames);
  const ad::Var v_ref = ad::constant(body::pose_to_vertices_values(item.pose, bodymodel));

  // Pass 1: the VAE round trip; gradients reach encoder and decoder.
  const auto post = enc.forward(m_ref);
  const ad::Var eps_rep = ad::constant(rng.normal_tensor(1, dz));
  const ad::Var sigma = ad::exp_(ad::scale(post.logvar, 0.5));
  const ad::Var z_m = ad::add(post.mu, ad::mul(sigma, eps_rep));
  const ad::Var m_hat = dec.forward(z_m, T);
  JointForward out;
  out.l_rec = ad::smooth_l1_loss(m_ref, m_hat);
  out.l_vrec = ad::smooth_l1_loss(v_ref, body::pose_to_vertices(m_hat, bodymodel));
  out.l_kl = ad::scale(prior::kl_loss_var(post.mu, post.logvar), cfg.kl_weight);

  // Pass 2: denoiser regression on a diffused stop-gradient latent.
  const int t_d = rng.uniform_int(sched.steps);
  const Tensor noise = rng.normal_tensor(1, dz);
  const Tensor z_noisy = q_sample(z_m.value(), t_d, noise, sched);
  const ad::Var eps_hat = den.forward(ad::constant(z_noisy), t_d, item.cond);
  out.l_ld = ad::squared_l2(ad::constant(noise), eps_hat);

  // Pass 3: full denoise from seeded noise, decoded under stop-gradient so
  // the alignment terms train the decoder only.
  const DenoiserPredictor pred(den, item.cond);
  const Tensor z_gen =
      ddim_sample(pred, dz, cfg.infer_steps, sched, rng.next_u64());
  const ad::Var m_gen = dec.forward(ad::constant(z_gen), T);
  out.l_align = ad::smooth_l1_loss(m_ref, m_gen);
  out.l_valign = ad::smooth_l1_loss(v_ref, body::pose_to_vertices(m_gen, bodymodel));

  out.total = ad::add(
      ad::add(ad::add(out.l_rec, out.l_vrec), ad::add(out.l_kl, out.l_ld)),
      ad::add(out.l_align, out.l_valign));
  return out;
}

TrainStepReport joint_train_step(const std::vector<GestureBatchItem>& batch,
                                 const prior::PriorEncoder& enc, const prior::PriorDecoder& dec,
                                 const Denoiser& den, const body::BodyModel& bodymodel,
                                 const DiffusionSchedule& sched, nn::AdamW& opt,
                                 const JointTrainConfig& cfg, Rng& rng) {
  if (batch.empty()) throw InvalidInput("joint_train_step: empty batch");
  opt.zero_grad();
  TrainStepReport rep;
  ad::Var total;
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  for (const auto& item : batch) {
    if (item.cond.dim() != enc.cfg.latent_dim)
      throw InvalidInput("joint_train_step: audio latents do not match the motion latent size");
    const JointForward f = joint_forward(item, enc, dec, den, bodymodel, sched, cfg, rng);
    rep.l_rec += f.l_rec.value().at(0, 0) * inv_b;
    rep.l_vrec += f.l_vrec.value().at(0, 0) * inv_b;
    rep.l_kl += f.l_kl.value().at(0, 0) * inv_b;
    rep.l_ld += f.l_ld.value().at(0, 0) * inv_b;
    rep.l_align += f.l_align.value().at(0, 0) * inv_b;
    rep.l_valign += f.l_valign.value().at(0, 0) * inv_b;
    total = total.defined() ? ad::add(total, f.total) : f.total;
  }
  total = ad::scale(total, inv_b);
  rep.l_total = total.value().at(0, 0);
  ad::backward(total);
  rep.grad_norm = opt.grad_norm();
  opt.step();
  return rep;
}

namespace {
std::vector<nn::ParamRef> bundle_params(GestureModelBundle& b) {
  std::vector<nn::ParamRef> params;
  b.enc.collect_params("prior_enc", params);
  b.dec.collect_params("prior_dec", params);
  b.den.collect_params("denoiser", params);
  return params;
}
}  // namespace

void save_gesture_model(const std::string& path, GestureModelBundle& bundle) {
  Checkpoint ck;
  ck.config = {{"kind", "gesture_model"},
               {"prior", bundle.pcfg.to_json()},
               {"denoiser", bundle.dcfg.to_json()},
               {"steps_train", bundle.steps_train},
               {"steps_infer", bundle.steps_infer},
               {"beta_min", bundle.beta_min},
               {"beta_max", bundle.beta_max},
               {"fps", bundle.fps}};
  ck.capture(bundle_params(bundle));
  ck.save(path);
}

GestureModelBundle load_gesture_model(const std::string& path) {
  const Checkpoint ck = Checkpoint::load(path);
  if (!ck.config.contains("kind") || ck.config.at("kind") != "gesture_model")
    throw ConfigError("load_gesture_model: " + path + " is not a gesture model checkpoint");
  Rng rng(0);
  GestureModelBundle bundle(prior::PriorConfig::from_json(ck.config.at("prior")),
                            DenoiserConfig::from_json(ck.config.at("denoiser")), rng);
  bundle.steps_train = ck.config.at("steps_train").get<int>();
  bundle.steps_infer = ck.config.at("steps_infer").get<int>();
  bundle.beta_min = ck.config.at("beta_min").get<double>();
  bundle.beta_max = ck.config.at("beta_max").get<double>();
  bundle.fps = ck.config.at("fps").get<double>();
  ck.restore(bundle_params(bundle));
  return bundle;
}

}  // namespace diffusion
}  // namespace emogest
