// emogest/diffusion.hpp

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

#pragma once

#include <vector>

#include <json.hpp>

#include "emogest/body.hpp"
#include "emogest/latents.hpp"
#include "emogest/nn.hpp"
#include "emogest/prior.hpp"

namespace emogest {
namespace diffusion {

struct DiffusionSchedule {
  int steps = 1000;  // D
  std::vector<double> betas;
  std::vector<double> alphas;
  std::vector<double> alpha_bars;
};

// Linear betas over [beta_min, beta_max]; alpha_bar is the running product.
DiffusionSchedule make_schedule(int steps, double beta_min = 0.00085,
                                double beta_max = 0.012);

// z_t = sqrt(abar_t) z0 + sqrt(1 - abar_t) noise
Tensor q_sample(const Tensor& z0, int t, const Tensor& noise, const DiffusionSchedule& sched);

// squared L2 between true and predicted noise
double ld_loss(const Tensor& noise_true, const Tensor& noise_pred);

// Interface for the reverse process; the planted-noise test oracle also
// implements it.
class NoisePredictor {
 public:
  virtual ~NoisePredictor() = default;
  virtual Tensor predict(const Tensor& z_t, int t) const = 0;
};

struct DenoiserConfig {
  int latent_dim = 256;
  int d_model = 1024;
  int layers = 9;
  int heads = 4;
  int d_ff = 0;  // 0 -> 2 * d_model

  int ff_dim() const { return d_ff > 0 ? d_ff : 2 * d_model; }
  nlohmann::json to_json() const;
  static DenoiserConfig from_json(const nlohmann::json& j);
};

// Conditional noise predictor over the 5-token sequence
// [z_t, SE(t), content, emotion, style]; same U-Net family as the prior
// encoder, output read from the first token.
class Denoiser : public nn::Module {
 public:
  Denoiser() = default;
  Denoiser(const DenoiserConfig& cfg, Rng& rng);

  ad::Var forward(const ad::Var& z_t, int t, const AudioLatents& cond) const;
  Tensor predict_values(const Tensor& z_t, int t, const AudioLatents& cond) const;
  void collect_params(const std::string& prefix, std::vector<nn::ParamRef>& out) override;

  DenoiserConfig cfg;
  nn::Linear in_proj;
  ad::Var pos;  // 5 x d_model
  nn::UNetEncoderStack stack;
  nn::Linear out_proj;
};

class DenoiserPredictor : public NoisePredictor {
 public:
  DenoiserPredictor(const Denoiser& den, const AudioLatents& cond)
      : den_(den), cond_(cond) {}
  Tensor predict(const Tensor& z_t, int t) const override {
    return den_.predict_values(z_t, t, cond_);
  }

 private:
  const Denoiser& den_;
  const AudioLatents& cond_;
};

// Deterministic (eta = 0) sampler over a uniformly strided timestep
// subsequence that includes both endpoints; the final update maps straight
// to the predicted clean latent.
std::vector<int> ddim_timesteps(int steps, int train_steps);
Tensor ddim_sample(const NoisePredictor& predictor, int latent_dim, int steps,
                   const DiffusionSchedule& sched, std::uint64_t seed);
// Reverse chain started from a caller-provided state at the top timestep.
Tensor ddim_denoise_from(const NoisePredictor& predictor, Tensor z_top, int steps,
                         const DiffusionSchedule& sched);

struct TrainStepReport {
  double l_rec = 0, l_vrec = 0, l_kl = 0, l_align = 0, l_valign = 0, l_ld = 0,
         l_total = 0;
  double grad_norm = 0;
};

struct GestureBatchItem {
  body::PoseSequence pose;
  AudioLatents cond;
};

struct JointTrainConfig {
  double kl_weight = 1e-4;
  int infer_steps = 50;  // DDIM steps inside the alignment pass
};

// Graph handles for one item of the 3-step forward pass; used by the
// training step and by the stop-gradient contract tests.
struct JointForward {
  ad::Var l_rec, l_vrec, l_kl, l_ld, l_align, l_valign, total;
};
JointForward joint_forward(const GestureBatchItem& item, const prior::PriorEncoder& enc,
                           const prior::PriorDecoder& dec, const Denoiser& den,
                           const body::BodyModel& bodymodel, const DiffusionSchedule& sched,
                           const JointTrainConfig& cfg, Rng& rng);

// One combined optimizer step over the summed three-pass loss of a batch.
TrainStepReport joint_train_step(const std::vector<GestureBatchItem>& batch,
                                 const prior::PriorEncoder& enc, const prior::PriorDecoder& dec,
                                 const Denoiser& den, const body::BodyModel& bodymodel,
                                 const DiffusionSchedule& sched, nn::AdamW& opt,
                                 const JointTrainConfig& cfg, Rng& rng);

// Prior encoder/decoder and denoiser in one self-describing checkpoint,
// together with the schedule and window settings they were trained under.
struct GestureModelBundle {
  prior::PriorConfig pcfg;
  DenoiserConfig dcfg;
  prior::PriorEncoder enc;
  prior::PriorDecoder dec;
  Denoiser den;
  int steps_train = 1000;
  int steps_infer = 50;
  double beta_min = 0.00085;
  double beta_max = 0.012;
  double fps = 30.0;

  GestureModelBundle(const prior::PriorConfig& pc, const DenoiserConfig& dc, Rng& rng)
      : pcfg(pc), dcfg(dc), enc(pc, rng), dec(pc, rng), den(dc, rng) {}
  DiffusionSchedule schedule() const { return make_schedule(steps_train, beta_min, beta_max); }
};

void save_gesture_model(const std::string& path, GestureModelBundle& bundle);
GestureModelBundle load_gesture_model(const std::string& path);

}  // namespace diffusion
}  // namespace emogest
