// emogest/prior.hpp

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

#include <json.hpp>

#include "emogest/body.hpp"
#include "emogest/nn.hpp"

namespace emogest {
namespace prior {

struct PriorConfig {
  int frames = 300;  // 10 s at 30 fps, fixed training window
  int input_dim = body::kPoseDim;
  int d_model = 1024;
  int layers = 9;
  int heads = 4;
  int d_ff = 0;  // 0 -> 2 * d_model
  int latent_dim = 256;
  // the latent expands into this many memory tokens for the decoder's
  // cross-attention; with one token the conditioning collapses to a
  // frame-independent shift
  int memory_tokens = 4;

  int ff_dim() const { return d_ff > 0 ? d_ff : 2 * d_model; }
  nlohmann::json to_json() const;
  static PriorConfig from_json(const nlohmann::json& j);
};

// Transformer VAE encoder: two distribution tokens prepended to the
// projected frame sequence, U-Net skip stack, mean/log-variance heads.
class PriorEncoder : public nn::Module {
 public:
  PriorEncoder() = default;
  PriorEncoder(const PriorConfig& cfg, Rng& rng);

  struct Output {
    ad::Var mu;      // 1 x latent_dim
    ad::Var logvar;  // 1 x latent_dim
  };
  Output forward(const ad::Var& pose_frames) const;
  void collect_params(const std::string& prefix, std::vector<nn::ParamRef>& out) override;

  PriorConfig cfg;
  nn::Linear in_proj;
  ad::Var mu_token, sigma_token;
  ad::Var pos;  // (frames + 2) x d_model
  nn::UNetEncoderStack stack;
  nn::Linear mu_proj, logvar_proj;
};

// Cross-attention decoder: zero queries with learnable positional terms, the
// latent as single-token memory in every layer, linear output head around a
// rest-pose offset.
class PriorDecoder : public nn::Module {
 public:
  PriorDecoder() = default;
  PriorDecoder(const PriorConfig& cfg, Rng& rng);

  ad::Var forward(const ad::Var& z, int frames) const;
  void collect_params(const std::string& prefix, std::vector<nn::ParamRef>& out) override;

  PriorConfig cfg;
  nn::Linear mem_proj;
  ad::Var query_pos;  // frames x d_model
  nn::UNetCrossStack stack;
  nn::Linear out_proj;
  ad::Var rest_offset;  // 1 x input_dim, constant identity-rotation row
};

// Elementwise-mean smooth L1: 0.5 d^2 for |d| < 1, |d| - 0.5 otherwise.
double smooth_l1(const Tensor& x, const Tensor& y);

// 0.5 [ sum(mu^2 + sigma^2) - sum(log sigma^2 + 1) ]
double kl_loss(const Tensor& mu, const Tensor& sigma);
// graph version parameterized by log-variance
ad::Var kl_loss_var(const ad::Var& mu, const ad::Var& logvar);

struct EncodeResult {
  Tensor mu, sigma, z;  // each 1 x latent_dim
};
// z = mu + sigma * eps when sample, else z = mu. Deterministic per seed.
EncodeResult encode_motion(const body::PoseSequence& m, const PriorEncoder& enc, bool sample,
                           std::uint64_t seed);

body::PoseSequence decode_motion(const Tensor& z, const PriorDecoder& dec, int frames,
                                 double fps = 30.0);

struct PriorLossBundle {
  double l_rec = 0.0;
  double l_vrec = 0.0;
  double l_kl = 0.0;  // already weighted
};

PriorLossBundle prior_losses(const Tensor& m, const Tensor& m_hat, const Tensor& verts,
                             const Tensor& verts_hat, const Tensor& mu, const Tensor& sigma,
                             double kl_weight = 1e-4);

}  // namespace prior
}  // namespace emogest
