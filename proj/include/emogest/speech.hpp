// emogest/speech.hpp

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

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "emogest/audio.hpp"
#include "emogest/checkpoint.hpp"
#include "emogest/latents.hpp"
#include "emogest/nn.hpp"

namespace emogest {
namespace speech {

struct AudioModelConfig {
  // filterbank grid
  int n_frames = 1024;
  int n_mels = 128;
  int patch = 16;
  int patch_overlap = 6;
  // patch transformer encoders (one per latent space)
  int d_model = 768;
  int layers = 12;
  int heads = 12;
  int d_ff = 0;  // 0 -> 4 * d_model
  int latent_dim = 256;
  // fusion + decoder
  int fusion_dim = 768;
  int fusion_layers = 2;
  int fusion_heads = 4;
  int decoder_layers = 4;
  int decoder_heads = 4;
  // classifier heads
  int n_emotions = 8;
  int n_styles = 30;

  int ff_dim() const { return d_ff > 0 ? d_ff : 4 * d_model; }
  int fusion_ff_dim() const { return 2 * fusion_dim; }
  int n_patches() const {
    return audio::patch_count_1d(n_frames, patch, patch_overlap) *
           audio::patch_count_1d(n_mels, patch, patch_overlap);
  }
  nlohmann::json to_json() const;
  static AudioModelConfig from_json(const nlohmann::json& j);
  bool operator==(const AudioModelConfig&) const = default;
};

// One patch transformer: linear patch embedding, CLS and DIST tokens,
// learnable positions added to the input sequence, encoder blocks, and a
// projection of the CLS output to the latent space.
class PatchEncoder : public nn::Module {
 public:
  PatchEncoder() = default;
  PatchEncoder(const AudioModelConfig& cfg, Rng& rng);

  struct Output {
    ad::Var latent;  // 1 x latent_dim
    ad::Var cls;     // 1 x d_model
    ad::Var dist;    // 1 x d_model
  };
  Output forward(const audio::PatchSequence& ps) const;
  void collect_params(const std::string& prefix, std::vector<nn::ParamRef>& out) override;

  int expected_patches = 0;
  nn::Linear patch_proj;
  ad::Var cls_token, dist_token;
  ad::Var pos;  // (n_patches + 2) x d_model
  std::vector<nn::EncoderBlock> blocks;
  nn::LayerNorm final_ln;
  nn::Linear latent_proj;
};

// The three encoders share an architecture but not parameters; classifier
// heads consume the average of the CLS and DIST outputs of the emotion and
// style encoders respectively.
class EncoderStack : public nn::Module {
 public:
  EncoderStack() = default;
  EncoderStack(const AudioModelConfig& cfg, Rng& rng);

  AudioLatents encode(const audio::PatchSequence& ps) const;

  struct EncodeVars {
    ad::Var content, emotion, style;        // 1 x latent_dim each
    ad::Var emotion_head_in, style_head_in; // 1 x d_model (avg CLS/DIST)
  };
  EncodeVars encode_vars(const audio::PatchSequence& ps) const;
  ad::Var emotion_logits(const EncodeVars& v) const { return emotion_head.forward(v.emotion_head_in); }
  ad::Var style_logits(const EncodeVars& v) const { return style_head.forward(v.style_head_in); }

  void collect_params(const std::string& prefix, std::vector<nn::ParamRef>& out) override;

  AudioModelConfig cfg;
  PatchEncoder content_encoder, emotion_encoder, style_encoder;
  nn::Linear emotion_head;  // d_model -> n_emotions
  nn::Linear style_head;    // d_model -> n_styles
};

// Fusion: a learned query cross-attends over the three latent tokens (with a
// role embedding) to a single fused vector; the decoder expands it back to a
// full filterbank through positional queries.
class FusionDecoder : public nn::Module {
 public:
  FusionDecoder() = default;
  FusionDecoder(const AudioModelConfig& cfg, Rng& rng);

  ad::Var decode_vars(const ad::Var& content, const ad::Var& emotion, const ad::Var& style) const;
  // Decoded filterbanks live in the standardized domain the model trains on.
  audio::Filterbank decode(const AudioLatents& l) const;
  void collect_params(const std::string& prefix, std::vector<nn::ParamRef>& out) override;

  AudioModelConfig cfg;
  nn::Linear lat_proj;  // latent_dim -> fusion_dim
  ad::Var role_embed;   // 3 x fusion_dim
  ad::Var fuse_query;   // 1 x fusion_dim
  std::vector<nn::CrossBlock> fusion_blocks;
  ad::Var dec_query_pos;  // n_frames x fusion_dim
  std::vector<nn::CrossBlock> dec_blocks;
  nn::LayerNorm dec_ln;
  nn::Linear out_proj;  // fusion_dim -> n_mels
};

// Swap partner inside the quadruple for emotion/style cross reconstruction:
// j(k) = [(6 - k) mod 4] + 1 for 1-based k.
int cross_index_emotion_style(int k);
// Content swap partner: j(k) = [(1 + k) mod 4] + 1.
int cross_index_content(int k);

// Four audios spanning two contents x two styles under one emotion:
// (c1,e,s1), (c2,e,s1), (c1,e,s2), (c2,e,s2).
struct AudioQuadruple {
  std::array<audio::PatchSequence, 4> audios;
  std::array<Tensor, 4> filterbanks;  // standardized sources, frames x mels
  std::array<int, 4> content_ids{};
  std::array<int, 4> style_ids{};
  int emotion_id = 0;

  void validate() const;
};

struct AudioLossWeights {
  double w_self = 1.0, w_con = 1.0, w_emo = 1.0, w_sty = 1.0;
  double w_xemo = 1.0, w_xsty = 1.0, w_xcon = 1.0;
};

struct AudioLossBundle {
  double l_self = 0, l_con = 0, l_emo = 0, l_sty = 0;
  double l_xemo = 0, l_xsty = 0, l_xcon = 0;
  double total = 0;
};

struct AudioLossVars {
  ad::Var l_self, l_con, l_emo, l_sty, l_xemo, l_xsty, l_xcon, total;
  AudioLossBundle values() const;
};

AudioLossVars disentangle_loss_vars(const AudioQuadruple& q, const EncoderStack& enc,
                                    const FusionDecoder& fd,
                                    const AudioLossWeights& w = {});
AudioLossBundle disentangle_losses(const AudioQuadruple& q, const EncoderStack& enc,
                                   const FusionDecoder& fd,
                                   const AudioLossWeights& w = {});

struct AudioTrainConfig {
  int steps = 500;
  int batch_quadruples = 1;
  double lr = 1e-4;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
  AudioLossWeights weights;
  std::string log_path;  // JSONL per step when set
};

struct AudioTrainLogEntry {
  int step = 0;
  AudioLossBundle losses;
};

std::vector<AudioTrainLogEntry> train_audio_model(const std::vector<AudioQuadruple>& corpus,
                                                  EncoderStack& enc, FusionDecoder& fd,
                                                  const AudioTrainConfig& cfg);

struct ClassifierAccuracy {
  double emotion_pct = 0.0;
  double style_pct = 0.0;
};
ClassifierAccuracy evaluate_audio_classifiers(const EncoderStack& enc,
                                              const std::vector<audio::PatchSequence>& samples,
                                              const std::vector<int>& emotion_labels,
                                              const std::vector<int>& style_labels);

// Self-describing audio model checkpoint; carries the corpus filterbank
// standardization statistics alongside the parameters.
struct AudioModelBundle {
  AudioModelConfig cfg;
  EncoderStack enc;
  FusionDecoder fd;
  double fb_mean = 0.0;
  double fb_std = 1.0;

  AudioModelBundle(const AudioModelConfig& c, Rng& rng) : cfg(c), enc(c, rng), fd(c, rng) {}
};

void save_audio_model(const std::string& path, AudioModelBundle& bundle);
AudioModelBundle load_audio_model(const std::string& path);

// Optional hook for externally converted pretrained patch-transformer
// weights: restores every tensor whose name (under `prefix`) and shape match,
// returns how many were imported.
int import_patch_encoder_weights(PatchEncoder& dst, const Checkpoint& src,
                                 const std::string& prefix);

}  // namespace speech
}  // namespace emogest
