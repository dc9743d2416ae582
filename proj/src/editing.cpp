// src/editing.cpp

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

#include "emogest/editing.hpp"

#include "emogest/errors.hpp"

namespace emogest {
namespace edit {

EditMode parse_mode(const std::string& name) {
  if (name == "emotion") return EditMode::emotion_swap;
  if (name == "style") return EditMode::style_swap;
  if (name == "content") return EditMode::content_swap;
  if (name == "none") return EditMode::none;
  throw InvalidInput("parse_mode: unknown edit mode " + name);
}

AudioLatents recombine(const AudioLatents& l1, const AudioLatents& l2, EditMode mode) {
  switch (mode) {
    case EditMode::emotion_swap:
      return {l1.content, l2.emotion, l1.style};
    case EditMode::style_swap:
      return {l1.content, l1.emotion, l2.style};
    case EditMode::content_swap:
      return {l2.content, l1.emotion, l1.style};
    case EditMode::none:
      return l1;
  }
  throw InvalidInput("recombine: bad mode");
}

AudioLatents encode_waveform(const audio::Waveform& w, const speech::AudioModelBundle& am,
                             const data::Config& cfg) {
  audio::FilterbankOptions fbo;
  fbo.n_mels = am.cfg.n_mels;
  fbo.frame_shift_ms = cfg.get_double("audio.frame_shift_ms");
  fbo.frame_window_ms = cfg.get_double("audio.frame_window_ms");
  const audio::Filterbank fb = audio::compute_filterbank(w, am.cfg.n_frames, fbo);
  const audio::Filterbank std_fb = audio::standardize(fb, am.fb_mean, am.fb_std);
  const audio::PatchSequence ps =
      audio::patchify(std_fb, am.cfg.patch, am.cfg.patch_overlap);
  return am.enc.encode(ps);
}

body::PoseSequence generate_motion(const AudioLatents& cond,
                                   const diffusion::GestureModelBundle& gm, int steps,
                                   std::uint64_t seed) {
  if (cond.dim() != gm.dcfg.latent_dim)
    throw ConfigError("generate_motion: audio latents do not match the gesture checkpoint");
  const diffusion::DiffusionSchedule sched = gm.schedule();
  const diffusion::DenoiserPredictor pred(gm.den, cond);
  const Tensor z = diffusion::ddim_sample(pred, gm.dcfg.latent_dim, steps, sched, seed);
  return prior::decode_motion(z, gm.dec, gm.pcfg.frames, gm.fps);
}

body::PoseSequence generate_edited(const audio::Waveform& audio_a,
                                   const audio::Waveform& audio_b, EditMode mode, int steps,
                                   std::uint64_t seed, const speech::AudioModelBundle& am,
                                   const diffusion::GestureModelBundle& gm,
                                   const data::Config& cfg) {
  if (am.cfg.latent_dim != gm.dcfg.latent_dim)
    throw ConfigError("generate_edited: audio and gesture checkpoints disagree on latent size");
  const AudioLatents la = encode_waveform(audio_a, am, cfg);
  const AudioLatents lb = encode_waveform(audio_b, am, cfg);
  return generate_motion(recombine(la, lb, mode), gm, steps, seed);
}

}  // namespace edit
}  // namespace emogest
