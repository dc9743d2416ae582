// emogest/editing.hpp

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

#include <string>

#include "emogest/audio.hpp"
#include "emogest/body.hpp"
#include "emogest/dataset.hpp"
#include "emogest/diffusion.hpp"
#include "emogest/latents.hpp"
#include "emogest/speech.hpp"

namespace emogest {
namespace edit {

enum class EditMode {
  emotion_swap,
  style_swap,
  content_swap,  // exposed for completeness, not part of the acceptance surface
  none,
};

EditMode parse_mode(const std::string& name);

// Pure selection: emotion_swap -> (c1, e2, s1), style_swap -> (c1, e1, s2),
// content_swap -> (c2, e1, s1), none -> l1. No arithmetic on latent values.
AudioLatents recombine(const AudioLatents& l1, const AudioLatents& l2, EditMode mode);

// Standardize + patchify a waveform window with the model's own stats and
// grid, then encode it.
AudioLatents encode_waveform(const audio::Waveform& w, const speech::AudioModelBundle& am,
                             const data::Config& cfg);

// Conditional generation: DDIM from seeded noise, decoded by the motion
// prior decoder.
body::PoseSequence generate_motion(const AudioLatents& cond,
                                   const diffusion::GestureModelBundle& gm, int steps,
                                   std::uint64_t seed);

// encode both audios -> recombine -> ddim -> decode. Deterministic per seed.
body::PoseSequence generate_edited(const audio::Waveform& audio_a,
                                   const audio::Waveform& audio_b, EditMode mode, int steps,
                                   std::uint64_t seed, const speech::AudioModelBundle& am,
                                   const diffusion::GestureModelBundle& gm,
                                   const data::Config& cfg);

}  // namespace edit
}  // namespace emogest
