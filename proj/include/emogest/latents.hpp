// emogest/latents.hpp

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

#include "emogest/tensor.hpp"

namespace emogest {

// The conditioning triple produced by the speech model: one row vector each
// for spoken content, expressed emotion, and speaker style.
struct AudioLatents {
  Tensor content;  // 1 x latent_dim
  Tensor emotion;
  Tensor style;

  int dim() const { return content.cols(); }
  bool all_finite() const {
    return content.all_finite() && emotion.all_finite() && style.all_finite();
  }
};

// JSON export with sidecar metadata {dim}; consumed by the diffusion side.
void save_latents(const std::string& path, const AudioLatents& l);
AudioLatents load_latents(const std::string& path);

}  // namespace emogest
