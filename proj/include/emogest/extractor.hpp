// emogest/extractor.hpp

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
#include <vector>

#include <json.hpp>

#include "emogest/body.hpp"
#include "emogest/checkpoint.hpp"
#include "emogest/nn.hpp"

namespace emogest {
namespace eval {

struct ExtractorConfig {
  int frames = 300;
  int input_dim = body::kPoseDim;
  int d_model = 256;  // the CLS output doubles as the metric feature
  int layers = 4;
  int heads = 4;
  int d_ff = 0;  // 0 -> 2 * d_model
  int n_classes = 8;

  int ff_dim() const { return d_ff > 0 ? d_ff : 2 * d_model; }
  nlohmann::json to_json() const;
  static ExtractorConfig from_json(const nlohmann::json& j);
};

// Plain transformer encoder with a prepended CLS token; trained with a
// cross-entropy emotion objective only. The CLS output is the feature used
// by all quantitative metrics.
class MotionExtractor : public nn::Module {
 public:
  MotionExtractor() = default;
  MotionExtractor(const ExtractorConfig& cfg, Rng& rng);

  struct Output {
    ad::Var feature;  // 1 x d_model
    ad::Var logits;   // 1 x n_classes
  };
  Output forward_vars(const ad::Var& pose_frames) const;
  Tensor feature(const body::PoseSequence& m) const;
  Tensor logits(const body::PoseSequence& m) const;
  void collect_params(const std::string& prefix, std::vector<nn::ParamRef>& out) override;

  ExtractorConfig cfg;
  nn::Linear in_proj;
  ad::Var cls_token;
  ad::Var pos;  // (frames + 1) x d_model
  std::vector<nn::EncoderBlock> blocks;
  nn::LayerNorm final_ln;
  nn::Linear head;
};

struct LabeledMotion {
  body::PoseSequence pose;
  int emotion_id = 0;
};

struct GestureFeatures {
  Tensor features;  // N x d_f
  Tensor logits;    // N x n_classes
};

GestureFeatures extract_features(const MotionExtractor& ex,
                                 const std::vector<body::PoseSequence>& motions);

struct ExtractorTrainConfig {
  int steps = 400;
  int batch = 4;
  double lr = 1e-3;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
  std::string log_path;
};

struct ExtractorTrainResult {
  std::vector<double> loss_history;
  double val_accuracy_pct = 0.0;
};

// Throws ConfigError when the training set covers fewer than 2 classes.
ExtractorTrainResult train_extractor(const std::vector<LabeledMotion>& train,
                                     const std::vector<LabeledMotion>& val,
                                     MotionExtractor& ex, const ExtractorTrainConfig& cfg);

double extractor_accuracy(const MotionExtractor& ex, const std::vector<LabeledMotion>& data);

void save_extractor(const std::string& path, MotionExtractor& ex);
MotionExtractor load_extractor(const std::string& path);

}  // namespace eval
}  // namespace emogest
