// src/extractor.cpp

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

#include "emogest/extractor.hpp"

#include <fstream>
#include <numeric>
#include <set>

#include "emogest/errors.hpp"

namespace emogest {
namespace eval {

nlohmann::json ExtractorConfig::to_json() const {
  return {{"frames", frames}, {"input_dim", input_dim}, {"d_model", d_model},
          {"layers", layers}, {"heads", heads},         {"d_ff", d_ff},
          {"n_classes", n_classes}};
}

ExtractorConfig ExtractorConfig::from_json(const nlohmann::json& j) {
  ExtractorConfig c;
  c.frames = j.at("frames").get<int>();
  c.input_dim = j.at("input_dim").get<int>();
  c.d_model = j.at("d_model").get<int>();
  c.layers = j.at("layers").get<int>();
  c.heads = j.at("heads").get<int>();
  c.d_ff = j.at("d_ff").get<int>();
  c.n_classes = j.at("n_classes").get<int>();
  return c;
}

MotionExtractor::MotionExtractor(const ExtractorConfig& c, Rng& rng)
    : cfg(c),
      in_proj(c.input_dim, c.d_model, rng),
      cls_token(nn::make_param(1, c.d_model, rng, 0.02)),
      pos(nn::make_param(c.frames + 1, c.d_model, rng, 0.02)),
      final_ln(c.d_model),
      head(c.d_model, c.n_classes, rng) {
  blocks.reserve(c.layers);
  for (int i = 0; i < c.layers; ++i)
    blocks.emplace_back(c.d_model, c.heads, c.ff_dim(), rng);
}

MotionExtractor::Output MotionExtractor::forward_vars(const ad::Var& pose_frames) const {
  if (pose_frames.rows() != cfg.frames || pose_frames.cols() != cfg.input_dim)
    throw InvalidInput("MotionExtractor: pose window must be frames x input_dim");
  ad::Var h = ad::concat_rows({cls_token, in_proj.forward(pose_frames)});
  h = ad::add(h, pos);
  for (const auto& b : blocks) h = b.forward(h, ad::Var());
  h = final_ln.forward(h);
  Output out;
  out.feature = ad::slice_rows(h, 0, 1);
  out.logits = head.forward(out.feature);
  return out;
}

Tensor MotionExtractor::feature(const body::PoseSequence& m) const {
  return forward_vars(ad::constant(m.frames)).feature.value();
}

Tensor MotionExtractor::logits(const body::PoseSequence& m) const {
  return forward_vars(ad::constant(m.frames)).logits.value();
}

void MotionExtractor::collect_params(const std::string& prefix,
                                     std::vector<nn::ParamRef>& out) {
  in_proj.collect_params(prefix + ".in_proj", out);
  out.push_back({prefix + ".cls_token", &cls_token});
  out.push_back({prefix + ".pos", &pos});
  for (std::size_t i = 0; i < blocks.size(); ++i)
    blocks[i].collect_params(prefix + ".block" + std::to_string(i), out);
  final_ln.collect_params(prefix + ".final_ln", out);
  head.collect_params(prefix + ".head", out);
}

GestureFeatures extract_features(const MotionExtractor& ex,
                                 const std::vector<body::PoseSequence>& motions) {
  if (motions.empty()) throw InvalidInput("extract_features: no motions");
  GestureFeatures out;
  out.features = Tensor(static_cast<int>(motions.size()), ex.cfg.d_model);
  out.logits = Tensor(static_cast<int>(motions.size()), ex.cfg.n_classes);
  for (std::size_t i = 0; i < motions.size(); ++i) {
    const auto fwd = ex.forward_vars(ad::constant(motions[i].frames));
    const Tensor f = fwd.feature.value();
    const Tensor l = fwd.logits.value();
    for (int c = 0; c < f.cols(); ++c) out.features.at(static_cast<int>(i), c) = f.at(0, c);
    for (int c = 0; c < l.cols(); ++c) out.logits.at(static_cast<int>(i), c) = l.at(0, c);
  }
  return out;
}

ExtractorTrainResult train_extractor(const std::vector<LabeledMotion>& train,
                                     const std::vector<LabeledMotion>& val,
                                     MotionExtractor& ex, const ExtractorTrainConfig& cfg) {
  std::set<int> classes;
  for (const auto& s : train) classes.insert(s.emotion_id);
  if (classes.size() < 2)
    throw ConfigError("train_extractor: need at least 2 emotion classes, got " +
                      std::to_string(classes.size()));

  std::vector<nn::ParamRef> params;
  ex.collect_params("extractor", params);
  nn::AdamW opt(params, cfg.lr, cfg.weight_decay);
  Rng rng(cfg.seed);

  std::ofstream log;
  if (!cfg.log_path.empty()) log.open(cfg.log_path);

  ExtractorTrainResult res;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();
  for (int step = 0; step < cfg.steps; ++step) {
    opt.zero_grad();
    std::vector<ad::Var> logit_rows;
    std::vector<int> labels;
    for (int b = 0; b < cfg.batch; ++b) {
      if (cursor >= order.size()) {
        for (std::size_t i = order.size(); i > 1; --i)
          std::swap(order[i - 1], order[rng.uniform_int(static_cast<int>(i))]);
        cursor = 0;
      }
      const auto& s = train[order[cursor++]];
      logit_rows.push_back(ex.forward_vars(ad::constant(s.pose.frames)).logits);
      labels.push_back(s.emotion_id);
    }
    const ad::Var loss = ad::cross_entropy_logits(ad::concat_rows(logit_rows), labels);
    ad::backward(loss);
    opt.step();
    res.loss_history.push_back(loss.value().at(0, 0));
    if (log.is_open())
      log << nlohmann::json({{"step", step}, {"loss", res.loss_history.back()}}).dump() << "\n";
  }
  res.val_accuracy_pct = val.empty() ? 0.0 : extractor_accuracy(ex, val);
  if (log.is_open())
    log << nlohmann::json({{"val_accuracy_pct", res.val_accuracy_pct}}).dump() << "\n";
  return res;
}

double extractor_accuracy(const MotionExtractor& ex, const std::vector<LabeledMotion>& data) {
  if (data.empty()) throw InvalidInput("extractor_accuracy: empty data");
  int hits = 0;
  for (const auto& s : data) {
    const Tensor l = ex.logits(s.pose);
    int best = 0;
    for (int c = 1; c < l.cols(); ++c)
      if (l.at(0, c) > l.at(0, best)) best = c;
    hits += best == s.emotion_id ? 1 : 0;
  }
  return 100.0 * hits / static_cast<double>(data.size());
}

void save_extractor(const std::string& path, MotionExtractor& ex) {
  Checkpoint ck;
  ck.config = {{"kind", "motion_extractor"}, {"model", ex.cfg.to_json()}};
  ck.capture(ex.params("extractor"));
  ck.save(path);
}

MotionExtractor load_extractor(const std::string& path) {
  const Checkpoint ck = Checkpoint::load(path);
  if (!ck.config.contains("kind") || ck.config.at("kind") != "motion_extractor")
    throw ConfigError("load_extractor: " + path + " is not an extractor checkpoint");
  Rng rng(0);
  MotionExtractor ex(ExtractorConfig::from_json(ck.config.at("model")), rng);
  std::vector<nn::ParamRef> params;
  ex.collect_params("extractor", params);
  ck.restore(params);
  return ex;
}

}  // namespace eval
}  // namespace emogest
