// src/speech.cpp

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

#include "emogest/speech.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "emogest/errors.hpp"

namespace emogest {
namespace speech {

nlohmann::json AudioModelConfig::to_json() const {
  return {{"n_frames", n_frames},       {"n_mels", n_mels},
          {"patch", patch},             {"patch_overlap", patch_overlap},
          {"d_model", d_model},         {"layers", layers},
          {"heads", heads},             {"d_ff", d_ff},
          {"latent_dim", latent_dim},   {"fusion_dim", fusion_dim},
          {"fusion_layers", fusion_layers}, {"fusion_heads", fusion_heads},
          {"decoder_layers", decoder_layers}, {"decoder_heads", decoder_heads},
          {"n_emotions", n_emotions},   {"n_styles", n_styles}};
}

AudioModelConfig AudioModelConfig::from_json(const nlohmann::json& j) {
  AudioModelConfig c;
  c.n_frames = j.at("n_frames").get<int>();
  c.n_mels = j.at("n_mels").get<int>();
  c.patch = j.at("patch").get<int>();
  c.patch_overlap = j.at("patch_overlap").get<int>();
  c.d_model = j.at("d_model").get<int>();
  c.layers = j.at("layers").get<int>();
  c.heads = j.at("heads").get<int>();
  c.d_ff = j.at("d_ff").get<int>();
  c.latent_dim = j.at("latent_dim").get<int>();
  c.fusion_dim = j.at("fusion_dim").get<int>();
  c.fusion_layers = j.at("fusion_layers").get<int>();
  c.fusion_heads = j.at("fusion_heads").get<int>();
  c.decoder_layers = j.at("decoder_layers").get<int>();
  c.decoder_heads = j.at("decoder_heads").get<int>();
  c.n_emotions = j.at("n_emotions").get<int>();
  c.n_styles = j.at("n_styles").get<int>();
  return c;
}

PatchEncoder::PatchEncoder(const AudioModelConfig& cfg, Rng& rng)
    : expected_patches(cfg.n_patches()),
      patch_proj(cfg.patch * cfg.patch, cfg.d_model, rng),
      cls_token(nn::make_param(1, cfg.d_model, rng, 0.02)),
      dist_token(nn::make_param(1, cfg.d_model, rng, 0.02)),
      pos(nn::make_param(cfg.n_patches() + 2, cfg.d_model, rng, 0.02)),
      final_ln(cfg.d_model),
      latent_proj(cfg.d_model, cfg.latent_dim, rng) {
  blocks.reserve(cfg.layers);
  for (int i = 0; i < cfg.layers; ++i)
    blocks.emplace_back(cfg.d_model, cfg.heads, cfg.ff_dim(), rng);
}

PatchEncoder::Output PatchEncoder::forward(const audio::PatchSequence& ps) const {
  if (ps.n_patches() != expected_patches)
    throw InvalidInput("PatchEncoder: got " + std::to_string(ps.n_patches()) +
                       " patches but the positional table holds " +
                       std::to_string(expected_patches));
  if (ps.patches.cols() != patch_proj.weight.rows())
    throw InvalidInput("PatchEncoder: patch size does not match the embedding");
  ad::Var h = ad::concat_rows(
      {cls_token, dist_token, patch_proj.forward(ad::constant(ps.patches))});
  h = ad::add(h, pos);
  for (const auto& b : blocks) h = b.forward(h, ad::Var());
  h = final_ln.forward(h);
  Output out;
  out.cls = ad::slice_rows(h, 0, 1);
  out.dist = ad::slice_rows(h, 1, 2);
  out.latent = latent_proj.forward(out.cls);
  return out;
}

void PatchEncoder::collect_params(const std::string& prefix, std::vector<nn::ParamRef>& out) {
  patch_proj.collect_params(prefix + ".patch_proj", out);
  out.push_back({prefix + ".cls_token", &cls_token});
  out.push_back({prefix + ".dist_token", &dist_token});
  out.push_back({prefix + ".pos", &pos});
  for (std::size_t i = 0; i < blocks.size(); ++i)
    blocks[i].collect_params(prefix + ".block" + std::to_string(i), out);
  final_ln.collect_params(prefix + ".final_ln", out);
  latent_proj.collect_params(prefix + ".latent_proj", out);
}

EncoderStack::EncoderStack(const AudioModelConfig& c, Rng& rng)
    : cfg(c),
      content_encoder(c, rng),
      emotion_encoder(c, rng),
      style_encoder(c, rng),
      emotion_head(c.d_model, c.n_emotions, rng),
      style_head(c.d_model, c.n_styles, rng) {}

AudioLatents EncoderStack::encode(const audio::PatchSequence& ps) const {
  const EncodeVars v = encode_vars(ps);
  AudioLatents l;
  l.content = v.content.value();
  l.emotion = v.emotion.value();
  l.style = v.style.value();
  if (!l.all_finite()) throw NumericalError("EncoderStack::encode: non-finite latents");
  return l;
}

EncoderStack::EncodeVars EncoderStack::encode_vars(const audio::PatchSequence& ps) const {
  const auto c = content_encoder.forward(ps);
  const auto e = emotion_encoder.forward(ps);
  const auto s = style_encoder.forward(ps);
  EncodeVars v;
  v.content = c.latent;
  v.emotion = e.latent;
  v.style = s.latent;
  v.emotion_head_in = ad::scale(ad::add(e.cls, e.dist), 0.5);
  v.style_head_in = ad::scale(ad::add(s.cls, s.dist), 0.5);
  return v;
}

void EncoderStack::collect_params(const std::string& prefix, std::vector<nn::ParamRef>& out) {
  content_encoder.collect_params(prefix + ".content", out);
  emotion_encoder.collect_params(prefix + ".emotion", out);
  style_encoder.collect_params(prefix + ".style", out);
  emotion_head.collect_params(prefix + ".emotion_head", out);
  style_head.collect_params(prefix + ".style_head", out);
}

FusionDecoder::FusionDecoder(const AudioModelConfig& c, Rng& rng)
    : cfg(c),
      lat_proj(c.latent_dim, c.fusion_dim, rng),
      role_embed(nn::make_param(3, c.fusion_dim, rng, 0.02)),
      fuse_query(nn::make_param(1, c.fusion_dim, rng, 0.02)),
      dec_query_pos(nn::make_param(c.n_frames, c.fusion_dim, rng, 0.02)),
      dec_ln(c.fusion_dim),
      out_proj(c.fusion_dim, c.n_mels, rng) {
  fusion_blocks.reserve(c.fusion_layers);
  for (int i = 0; i < c.fusion_layers; ++i)
    fusion_blocks.emplace_back(c.fusion_dim, c.fusion_heads, c.fusion_ff_dim(), rng);
  dec_blocks.reserve(c.decoder_layers);
  for (int i = 0; i < c.decoder_layers; ++i)
    dec_blocks.emplace_back(c.fusion_dim, c.decoder_heads, c.fusion_ff_dim(), rng);
}

ad::Var FusionDecoder::decode_vars(const ad::Var& content, const ad::Var& emotion,
                                   const ad::Var& style) const {
  for (const ad::Var* v : {&content, &emotion, &style})
    if (v->rows() != 1 || v->cols() != cfg.latent_dim)
      throw InvalidInput("FusionDecoder: latents must be 1 x latent_dim");
  const ad::Var triplet =
      ad::add(lat_proj.forward(ad::concat_rows({content, emotion, style})), role_embed);
  ad::Var fused = fuse_query;
  for (const auto& b : fusion_blocks) fused = b.forward(fused, triplet, ad::Var(), ad::Var());
  ad::Var h = dec_query_pos;
  for (const auto& b : dec_blocks) h = b.forward(h, fused, dec_query_pos, ad::Var());
  return out_proj.forward(dec_ln.forward(h));
}

audio::Filterbank FusionDecoder::decode(const AudioLatents& l) const {
  audio::Filterbank fb;
  fb.n_mels = cfg.n_mels;
  fb.standardized = true;  // the model's io domain is the standardized one
  fb.values = decode_vars(ad::constant(l.content), ad::constant(l.emotion),
                          ad::constant(l.style))
                  .value();
  return fb;
}

void FusionDecoder::collect_params(const std::string& prefix, std::vector<nn::ParamRef>& out) {
  lat_proj.collect_params(prefix + ".lat_proj", out);
  out.push_back({prefix + ".role_embed", &role_embed});
  out.push_back({prefix + ".fuse_query", &fuse_query});
  for (std::size_t i = 0; i < fusion_blocks.size(); ++i)
    fusion_blocks[i].collect_params(prefix + ".fusion" + std::to_string(i), out);
  out.push_back({prefix + ".dec_query_pos", &dec_query_pos});
  for (std::size_t i = 0; i < dec_blocks.size(); ++i)
    dec_blocks[i].collect_params(prefix + ".dec" + std::to_string(i), out);
  dec_ln.collect_params(prefix + ".dec_ln", out);
  out_proj.collect_params(prefix + ".out_proj", out);
}

int cross_index_emotion_style(int k) {
  if (k < 1 || k > 4) throw InvalidInput("cross_index_emotion_style: k must be in {1..4}");
  return ((6 - k) % 4) + 1;
}

int cross_index_content(int k) {
  if (k < 1 || k > 4) throw InvalidInput("cross_index_content: k must be in {1..4}");
  return ((1 + k) % 4) + 1;
}

void AudioQuadruple::validate() const {
  // (c1,s1), (c2,s1), (c1,s2), (c2,s2)
  if (!(content_ids[0] == content_ids[2] && content_ids[1] == content_ids[3] &&
        content_ids[0] != content_ids[1]))
    throw InvalidInput("AudioQuadruple: content ids must follow [c1, c2, c1, c2]");
  if (!(style_ids[0] == style_ids[1] && style_ids[2] == style_ids[3] &&
        style_ids[0] != style_ids[2]))
    throw InvalidInput("AudioQuadruple: style ids must follow [s1, s1, s2, s2]");
  for (int k = 0; k < 4; ++k) {
    if (audios[k].n_patches() != audios[0].n_patches())
      throw InvalidInput("AudioQuadruple: inconsistent patch grids");
    if (!filterbanks[k].same_shape(filterbanks[0]))
      throw InvalidInput("AudioQuadruple: inconsistent filterbank shapes");
  }
}

AudioLossBundle AudioLossVars::values() const {
  AudioLossBundle b;
  b.l_self = l_self.value().at(0, 0);
  b.l_con = l_con.value().at(0, 0);
  b.l_emo = l_emo.value().at(0, 0);
  b.l_sty = l_sty.value().at(0, 0);
  b.l_xemo = l_xemo.value().at(0, 0);
  b.l_xsty = l_xsty.value().at(0, 0);
  b.l_xcon = l_xcon.value().at(0, 0);
  b.total = total.value().at(0, 0);
  return b;
}

AudioLossVars disentangle_loss_vars(const AudioQuadruple& q, const EncoderStack& enc,
                                    const FusionDecoder& fd, const AudioLossWeights& w) {
  q.validate();
  std::array<EncoderStack::EncodeVars, 4> ev;
  std::array<ad::Var, 4> fb;
  for (int k = 0; k < 4; ++k) {
    ev[k] = enc.encode_vars(q.audios[k]);
    fb[k] = ad::constant(q.filterbanks[k]);
  }

  auto sum4 = [](const std::array<ad::Var, 4>& terms) {
    return ad::add(ad::add(terms[0], terms[1]), ad::add(terms[2], terms[3]));
  };

  AudioLossVars out;
  {
    std::array<ad::Var, 4> t;
    for (int k = 0; k < 4; ++k)
      t[k] = ad::l1_loss(fd.decode_vars(ev[k].content, ev[k].emotion, ev[k].style), fb[k]);
    out.l_self = sum4(t);
  }
  out.l_con = ad::add(ad::l1_loss(ev[0].content, ev[2].content),
                      ad::l1_loss(ev[1].content, ev[3].content));
  {
    std::vector<ad::Var> emo_rows, sty_rows;
    for (int k = 0; k < 4; ++k) {
      emo_rows.push_back(enc.emotion_logits(ev[k]));
      sty_rows.push_back(enc.style_logits(ev[k]));
    }
    const std::vector<int> emo_labels(4, q.emotion_id);
    const std::vector<int> sty_labels(q.style_ids.begin(), q.style_ids.end());
    out.l_emo = ad::cross_entropy_logits(ad::concat_rows(emo_rows), emo_labels);
    out.l_sty = ad::cross_entropy_logits(ad::concat_rows(sty_rows), sty_labels);
  }
  {
    std::array<ad::Var, 4> xe, xs, xc;
    for (int k = 1; k <= 4; ++k) {
      const int jes = cross_index_emotion_style(k) - 1;
      const int jc = cross_index_content(k) - 1;
      const auto& self = ev[k - 1];
      xe[k - 1] = ad::l1_loss(
          fd.decode_vars(self.content, ev[jes].emotion, self.style), fb[k - 1]);
      xs[k - 1] = ad::l1_loss(
          fd.decode_vars(self.content, self.emotion, ev[jes].style), fb[k - 1]);
      xc[k - 1] = ad::l1_loss(
          fd.decode_vars(ev[jc].content, self.emotion, self.style), fb[k - 1]);
    }
    out.l_xemo = sum4(xe);
    out.l_xsty = sum4(xs);
    out.l_xcon = sum4(xc);
  }
  out.total = ad::add(
      ad::add(ad::add(ad::scale(out.l_self, w.w_self), ad::scale(out.l_con, w.w_con)),
              ad::add(ad::scale(out.l_emo, w.w_emo), ad::scale(out.l_sty, w.w_sty))),
      ad::add(ad::add(ad::scale(out.l_xemo, w.w_xemo), ad::scale(out.l_xsty, w.w_xsty)),
              ad::scale(out.l_xcon, w.w_xcon)));
  return out;
}

AudioLossBundle disentangle_losses(const AudioQuadruple& q, const EncoderStack& enc,
                                   const FusionDecoder& fd, const AudioLossWeights& w) {
  return disentangle_loss_vars(q, enc, fd, w).values();
}

std::vector<AudioTrainLogEntry> train_audio_model(const std::vector<AudioQuadruple>& corpus,
                                                  EncoderStack& enc, FusionDecoder& fd,
                                                  const AudioTrainConfig& cfg) {
  if (corpus.empty())
    throw ConfigError("train_audio_model: corpus contains no valid quadruple");
  for (const auto& q : corpus) q.validate();

  std::vector<nn::ParamRef> params;
  enc.collect_params("enc", params);
  fd.collect_params("fd", params);
  nn::AdamW opt(params, cfg.lr, cfg.weight_decay);
  Rng rng(cfg.seed);

  std::ofstream log;
  if (!cfg.log_path.empty()) {
    log.open(cfg.log_path);
    if (!log) throw ConfigError("train_audio_model: cannot open log " + cfg.log_path);
  }

  std::vector<AudioTrainLogEntry> history;
  history.reserve(cfg.steps);
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();

  for (int step = 0; step < cfg.steps; ++step) {
    opt.zero_grad();
    ad::Var total;
    AudioLossBundle mean{};
    const int B = std::max(1, cfg.batch_quadruples);
    for (int b = 0; b < B; ++b) {
      if (cursor >= order.size()) {
        // seed-deterministic reshuffle per epoch
        for (std::size_t i = order.size(); i > 1; --i)
          std::swap(order[i - 1], order[rng.uniform_int(static_cast<int>(i))]);
        cursor = 0;
      }
      const auto& q = corpus[order[cursor++]];
      const AudioLossVars lv = disentangle_loss_vars(q, enc, fd, cfg.weights);
      const AudioLossBundle vals = lv.values();
      const double inv_b = 1.0 / B;
      mean.l_self += vals.l_self * inv_b;
      mean.l_con += vals.l_con * inv_b;
      mean.l_emo += vals.l_emo * inv_b;
      mean.l_sty += vals.l_sty * inv_b;
      mean.l_xemo += vals.l_xemo * inv_b;
      mean.l_xsty += vals.l_xsty * inv_b;
      mean.l_xcon += vals.l_xcon * inv_b;
      mean.total += vals.total * inv_b;
      total = total.defined() ? ad::add(total, lv.total) : lv.total;
    }
    ad::backward(ad::scale(total, 1.0 / B));
    opt.step();
    history.push_back({step, mean});
    if (log.is_open()) {
      nlohmann::json line = {{"step", step},       {"l_self", mean.l_self},
                             {"l_con", mean.l_con}, {"l_emo", mean.l_emo},
                             {"l_sty", mean.l_sty}, {"l_xemo", mean.l_xemo},
                             {"l_xsty", mean.l_xsty}, {"l_xcon", mean.l_xcon},
                             {"total", mean.total}};
      log << line.dump() << "\n";
    }
  }
  return history;
}

ClassifierAccuracy evaluate_audio_classifiers(const EncoderStack& enc,
                                              const std::vector<audio::PatchSequence>& samples,
                                              const std::vector<int>& emotion_labels,
                                              const std::vector<int>& style_labels) {
  if (samples.empty() || samples.size() != emotion_labels.size() ||
      samples.size() != style_labels.size())
    throw InvalidInput("evaluate_audio_classifiers: label/sample size mismatch");
  int emo_hits = 0, sty_hits = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto v = enc.encode_vars(samples[i]);
    const Tensor el = enc.emotion_logits(v).value();
    const Tensor sl = enc.style_logits(v).value();
    int ea = 0, sa = 0;
    for (int c = 1; c < el.cols(); ++c)
      if (el.at(0, c) > el.at(0, ea)) ea = c;
    for (int c = 1; c < sl.cols(); ++c)
      if (sl.at(0, c) > sl.at(0, sa)) sa = c;
    emo_hits += ea == emotion_labels[i] ? 1 : 0;
    sty_hits += sa == style_labels[i] ? 1 : 0;
  }
  const double n = static_cast<double>(samples.size());
  return {100.0 * emo_hits / n, 100.0 * sty_hits / n};
}

void save_audio_model(const std::string& path, AudioModelBundle& bundle) {
  Checkpoint ck;
  ck.config = {{"kind", "audio_model"},
               {"model", bundle.cfg.to_json()},
               {"fb_mean", bundle.fb_mean},
               {"fb_std", bundle.fb_std}};
  std::vector<nn::ParamRef> params;
  bundle.enc.collect_params("enc", params);
  bundle.fd.collect_params("fd", params);
  ck.capture(params);
  ck.save(path);
}

AudioModelBundle load_audio_model(const std::string& path) {
  const Checkpoint ck = Checkpoint::load(path);
  if (!ck.config.contains("kind") || ck.config.at("kind") != "audio_model")
    throw ConfigError("load_audio_model: " + path + " is not an audio model checkpoint");
  Rng rng(0);
  AudioModelBundle bundle(AudioModelConfig::from_json(ck.config.at("model")), rng);
  bundle.fb_mean = ck.config.at("fb_mean").get<double>();
  bundle.fb_std = ck.config.at("fb_std").get<double>();
  std::vector<nn::ParamRef> params;
  bundle.enc.collect_params("enc", params);
  bundle.fd.collect_params("fd", params);
  ck.restore(params);
  return bundle;
}

int import_patch_encoder_weights(PatchEncoder& dst, const Checkpoint& src,
                                 const std::string& prefix) {
  int imported = 0;
  for (const auto& p : dst.params(prefix)) {
    const Tensor* t = src.find(p.name);
    if (t == nullptr) continue;
    if (t->rows() != p.var->rows() || t->cols() != p.var->cols())
      throw ConfigError("import_patch_encoder_weights: shape mismatch for " + p.name);
    p.var->mutable_value() = *t;
    ++imported;
  }
  return imported;
}

}  // namespace speech
}  // namespace emogest
