// tests/test_speech_model.cpp

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "emogest/errors.hpp"
#include "emogest/speech.hpp"
#include "test_util.hpp"

using namespace emogest;
using speech::AudioModelConfig;
using speech::AudioQuadruple;

namespace {

AudioModelConfig tiny_cfg() {
  AudioModelConfig c;
  c.n_frames = 8;
  c.n_mels = 8;
  c.patch = 4;
  c.patch_overlap = 2;
  c.d_model = 8;
  c.layers = 1;
  c.heads = 2;
  c.d_ff = 16;
  c.latent_dim = 8;
  c.fusion_dim = 8;
  c.fusion_layers = 1;
  c.fusion_heads = 2;
  c.decoder_layers = 1;
  c.decoder_heads = 2;
  c.n_emotions = 4;
  c.n_styles = 3;
  return c;
}

audio::Filterbank random_fb(Rng& rng, const AudioModelConfig& cfg) {
  audio::Filterbank fb;
  fb.n_mels = cfg.n_mels;
  fb.values = rng.normal_tensor(cfg.n_frames, cfg.n_mels);
  fb.standardized = true;
  return fb;
}

AudioQuadruple random_quadruple(Rng& rng, const AudioModelConfig& cfg) {
  AudioQuadruple q;
  q.content_ids = {0, 1, 0, 1};
  q.style_ids = {0, 0, 1, 1};
  q.emotion_id = 1;
  for (int k = 0; k < 4; ++k) {
    const audio::Filterbank fb = random_fb(rng, cfg);
    q.filterbanks[k] = fb.values;
    q.audios[k] = audio::patchify(fb, cfg.patch, cfg.patch_overlap);
  }
  return q;
}

double l1_mean(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::int64_t i = 0; i < a.size(); ++i)
    s += std::fabs(a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(i)]);
  return s / static_cast<double>(a.size());
}

double ce_mean(const std::vector<Tensor>& logits, const std::vector<int>& labels) {
  double loss = 0.0;
  for (std::size_t r = 0; r < logits.size(); ++r) {
    double m = -1e300, s = 0.0;
    for (int c = 0; c < logits[r].cols(); ++c) m = std::max(m, logits[r].at(0, c));
    for (int c = 0; c < logits[r].cols(); ++c) s += std::exp(logits[r].at(0, c) - m);
    loss -= (logits[r].at(0, labels[r]) - m) - std::log(s);
  }
  return loss / static_cast<double>(logits.size());
}

}  // namespace

TEST_CASE("cross index maps reproduce the swap tables") {
  CHECK(speech::cross_index_emotion_style(1) == 2);
  CHECK(speech::cross_index_emotion_style(2) == 1);
  CHECK(speech::cross_index_emotion_style(3) == 4);
  CHECK(speech::cross_index_emotion_style(4) == 3);
  CHECK(speech::cross_index_content(1) == 3);
  CHECK(speech::cross_index_content(2) == 4);
  CHECK(speech::cross_index_content(3) == 1);
  CHECK(speech::cross_index_content(4) == 2);
  for (int k = 1; k <= 4; ++k) {
    CHECK(speech::cross_index_emotion_style(speech::cross_index_emotion_style(k)) == k);
    CHECK(speech::cross_index_content(speech::cross_index_content(k)) == k);
  }
  CHECK_THROWS_AS(speech::cross_index_emotion_style(0), InvalidInput);
  CHECK_THROWS_AS(speech::cross_index_content(5), InvalidInput);
}

TEST_CASE("encode produces finite deterministic latents") {
  Rng rng(3);
  const auto cfg = tiny_cfg();
  speech::EncoderStack enc(cfg, rng);
  const audio::Filterbank fb = random_fb(rng, cfg);
  const auto ps = audio::patchify(fb, cfg.patch, cfg.patch_overlap);

  const AudioLatents a = enc.encode(ps);
  const AudioLatents b = enc.encode(ps);
  CHECK(a.all_finite());
  CHECK(a.dim() == cfg.latent_dim);
  for (int i = 0; i < cfg.latent_dim; ++i) {
    CHECK(a.content.at(0, i) == b.content.at(0, i));
    CHECK(a.emotion.at(0, i) == b.emotion.at(0, i));
    CHECK(a.style.at(0, i) == b.style.at(0, i));
  }

  // wrong grid against the trained positional table
  audio::Filterbank big;
  big.n_mels = cfg.n_mels;
  big.values = rng.normal_tensor(cfg.n_frames + 4, cfg.n_mels);
  big.standardized = true;
  const auto ps_big = audio::patchify(big, cfg.patch, cfg.patch_overlap);
  CHECK_THROWS_AS(enc.encode(ps_big), InvalidInput);
}

TEST_CASE("decode has the canonical shape and is deterministic") {
  Rng rng(5);
  const auto cfg = tiny_cfg();
  speech::FusionDecoder fd(cfg, rng);
  AudioLatents zero;
  zero.content = Tensor::zeros(1, cfg.latent_dim);
  zero.emotion = Tensor::zeros(1, cfg.latent_dim);
  zero.style = Tensor::zeros(1, cfg.latent_dim);
  const audio::Filterbank a = fd.decode(zero);
  const audio::Filterbank b = fd.decode(zero);
  CHECK(a.values.all_finite());
  CHECK(a.n_frames() == cfg.n_frames);
  CHECK(a.n_mels == cfg.n_mels);
  for (std::int64_t i = 0; i < a.values.size(); ++i)
    CHECK(a.values[static_cast<std::size_t>(i)] == b.values[static_cast<std::size_t>(i)]);
}

TEST_CASE("degenerate quadruple collapses the swap losses") {
  Rng rng(7);
  const auto cfg = tiny_cfg();
  speech::EncoderStack enc(cfg, rng);
  speech::FusionDecoder fd(cfg, rng);

  AudioQuadruple q;
  q.content_ids = {0, 1, 0, 1};
  q.style_ids = {0, 0, 1, 1};
  q.emotion_id = 2;
  const audio::Filterbank fb = random_fb(rng, cfg);
  for (int k = 0; k < 4; ++k) {
    q.filterbanks[k] = fb.values;
    q.audios[k] = audio::patchify(fb, cfg.patch, cfg.patch_overlap);
  }
  const auto b = speech::disentangle_losses(q, enc, fd);
  CHECK(b.l_con == doctest::Approx(0.0));
  CHECK(b.l_xemo == doctest::Approx(b.l_self).epsilon(1e-12));
  CHECK(b.l_xsty == doctest::Approx(b.l_self).epsilon(1e-12));
  CHECK(b.l_xcon == doctest::Approx(b.l_self).epsilon(1e-12));
  CHECK(b.total == doctest::Approx(b.l_self + b.l_con + b.l_emo + b.l_sty + b.l_xemo +
                                   b.l_xsty + b.l_xcon)
                       .epsilon(1e-12));
}

TEST_CASE("quadruple structure is validated") {
  Rng rng(9);
  const auto cfg = tiny_cfg();
  AudioQuadruple q = random_quadruple(rng, cfg);
  q.content_ids = {0, 0, 0, 0};
  CHECK_THROWS_AS(q.validate(), InvalidInput);
  q = random_quadruple(rng, cfg);
  q.style_ids = {0, 1, 0, 1};
  CHECK_THROWS_AS(q.validate(), InvalidInput);
}

TEST_CASE("loss terms match a straight-line transcription") {
  Rng rng(11);
  const auto cfg = tiny_cfg();
  speech::EncoderStack enc(cfg, rng);
  speech::FusionDecoder fd(cfg, rng);
  const AudioQuadruple q = random_quadruple(rng, cfg);
  const auto got = speech::disentangle_losses(q, enc, fd);

  // Straight-line re-implementation over the model primitives.
  AudioLatents lat[4];
  Tensor emo_logits_arr[4], sty_logits_arr[4];
  for (int k = 0; k < 4; ++k) {
    lat[k] = enc.encode(q.audios[k]);
    const auto v = enc.encode_vars(q.audios[k]);
    emo_logits_arr[k] = enc.emotion_logits(v).value();
    sty_logits_arr[k] = enc.style_logits(v).value();
  }
  auto dec = [&](const Tensor& c, const Tensor& e, const Tensor& s) {
    AudioLatents l{c, e, s};
    return fd.decode(l).values;
  };
  double l_self = 0.0, l_xemo = 0.0, l_xsty = 0.0, l_xcon = 0.0;
  const int jes[4] = {2, 1, 4, 3};
  const int jc[4] = {3, 4, 1, 2};
  for (int k = 0; k < 4; ++k) {
    l_self += l1_mean(dec(lat[k].content, lat[k].emotion, lat[k].style), q.filterbanks[k]);
    l_xemo +=
        l1_mean(dec(lat[k].content, lat[jes[k] - 1].emotion, lat[k].style), q.filterbanks[k]);
    l_xsty +=
        l1_mean(dec(lat[k].content, lat[k].emotion, lat[jes[k] - 1].style), q.filterbanks[k]);
    l_xcon +=
        l1_mean(dec(lat[jc[k] - 1].content, lat[k].emotion, lat[k].style), q.filterbanks[k]);
  }
  const double l_con =
      l1_mean(lat[0].content, lat[2].content) + l1_mean(lat[1].content, lat[3].content);
  const double l_emo =
      ce_mean({emo_logits_arr[0], emo_logits_arr[1], emo_logits_arr[2], emo_logits_arr[3]},
              std::vector<int>(4, q.emotion_id));
  const double l_sty =
      ce_mean({sty_logits_arr[0], sty_logits_arr[1], sty_logits_arr[2], sty_logits_arr[3]},
              {q.style_ids[0], q.style_ids[1], q.style_ids[2], q.style_ids[3]});

  CHECK(got.l_self == doctest::Approx(l_self).epsilon(1e-9));
  CHECK(got.l_con == doctest::Approx(l_con).epsilon(1e-9));
  CHECK(got.l_emo == doctest::Approx(l_emo).epsilon(1e-9));
  CHECK(got.l_sty == doctest::Approx(l_sty).epsilon(1e-9));
  CHECK(got.l_xemo == doctest::Approx(l_xemo).epsilon(1e-9));
  CHECK(got.l_xsty == doctest::Approx(l_xsty).epsilon(1e-9));
  CHECK(got.l_xcon == doctest::Approx(l_xcon).epsilon(1e-9));
  CHECK(got.total ==
        doctest::Approx(l_self + l_con + l_emo + l_sty + l_xemo + l_xsty + l_xcon).epsilon(1e-9));
}

TEST_CASE("self reconstruction is invariant under consistent member permutation") {
  Rng rng(13);
  const auto cfg = tiny_cfg();
  speech::EncoderStack enc(cfg, rng);
  speech::FusionDecoder fd(cfg, rng);
  const AudioQuadruple q = random_quadruple(rng, cfg);

  AudioQuadruple p = q;  // swap the style pairs: (a1,a2) <-> (a3,a4)
  std::swap(p.audios[0], p.audios[2]);
  std::swap(p.audios[1], p.audios[3]);
  std::swap(p.filterbanks[0], p.filterbanks[2]);
  std::swap(p.filterbanks[1], p.filterbanks[3]);
  std::swap(p.style_ids[0], p.style_ids[2]);
  std::swap(p.style_ids[1], p.style_ids[3]);

  const auto a = speech::disentangle_losses(q, enc, fd);
  const auto b = speech::disentangle_losses(p, enc, fd);
  CHECK(a.l_self == doctest::Approx(b.l_self).epsilon(1e-12));
  CHECK(a.l_con == doctest::Approx(b.l_con).epsilon(1e-12));
}

TEST_CASE("every audio loss term passes the gradient check") {
  Rng rng(17);
  const auto cfg = tiny_cfg();
  speech::EncoderStack enc(cfg, rng);
  speech::FusionDecoder fd(cfg, rng);
  const AudioQuadruple q = random_quadruple(rng, cfg);

  std::vector<nn::ParamRef> params;
  enc.collect_params("enc", params);
  fd.collect_params("fd", params);

  Rng sample_rng(19);
  for (int which = 0; which < 7; ++which) {
    auto builder = [&]() {
      const auto lv = speech::disentangle_loss_vars(q, enc, fd);
      switch (which) {
        case 0: return lv.l_self;
        case 1: return lv.l_con;
        case 2: return lv.l_emo;
        case 3: return lv.l_sty;
        case 4: return lv.l_xemo;
        case 5: return lv.l_xsty;
        default: return lv.l_xcon;
      }
    };
    CHECK(testutil::max_rel_grad_err(params, builder, 1, sample_rng) < 1e-4);
  }
}

TEST_CASE("a tiny overfit run halves the loss") {
  Rng rng(23);
  const auto cfg = tiny_cfg();
  speech::EncoderStack enc(cfg, rng);
  speech::FusionDecoder fd(cfg, rng);

  // structured targets, like real log-mels, rather than white noise
  AudioQuadruple q;
  q.content_ids = {0, 1, 0, 1};
  q.style_ids = {0, 0, 1, 1};
  q.emotion_id = 1;
  for (int k = 0; k < 4; ++k) {
    audio::Filterbank fb;
    fb.n_mels = cfg.n_mels;
    fb.values = Tensor(cfg.n_frames, cfg.n_mels);
    for (int t = 0; t < cfg.n_frames; ++t)
      for (int m = 0; m < cfg.n_mels; ++m)
        fb.values.at(t, m) =
            std::sin(0.6 * t + 0.9 * m + k) + 0.3 * std::cos(1.3 * t - 0.4 * m + 2 * k);
    fb.standardized = true;
    q.filterbanks[k] = fb.values;
    q.audios[k] = audio::patchify(fb, cfg.patch, cfg.patch_overlap);
  }
  std::vector<AudioQuadruple> corpus = {q};

  speech::AudioTrainConfig tc;
  tc.steps = 300;
  tc.lr = 3e-3;
  tc.seed = 5;
  const auto history = speech::train_audio_model(corpus, enc, fd, tc);
  REQUIRE(static_cast<int>(history.size()) == tc.steps);
  const double early = history[10].losses.total;
  const double late = history.back().losses.total;
  CHECK(late < 0.5 * early);

  CHECK_THROWS_AS(speech::train_audio_model({}, enc, fd, tc), ConfigError);
}

TEST_CASE("overfitting a single sample drives per-element reconstruction under 0.05") {
  Rng rng(47);
  const auto cfg = tiny_cfg();
  speech::EncoderStack enc(cfg, rng);
  speech::FusionDecoder fd(cfg, rng);
  audio::Filterbank fb;
  fb.n_mels = cfg.n_mels;
  fb.values = Tensor(cfg.n_frames, cfg.n_mels);
  for (int t = 0; t < cfg.n_frames; ++t)
    for (int m = 0; m < cfg.n_mels; ++m)
      fb.values.at(t, m) = std::sin(0.5 * t + 0.7 * m) + 0.2 * std::cos(1.1 * t);
  fb.standardized = true;
  const auto ps = audio::patchify(fb, cfg.patch, cfg.patch_overlap);

  std::vector<nn::ParamRef> params;
  enc.collect_params("enc", params);
  fd.collect_params("fd", params);
  nn::AdamW opt(params, 3e-3);
  const ad::Var target = ad::constant(fb.values);
  for (int step = 0; step < 300; ++step) {
    opt.zero_grad();
    const auto v = enc.encode_vars(ps);
    const ad::Var loss = ad::l1_loss(fd.decode_vars(v.content, v.emotion, v.style), target);
    ad::backward(loss);
    opt.step();
  }
  const audio::Filterbank rec = fd.decode(enc.encode(ps));
  CHECK(l1_mean(rec.values, fb.values) < 0.05);
}

TEST_CASE("audio checkpoints round trip bit-exactly") {
  Rng rng(29);
  const auto cfg = tiny_cfg();
  speech::AudioModelBundle bundle(cfg, rng);
  bundle.fb_mean = -3.5;
  bundle.fb_std = 2.25;
  const audio::Filterbank fb = random_fb(rng, cfg);
  const auto ps = audio::patchify(fb, cfg.patch, cfg.patch_overlap);
  const AudioLatents before = bundle.enc.encode(ps);
  const Tensor dec_before = bundle.fd.decode(before).values;

  const std::string path = testutil::temp_dir("speech_ckpt") + "/audio.ckpt";
  speech::save_audio_model(path, bundle);
  speech::AudioModelBundle loaded = speech::load_audio_model(path);
  CHECK(loaded.fb_mean == bundle.fb_mean);
  CHECK(loaded.fb_std == bundle.fb_std);
  const AudioLatents after = loaded.enc.encode(ps);
  for (int i = 0; i < cfg.latent_dim; ++i) {
    CHECK(before.content.at(0, i) == after.content.at(0, i));
    CHECK(before.emotion.at(0, i) == after.emotion.at(0, i));
    CHECK(before.style.at(0, i) == after.style.at(0, i));
  }
  const Tensor dec_after = loaded.fd.decode(after).values;
  for (std::int64_t i = 0; i < dec_before.size(); ++i)
    CHECK(dec_before[static_cast<std::size_t>(i)] == dec_after[static_cast<std::size_t>(i)]);

  // restoring into a different architecture fails loudly
  auto other_cfg = cfg;
  other_cfg.d_model = 12;
  Rng rng2(1);
  speech::EncoderStack other(other_cfg, rng2);
  const Checkpoint ck = Checkpoint::load(path);
  std::vector<nn::ParamRef> other_params;
  other.collect_params("enc", other_params);
  CHECK_THROWS_AS(ck.restore(other_params), ConfigError);
}

TEST_CASE("pretrained patch-encoder weights can be imported") {
  Rng rng(31);
  const auto cfg = tiny_cfg();
  speech::PatchEncoder src(cfg, rng);
  speech::PatchEncoder dst(cfg, rng);
  Checkpoint ck;
  ck.capture(src.params("pretrained"));
  const int n = speech::import_patch_encoder_weights(dst, ck, "pretrained");
  CHECK(n == static_cast<int>(ck.tensors.size()));

  Rng rng2(33);
  audio::Filterbank fb = random_fb(rng2, cfg);
  const auto ps = audio::patchify(fb, cfg.patch, cfg.patch_overlap);
  const Tensor a = src.forward(ps).latent.value();
  const Tensor b = dst.forward(ps).latent.value();
  for (int i = 0; i < cfg.latent_dim; ++i) CHECK(a.at(0, i) == b.at(0, i));
}
