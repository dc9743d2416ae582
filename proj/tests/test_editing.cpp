// tests/test_editing.cpp

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

#include "emogest/editing.hpp"
#include "emogest/errors.hpp"
#include "test_util.hpp"

using namespace emogest;
using edit::EditMode;

namespace {

AudioLatents random_latents(Rng& rng, int dim) {
  return {rng.normal_tensor(1, dim), rng.normal_tensor(1, dim), rng.normal_tensor(1, dim)};
}

bool rows_equal(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) return false;
  for (std::int64_t i = 0; i < a.size(); ++i)
    if (a[static_cast<std::size_t>(i)] != b[static_cast<std::size_t>(i)]) return false;
  return true;
}

struct TinyModels {
  data::Config cfg = data::Config::defaults();
  speech::AudioModelBundle am;
  diffusion::GestureModelBundle gm;

  static speech::AudioModelConfig audio_cfg() {
    speech::AudioModelConfig a;
    a.n_frames = 96;
    a.n_mels = 16;
    a.patch = 8;
    a.patch_overlap = 2;
    a.d_model = 16;
    a.layers = 1;
    a.heads = 2;
    a.d_ff = 32;
    a.latent_dim = 8;
    a.fusion_dim = 16;
    a.fusion_layers = 1;
    a.fusion_heads = 2;
    a.decoder_layers = 1;
    a.decoder_heads = 2;
    a.n_styles = 2;
    return a;
  }
  static prior::PriorConfig prior_cfg() {
    prior::PriorConfig p;
    p.frames = 30;
    p.input_dim = body::kPoseDim;
    p.d_model = 16;
    p.layers = 2;
    p.heads = 2;
    p.d_ff = 32;
    p.latent_dim = 8;
    return p;
  }
  static diffusion::DenoiserConfig den_cfg() {
    diffusion::DenoiserConfig d;
    d.latent_dim = 8;
    d.d_model = 16;
    d.layers = 2;
    d.heads = 2;
    d.d_ff = 32;
    return d;
  }

  explicit TinyModels(Rng& rng) : am(audio_cfg(), rng), gm(prior_cfg(), den_cfg(), rng) {
    am.fb_mean = -5.0;
    am.fb_std = 4.0;
    gm.steps_infer = 6;
  }
};

audio::Waveform tone(double hz, double seconds = 1.0) {
  audio::Waveform w;
  w.sample_rate_hz = 16000;
  const int n = static_cast<int>(seconds * 16000);
  w.samples.resize(n);
  for (int i = 0; i < n; ++i)
    w.samples[i] = 0.4 * std::sin(2.0 * 3.14159265358979 * hz * i / 16000.0);
  return w;
}

}  // namespace

TEST_CASE("recombine selects fields without arithmetic") {
  Rng rng(3);
  const AudioLatents l1 = random_latents(rng, 8);
  const AudioLatents l2 = random_latents(rng, 8);

  const AudioLatents none = edit::recombine(l1, l2, EditMode::none);
  CHECK(rows_equal(none.content, l1.content));
  CHECK(rows_equal(none.emotion, l1.emotion));
  CHECK(rows_equal(none.style, l1.style));

  const AudioLatents emo = edit::recombine(l1, l2, EditMode::emotion_swap);
  CHECK(rows_equal(emo.content, l1.content));
  CHECK(rows_equal(emo.emotion, l2.emotion));
  CHECK(rows_equal(emo.style, l1.style));

  const AudioLatents sty = edit::recombine(l1, l2, EditMode::style_swap);
  CHECK(rows_equal(sty.content, l1.content));
  CHECK(rows_equal(sty.emotion, l1.emotion));
  CHECK(rows_equal(sty.style, l2.style));

  const AudioLatents con = edit::recombine(l1, l2, EditMode::content_swap);
  CHECK(rows_equal(con.content, l2.content));
  CHECK(rows_equal(con.emotion, l1.emotion));
  CHECK(rows_equal(con.style, l1.style));
}

TEST_CASE("self swap is the identity and double swap restores") {
  Rng rng(5);
  const AudioLatents l1 = random_latents(rng, 8);
  const AudioLatents l2 = random_latents(rng, 8);
  for (EditMode mode : {EditMode::emotion_swap, EditMode::style_swap, EditMode::content_swap,
                        EditMode::none}) {
    const AudioLatents same = edit::recombine(l1, l1, mode);
    CHECK(rows_equal(same.content, l1.content));
    CHECK(rows_equal(same.emotion, l1.emotion));
    CHECK(rows_equal(same.style, l1.style));
  }
  const AudioLatents once = edit::recombine(l1, l2, EditMode::emotion_swap);
  const AudioLatents back = edit::recombine(once, l1, EditMode::emotion_swap);
  CHECK(rows_equal(back.content, l1.content));
  CHECK(rows_equal(back.emotion, l1.emotion));
  CHECK(rows_equal(back.style, l1.style));
}

TEST_CASE("mode parsing") {
  CHECK(edit::parse_mode("emotion") == EditMode::emotion_swap);
  CHECK(edit::parse_mode("style") == EditMode::style_swap);
  CHECK(edit::parse_mode("content") == EditMode::content_swap);
  CHECK(edit::parse_mode("none") == EditMode::none);
  CHECK_THROWS_AS(edit::parse_mode("anger"), InvalidInput);
}

TEST_CASE("edited generation with the same audio twice equals the unedited one") {
  Rng rng(7);
  TinyModels models(rng);
  models.cfg.set("data.window_s", "1");
  const audio::Waveform a = tone(700.0);

  const body::PoseSequence plain =
      edit::generate_edited(a, a, EditMode::none, 6, 42, models.am, models.gm, models.cfg);
  const body::PoseSequence swapped =
      edit::generate_edited(a, a, EditMode::emotion_swap, 6, 42, models.am, models.gm,
                            models.cfg);
  REQUIRE(plain.n_frames() == swapped.n_frames());
  for (std::int64_t i = 0; i < plain.frames.size(); ++i)
    CHECK(plain.frames[static_cast<std::size_t>(i)] ==
          swapped.frames[static_cast<std::size_t>(i)]);
}

TEST_CASE("edited generation is deterministic per seed and seed-sensitive") {
  Rng rng(9);
  TinyModels models(rng);
  const audio::Waveform a = tone(500.0);
  const audio::Waveform b = tone(1200.0);

  const auto m1 = edit::generate_edited(a, b, EditMode::emotion_swap, 6, 11, models.am,
                                        models.gm, models.cfg);
  const auto m2 = edit::generate_edited(a, b, EditMode::emotion_swap, 6, 11, models.am,
                                        models.gm, models.cfg);
  for (std::int64_t i = 0; i < m1.frames.size(); ++i)
    CHECK(m1.frames[static_cast<std::size_t>(i)] == m2.frames[static_cast<std::size_t>(i)]);

  const auto m3 = edit::generate_edited(a, b, EditMode::emotion_swap, 6, 12, models.am,
                                        models.gm, models.cfg);
  double diff = 0.0;
  for (std::int64_t i = 0; i < m1.frames.size(); ++i)
    diff += std::fabs(m1.frames[static_cast<std::size_t>(i)] -
                      m3.frames[static_cast<std::size_t>(i)]);
  CHECK(diff > 1e-9);
}

TEST_CASE("latents export round trips") {
  Rng rng(13);
  const AudioLatents l = random_latents(rng, 8);
  const std::string path = testutil::temp_dir("latents") + "/l.json";
  save_latents(path, l);
  const AudioLatents r = load_latents(path);
  CHECK(rows_equal(l.content, r.content));
  CHECK(rows_equal(l.emotion, r.emotion));
  CHECK(rows_equal(l.style, r.style));
}

TEST_CASE("mismatched checkpoints are rejected") {
  Rng rng(11);
  TinyModels models(rng);
  auto bad_dcfg = TinyModels::den_cfg();
  bad_dcfg.latent_dim = 12;  // disagrees with the audio latent size
  auto bad_pcfg = TinyModels::prior_cfg();
  bad_pcfg.latent_dim = 12;
  diffusion::GestureModelBundle bad(bad_pcfg, bad_dcfg, rng);
  const audio::Waveform a = tone(600.0);
  CHECK_THROWS_AS(edit::generate_edited(a, a, EditMode::none, 4, 1, models.am, bad, models.cfg),
                  ConfigError);
}
