// tests/acceptance.cpp

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

// End-to-end acceptance suite. Each numbered criterion prints exactly one
// PASS/FAIL line; the process exit code is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "emogest/cli.hpp"
#include "emogest/dataset.hpp"
#include "emogest/diffusion.hpp"
#include "emogest/editing.hpp"
#include "emogest/extractor.hpp"
#include "emogest/metrics.hpp"
#include "emogest/prior.hpp"
#include "emogest/speech.hpp"
#include "test_util.hpp"

using namespace emogest;

namespace {

int g_failures = 0;
std::chrono::steady_clock::time_point g_start;

double elapsed_s() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - g_start).count();
}

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s  %2d. %-58s %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

// ---------------------------------------------------------------------------
// criterion 1: formula oracles
// ---------------------------------------------------------------------------

bool oracle_smooth_l1(Rng& rng, double& worst) {
  for (int i = 0; i < 100; ++i) {
    const Tensor a = rng.normal_tensor(3, 5, 2.0);
    const Tensor b = rng.normal_tensor(3, 5, 2.0);
    double expect = 0.0;
    for (std::int64_t k = 0; k < a.size(); ++k) {
      const double d = a[static_cast<std::size_t>(k)] - b[static_cast<std::size_t>(k)];
      expect += std::fabs(d) < 1.0 ? 0.5 * d * d : std::fabs(d) - 0.5;
    }
    expect /= static_cast<double>(a.size());
    const double got = prior::smooth_l1(a, b);
    worst = std::max(worst, std::fabs(got - expect) / std::max(std::fabs(expect), 1e-12));
  }
  return worst < 1e-6;
}

bool oracle_kl(Rng& rng, double& worst) {
  for (int i = 0; i < 100; ++i) {
    const Tensor mu = rng.normal_tensor(1, 12);
    const Tensor sigma = rng.uniform_tensor(1, 12, 0.2, 2.5);
    double s1 = 0.0, s2 = 0.0;
    for (int c = 0; c < 12; ++c) {
      s1 += mu.at(0, c) * mu.at(0, c) + sigma.at(0, c) * sigma.at(0, c);
      s2 += std::log(sigma.at(0, c) * sigma.at(0, c)) + 1.0;
    }
    const double expect = 0.5 * (s1 - s2);
    const double got = prior::kl_loss(mu, sigma);
    worst = std::max(worst, std::fabs(got - expect) / std::max(std::fabs(expect), 1e-12));
  }
  return worst < 1e-6;
}

bool oracle_ld(Rng& rng, double& worst) {
  for (int i = 0; i < 100; ++i) {
    const Tensor a = rng.normal_tensor(1, 16);
    const Tensor b = rng.normal_tensor(1, 16);
    double expect = 0.0;
    for (int c = 0; c < 16; ++c) {
      const double d = a.at(0, c) - b.at(0, c);
      expect += d * d;
    }
    const double got = diffusion::ld_loss(a, b);
    worst = std::max(worst, std::fabs(got - expect) / std::max(std::fabs(expect), 1e-12));
  }
  return worst < 1e-6;
}

bool oracle_diversity(Rng& rng, double& worst) {
  for (int i = 0; i < 100; ++i) {
    const int n = 4 + rng.uniform_int(10);
    const Tensor f = rng.normal_tensor(n, 4);
    double acc = 0.0;
    int pairs = 0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        double d2 = 0.0;
        for (int c = 0; c < 4; ++c) {
          const double d = f.at(p, c) - f.at(q, c);
          d2 += d * d;
        }
        acc += std::sqrt(d2);
        ++pairs;
      }
    const double expect = acc / pairs;
    const double got = eval::diversity(f);
    worst = std::max(worst, std::fabs(got - expect) / std::max(std::fabs(expect), 1e-12));
  }
  return worst < 1e-6;
}

bool oracle_beat_align(Rng& rng, double& worst) {
  for (int i = 0; i < 100; ++i) {
    std::vector<double> kin, aud;
    const int nk = 1 + rng.uniform_int(8), na = 1 + rng.uniform_int(8);
    for (int k = 0; k < nk; ++k) kin.push_back(rng.uniform(0.0, 5.0));
    for (int k = 0; k < na; ++k) aud.push_back(rng.uniform(0.0, 5.0));
    const double sigma = 0.05 + rng.uniform(0.0, 0.3);
    double acc = 0.0;
    for (double k : kin) {
      double best = 1e300;
      for (double a : aud) best = std::min(best, std::fabs(k - a));
      acc += std::exp(-best * best / (2.0 * sigma * sigma));
    }
    const double expect = acc / kin.size();
    const double got = eval::beat_align(kin, aud, sigma);
    worst = std::max(worst, std::fabs(got - expect) / std::max(std::fabs(expect), 1e-12));
  }
  return worst < 1e-6;
}

bool oracle_srgr(Rng& rng, double& worst) {
  const body::BodyModel chain = body::make_chain_stub(4);
  for (int i = 0; i < 100; ++i) {
    const int T = 3 + rng.uniform_int(4);
    body::PoseSequence gen = body::identity_pose(T, 4);
    body::PoseSequence gt = body::identity_pose(T, 4);
    for (std::int64_t k = 0; k < gen.frames.size(); ++k) {
      gen.frames[static_cast<std::size_t>(k)] += 0.06 * rng.normal();
      gt.frames[static_cast<std::size_t>(k)] += 0.06 * rng.normal();
    }
    std::vector<double> w(T);
    for (int t = 0; t < T; ++t) w[t] = rng.uniform(0.05, 1.0);
    const double delta = 0.02 + rng.uniform(0.0, 0.2);

    const Tensor pg = body::joint_positions(gen, chain);
    const Tensor pr = body::joint_positions(gt, chain);
    double wsum = 0.0;
    for (double v : w) wsum += v;
    double expect = 0.0;
    for (int t = 0; t < T; ++t) {
      int rec = 0;
      for (int j = 0; j < 4; ++j) {
        double d2 = 0.0;
        for (int c = 0; c < 3; ++c) {
          const double d = pg.at(t, 3 * j + c) - pr.at(t, 3 * j + c);
          d2 += d * d;
        }
        if (std::sqrt(d2) < delta) ++rec;
      }
      expect += w[t] / wsum * rec / 4.0;
    }
    const double got = eval::srgr(gen, gt, w, chain, delta);
    worst = std::max(worst, std::fabs(got - expect) / std::max(std::fabs(expect), 1e-12));
  }
  return worst < 1e-6;
}

bool oracle_fgd(Rng& rng, double& worst) {
  // Closed-form diagonal family: four-point clouds whose sample moments are
  // exact, so Tr (Sa Sb)^{1/2} = sum sqrt(var_a var_b).
  auto cloud = [](double a, double b, double sx, double sy) {
    Tensor t(4, 2, 0.0);
    t.at(0, 0) = a + sx;
    t.at(0, 1) = sy;
    t.at(1, 0) = -a + sx;
    t.at(1, 1) = sy;
    t.at(2, 0) = sx;
    t.at(2, 1) = b + sy;
    t.at(3, 0) = sx;
    t.at(3, 1) = -b + sy;
    return t;
  };
  for (int i = 0; i < 100; ++i) {
    const double va1 = rng.uniform(0.2, 3.0), va2 = rng.uniform(0.2, 3.0);
    const double vb1 = rng.uniform(0.2, 3.0), vb2 = rng.uniform(0.2, 3.0);
    const double mx = rng.uniform(-2.0, 2.0), my = rng.uniform(-2.0, 2.0);
    const Tensor A = cloud(std::sqrt(1.5 * va1), std::sqrt(1.5 * va2), 0.0, 0.0);
    const Tensor B = cloud(std::sqrt(1.5 * vb1), std::sqrt(1.5 * vb2), mx, my);
    const double expect = mx * mx + my * my + (va1 + vb1 - 2.0 * std::sqrt(va1 * vb1)) +
                          (va2 + vb2 - 2.0 * std::sqrt(va2 * vb2));
    const double got = eval::fgd(A, B);
    worst = std::max(worst, std::fabs(got - expect) / std::max(std::fabs(expect), 1e-4));
  }
  return worst < 1e-4;
}

void criterion_1() {
  Rng rng(101);
  double w_sl1 = 0, w_kl = 0, w_ld = 0, w_div = 0, w_ba = 0, w_srgr = 0, w_fgd = 0;
  const bool ok = oracle_smooth_l1(rng, w_sl1) && oracle_kl(rng, w_kl) &&
                  oracle_ld(rng, w_ld) && oracle_diversity(rng, w_div) &&
                  oracle_beat_align(rng, w_ba) && oracle_srgr(rng, w_srgr) &&
                  oracle_fgd(rng, w_fgd);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "(worst rel: sl1 %.1e kl %.1e ld %.1e div %.1e ba %.1e srgr %.1e fgd %.1e)",
                w_sl1, w_kl, w_ld, w_div, w_ba, w_srgr, w_fgd);
  report(1, "formula oracles match independent transcriptions", ok, buf);
}

// ---------------------------------------------------------------------------
// criterion 2: gradient checks for all thirteen loss terms
// ---------------------------------------------------------------------------

speech::AudioModelConfig tiny_audio_cfg() {
  speech::AudioModelConfig c;
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

void criterion_2() {
  double worst = 0.0;
  bool ok = true;

  {  // seven audio terms
    Rng rng(211);
    const auto cfg = tiny_audio_cfg();
    speech::EncoderStack enc(cfg, rng);
    speech::FusionDecoder fd(cfg, rng);
    speech::AudioQuadruple q;
    q.content_ids = {0, 1, 0, 1};
    q.style_ids = {0, 0, 1, 1};
    q.emotion_id = 2;
    for (int k = 0; k < 4; ++k) {
      audio::Filterbank fb;
      fb.n_mels = cfg.n_mels;
      fb.values = rng.normal_tensor(cfg.n_frames, cfg.n_mels);
      fb.standardized = true;
      q.filterbanks[k] = fb.values;
      q.audios[k] = audio::patchify(fb, cfg.patch, cfg.patch_overlap);
    }
    std::vector<nn::ParamRef> params;
    enc.collect_params("enc", params);
    fd.collect_params("fd", params);
    Rng sample_rng(213);
    for (int which = 0; which < 7; ++which) {
      auto builder = [&]() {
        const auto lv = speech::disentangle_loss_vars(q, enc, fd);
        const ad::Var terms[7] = {lv.l_self, lv.l_con, lv.l_emo, lv.l_sty,
                                  lv.l_xemo, lv.l_xsty, lv.l_xcon};
        return terms[which];
      };
      const double err = testutil::max_rel_grad_err(params, builder, 1, sample_rng);
      worst = std::max(worst, err);
      ok = ok && err < 1e-4;
    }
  }

  {  // six gesture terms, each against the parameter group it trains
    Rng rng(221);
    const body::BodyModel chain = body::make_chain_stub(3);
    prior::PriorConfig pcfg;
    pcfg.frames = 4;
    pcfg.input_dim = 18;
    pcfg.d_model = 16;
    pcfg.layers = 2;
    pcfg.heads = 2;
    pcfg.d_ff = 32;
    pcfg.latent_dim = 8;
    diffusion::DenoiserConfig dcfg;
    dcfg.latent_dim = 8;
    dcfg.d_model = 16;
    dcfg.layers = 2;
    dcfg.heads = 2;
    dcfg.d_ff = 32;
    prior::PriorEncoder enc(pcfg, rng);
    prior::PriorDecoder dec(pcfg, rng);
    diffusion::Denoiser den(dcfg, rng);
    const auto sched = diffusion::make_schedule(20);
    diffusion::GestureBatchItem item;
    item.pose = body::identity_pose(pcfg.frames, 3);
    for (int t = 0; t < pcfg.frames; ++t)
      for (int j = 0; j < 3; ++j) item.pose.frames.at(t, 6 * j + 1) += 0.4 * std::sin(0.9 * t + j);
    item.cond.content = rng.normal_tensor(1, 8);
    item.cond.emotion = rng.normal_tensor(1, 8);
    item.cond.style = rng.normal_tensor(1, 8);
    diffusion::JointTrainConfig jc;
    jc.infer_steps = 3;

    auto run = [&](int which) {
      Rng step_rng(223);
      const auto f = diffusion::joint_forward(item, enc, dec, den, chain, sched, jc, step_rng);
      const ad::Var terms[6] = {f.l_rec, f.l_vrec, f.l_kl, f.l_ld, f.l_align, f.l_valign};
      return terms[which];
    };
    auto enc_params = enc.params("enc");
    auto dec_params = dec.params("dec");
    auto den_params = den.params("den");
    Rng sample_rng(227);
    for (int which = 0; which < 6; ++which) {
      std::vector<nn::ParamRef> target;
      if (which <= 1) {  // rec, vrec: encoder + decoder
        target = enc_params;
        target.insert(target.end(), dec_params.begin(), dec_params.end());
      } else if (which == 2) {  // kl: encoder only
        target = enc_params;
      } else if (which == 3) {  // ld: denoiser only
        target = den_params;
      } else {  // align terms train the decoder only
        target = dec_params;
      }
      const double err =
          testutil::max_rel_grad_err(target, [&]() { return run(which); }, 2, sample_rng);
      worst = std::max(worst, err);
      ok = ok && err < 1e-4;
    }
  }

  char buf[64];
  std::snprintf(buf, sizeof(buf), "(worst rel err %.2e)", worst);
  report(2, "13 loss terms match central finite differences", ok, buf);
}

// ---------------------------------------------------------------------------
// criterion 3: planted-noise diffusion inversion
// ---------------------------------------------------------------------------

void criterion_3() {
  struct Planted : diffusion::NoisePredictor {
    Tensor eps;
    Tensor predict(const Tensor&, int) const override { return eps; }
  };
  const auto sched = diffusion::make_schedule(1000);
  Rng rng(307);
  Planted oracle;
  oracle.eps = rng.normal_tensor(1, 16);
  const Tensor z0 = rng.normal_tensor(1, 16, 1.3);
  const Tensor z_top = diffusion::q_sample(z0, sched.steps - 1, oracle.eps, sched);
  double worst = 0.0;
  for (int steps : {1000, 50}) {
    const Tensor rec = diffusion::ddim_denoise_from(oracle, z_top, steps, sched);
    for (int i = 0; i < 16; ++i) worst = std::max(worst, std::fabs(rec.at(0, i) - z0.at(0, i)));
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "(worst abs err %.2e)", worst);
  report(3, "reverse chain inverts q_sample (1000 and 50 steps)", worst < 1e-5, buf);
}

// ---------------------------------------------------------------------------
// criterion 4: stop-gradient contracts, parameter-wise
// ---------------------------------------------------------------------------

void criterion_4() {
  Rng rng(401);
  const body::BodyModel chain = body::make_chain_stub(3);
  prior::PriorConfig pcfg;
  pcfg.frames = 6;
  pcfg.input_dim = 18;
  pcfg.d_model = 16;
  pcfg.layers = 2;
  pcfg.heads = 2;
  pcfg.d_ff = 32;
  pcfg.latent_dim = 8;
  diffusion::DenoiserConfig dcfg;
  dcfg.latent_dim = 8;
  dcfg.d_model = 16;
  dcfg.layers = 2;
  dcfg.heads = 2;
  dcfg.d_ff = 32;
  prior::PriorEncoder enc(pcfg, rng);
  prior::PriorDecoder dec(pcfg, rng);
  diffusion::Denoiser den(dcfg, rng);
  const auto sched = diffusion::make_schedule(50);
  diffusion::GestureBatchItem item;
  item.pose = body::identity_pose(pcfg.frames, 3);
  for (int t = 0; t < pcfg.frames; ++t) item.pose.frames.at(t, 1) += 0.3 * std::sin(0.8 * t);
  item.cond.content = rng.normal_tensor(1, 8);
  item.cond.emotion = rng.normal_tensor(1, 8);
  item.cond.style = rng.normal_tensor(1, 8);
  diffusion::JointTrainConfig jc;
  jc.infer_steps = 4;

  auto all_zero = [](const std::vector<nn::ParamRef>& ps) {
    for (const auto& p : ps) {
      const Tensor g = p.var->grad();
      for (std::int64_t i = 0; i < g.size(); ++i)
        if (g[static_cast<std::size_t>(i)] != 0.0) return false;
    }
    return true;
  };
  auto zero_all = [](const std::vector<nn::ParamRef>& ps) {
    for (const auto& p : ps) p.var->zero_grad();
  };

  auto enc_params = enc.params("enc");
  auto dec_params = dec.params("dec");
  auto den_params = den.params("den");

  Rng r1(403);
  const auto f1 = diffusion::joint_forward(item, enc, dec, den, chain, sched, jc, r1);
  zero_all(enc_params);
  zero_all(dec_params);
  zero_all(den_params);
  ad::backward(ad::add(f1.l_align, f1.l_valign));
  const bool align_ok = all_zero(enc_params) && all_zero(den_params) && !all_zero(dec_params);

  Rng r2(405);
  const auto f2 = diffusion::joint_forward(item, enc, dec, den, chain, sched, jc, r2);
  zero_all(enc_params);
  zero_all(dec_params);
  zero_all(den_params);
  ad::backward(f2.l_ld);
  const bool ld_ok = all_zero(enc_params) && all_zero(dec_params) && !all_zero(den_params);

  report(4, "stop-gradient contracts hold parameter-wise", align_ok && ld_ok,
         align_ok ? (ld_ok ? "" : "(l_ld leaked)") : "(alignment losses leaked)");
}

// ---------------------------------------------------------------------------
// criterion 5: cross-index maps
// ---------------------------------------------------------------------------

void criterion_5() {
  const bool ok = speech::cross_index_emotion_style(1) == 2 &&
                  speech::cross_index_emotion_style(2) == 1 &&
                  speech::cross_index_emotion_style(3) == 4 &&
                  speech::cross_index_emotion_style(4) == 3 &&
                  speech::cross_index_content(1) == 3 && speech::cross_index_content(2) == 4 &&
                  speech::cross_index_content(3) == 1 && speech::cross_index_content(4) == 2;
  report(5, "cross-index maps reproduce the swap tables", ok, "");
}

// ---------------------------------------------------------------------------
// criterion 9: metric fixed points (cheap, done before the training phase)
// ---------------------------------------------------------------------------

void criterion_9() {
  Rng rng(901);
  const Tensor feats = rng.normal_tensor(16, 5);
  const double fgd_aa = std::fabs(eval::fgd(feats, feats));
  const double div_const = std::fabs(eval::diversity(Tensor::full(8, 4, 3.0)));
  const double ba_same = std::fabs(eval::beat_align({0.2, 0.9, 1.7}, {0.2, 0.9, 1.7}) - 1.0);
  const body::BodyModel chain = body::make_chain_stub(4);
  body::PoseSequence pose = body::identity_pose(4, 4);
  for (std::int64_t i = 0; i < pose.frames.size(); ++i)
    pose.frames[static_cast<std::size_t>(i)] += 0.1 * rng.normal();
  const double srgr_same =
      std::fabs(eval::srgr(pose, pose, {0.4, 0.8, 0.2, 1.0}, chain, 0.05) - 1.0);
  const bool ok = fgd_aa < 1e-6 && div_const < 1e-6 && ba_same < 1e-6 && srgr_same < 1e-6;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "(fgd %.1e div %.1e ba %.1e srgr %.1e)", fgd_aa, div_const,
                ba_same, srgr_same);
  report(9, "metric fixed points", ok, buf);
}

// ---------------------------------------------------------------------------
// criteria 6, 7, 8, 10: synthetic-corpus training phase
// ---------------------------------------------------------------------------

speech::AudioModelConfig desk_audio_cfg() {
  speech::AudioModelConfig c;
  c.n_frames = 96;
  c.n_mels = 16;
  c.patch = 8;
  c.patch_overlap = 2;
  c.d_model = 16;
  c.layers = 1;
  c.heads = 2;
  c.d_ff = 32;
  c.latent_dim = 12;
  c.fusion_dim = 16;
  c.fusion_layers = 1;
  c.fusion_heads = 2;
  c.decoder_layers = 1;
  c.decoder_heads = 2;
  c.n_emotions = 8;
  c.n_styles = 2;
  return c;
}

void heavy_phase() {
  const std::string dir = testutil::temp_dir("acceptance");

  // --- corpus: 3 contents x 2 styles x 8 emotions, 1 s windows ---
  data::SyntheticCorpusSpec spec;
  spec.n_styles = 2;
  spec.n_contents = 3;
  spec.n_emotions = 8;
  spec.clip_seconds = 1.0;
  const auto records = data::generate_synthetic_corpus(spec, dir + "/corpus");
  data::WindowingOptions wopts;
  wopts.window_s = 1.0;
  wopts.fps = spec.fps;
  wopts.target_frames = 96;
  wopts.fb.n_mels = 16;
  const auto windows = data::window_dataset(records, wopts);

  std::vector<data::WindowedSample> train_w, val_w;
  for (const auto& w : windows)
    (w.content_id <= 1 ? train_w : val_w).push_back(w);

  std::vector<audio::Filterbank> train_fbs;
  for (const auto& w : train_w) train_fbs.push_back(w.filterbank);
  const auto [fb_mean, fb_std] = audio::corpus_stats(train_fbs);
  const auto cfg = desk_audio_cfg();
  const auto quadruples =
      data::build_quadruples(train_w, fb_mean, fb_std, cfg.patch, cfg.patch_overlap);

  // --- criterion 6a: audio overfit smoke, exactly the 8-quadruple corpus ---
  Rng rng(613);
  speech::AudioModelBundle am(cfg, rng);
  am.fb_mean = fb_mean;
  am.fb_std = fb_std;
  {
    speech::AudioTrainConfig tc;
    tc.steps = 500;
    tc.batch_quadruples = 4;
    tc.lr = 2e-3;
    tc.seed = 617;
    const auto hist = speech::train_audio_model(quadruples, am.enc, am.fd, tc);
    auto window_mean = [&](int lo, int hi) {
      double acc = 0.0;
      for (int i = lo; i < hi; ++i) acc += hist[i].losses.total;
      return acc / (hi - lo);
    };
    const double early = window_mean(5, 25);
    const double late = window_mean(480, 500);
    char buf[96];
    std::snprintf(buf, sizeof(buf), "(%zu quadruples, smoothed %.3f -> %.3f, %.0f s elapsed)",
                  quadruples.size(), early, late, elapsed_s());
    report(6, "overfit smoke: audio total loss drops >= 50% in 500 steps", late < 0.5 * early,
           buf);
  }

  // --- criterion 7a: classification accuracy on the held-out content ---
  {
    speech::AudioTrainConfig tc;  // keep training the same model to convergence
    tc.steps = 900;
    tc.batch_quadruples = 4;
    tc.lr = 2e-3;
    tc.seed = 619;
    speech::train_audio_model(quadruples, am.enc, am.fd, tc);

    std::vector<audio::PatchSequence> val_ps;
    std::vector<int> emo_labels, sty_labels;
    for (const auto& w : val_w) {
      const audio::Filterbank std_fb = audio::standardize(w.filterbank, fb_mean, fb_std);
      val_ps.push_back(audio::patchify(std_fb, cfg.patch, cfg.patch_overlap));
      emo_labels.push_back(w.emotion_id);
      sty_labels.push_back(w.style_id);
    }
    const auto acc = speech::evaluate_audio_classifiers(am.enc, val_ps, emo_labels, sty_labels);

    // extractor on the same split
    eval::ExtractorConfig ecfg;
    ecfg.frames = 30;
    ecfg.input_dim = body::kPoseDim;
    ecfg.d_model = 16;
    ecfg.layers = 1;
    ecfg.heads = 2;
    ecfg.d_ff = 32;
    ecfg.n_classes = 8;
    Rng erng(631);
    eval::MotionExtractor extractor(ecfg, erng);
    std::vector<eval::LabeledMotion> etrain, eval_set;
    for (const auto& w : train_w) etrain.push_back({w.pose, w.emotion_id});
    for (const auto& w : val_w) eval_set.push_back({w.pose, w.emotion_id});
    eval::ExtractorTrainConfig etc;
    etc.steps = 500;
    etc.batch = 8;
    etc.lr = 2e-3;
    etc.seed = 633;
    const auto eres = eval::train_extractor(etrain, eval_set, extractor, etc);

    // converged encoders map same-content different-style audio to nearby
    // content latents
    double worst_content_cos = 1.0;
    for (const auto& wa : train_w) {
      if (wa.style_id != 0) continue;
      for (const auto& wb : train_w) {
        if (wb.style_id != 1 || wb.content_id != wa.content_id ||
            wb.emotion_id != wa.emotion_id || wb.window_index != wa.window_index)
          continue;
        const auto la = am.enc.encode(audio::patchify(
            audio::standardize(wa.filterbank, fb_mean, fb_std), cfg.patch, cfg.patch_overlap));
        const auto lb = am.enc.encode(audio::patchify(
            audio::standardize(wb.filterbank, fb_mean, fb_std), cfg.patch, cfg.patch_overlap));
        double d = 0, na = 0, nb = 0;
        for (int i = 0; i < cfg.latent_dim; ++i) {
          d += la.content.at(0, i) * lb.content.at(0, i);
          na += la.content.at(0, i) * la.content.at(0, i);
          nb += lb.content.at(0, i) * lb.content.at(0, i);
        }
        worst_content_cos = std::min(worst_content_cos, d / std::sqrt(na * nb));
      }
    }

    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "(emotion %.1f%% style %.1f%% extractor %.1f%% content-cos %.2f)",
                  acc.emotion_pct, acc.style_pct, eres.val_accuracy_pct, worst_content_cos);
    report(7, "synthetic classification >= 95% (audio heads and extractor)",
           acc.emotion_pct >= 95.0 && acc.style_pct >= 95.0 &&
               eres.val_accuracy_pct >= 95.0 && worst_content_cos > 0.9,
           buf);

    // --- gesture corpus: the 8 (content 0, style 0) sequences ---
    std::vector<diffusion::GestureBatchItem> gest_corpus;
    for (const auto& w : train_w) {
      if (w.content_id != 0 || w.style_id != 0) continue;
      diffusion::GestureBatchItem item;
      item.pose = w.pose;
      const audio::Filterbank std_fb = audio::standardize(w.filterbank, fb_mean, fb_std);
      item.cond = am.enc.encode(audio::patchify(std_fb, cfg.patch, cfg.patch_overlap));
      gest_corpus.push_back(std::move(item));
    }

    prior::PriorConfig pcfg;
    pcfg.frames = 30;
    pcfg.input_dim = body::kPoseDim;
    pcfg.d_model = 24;
    pcfg.layers = 2;
    pcfg.heads = 2;
    pcfg.d_ff = 48;
    pcfg.latent_dim = 12;
    diffusion::DenoiserConfig dcfg;
    dcfg.latent_dim = 12;
    dcfg.d_model = 24;
    dcfg.layers = 2;
    dcfg.heads = 2;
    dcfg.d_ff = 48;
    Rng grng(641);
    diffusion::GestureModelBundle gm(pcfg, dcfg, grng);
    gm.steps_infer = 8;
    const auto sched = gm.schedule();
    const body::BodyModel stub = body::make_stub_body();

    std::vector<nn::ParamRef> gparams;
    gm.enc.collect_params("prior_enc", gparams);
    gm.dec.collect_params("prior_dec", gparams);
    gm.den.collect_params("denoiser", gparams);
    nn::AdamW gopt(gparams, 2e-3);
    diffusion::JointTrainConfig jc;
    jc.infer_steps = gm.steps_infer;

    // --- criterion 6b: gesture overfit smoke on the 8-sequence corpus ---
    Rng train_rng(643);
    std::vector<double> totals;
    std::size_t cursor = 0;
    for (int s = 0; s < 500; ++s) {
      std::vector<diffusion::GestureBatchItem> batch;
      for (int b = 0; b < 4; ++b) batch.push_back(gest_corpus[(cursor++) % gest_corpus.size()]);
      const auto rep = diffusion::joint_train_step(batch, gm.enc, gm.dec, gm.den, stub, sched,
                                                   gopt, jc, train_rng);
      totals.push_back(rep.l_total);
    }
    auto window_mean = [&](int lo, int hi) {
      double acc = 0.0;
      for (int i = lo; i < hi; ++i) acc += totals[i];
      return acc / (hi - lo);
    };
    const double gearly = window_mean(5, 25);
    const double glate = window_mean(480, 500);
    char gbuf[96];
    std::snprintf(gbuf, sizeof(gbuf), "(%zu sequences, smoothed %.3f -> %.3f, %.0f s elapsed)",
                  gest_corpus.size(), gearly, glate, elapsed_s());
    report(6, "overfit smoke: gesture total loss drops >= 50% in 500 steps",
           glate < 0.5 * gearly, gbuf);

    // continue training so the edit protocol has converged models
    for (int s = 0; s < 2500; ++s) {
      std::vector<diffusion::GestureBatchItem> batch;
      for (int b = 0; b < 4; ++b) batch.push_back(gest_corpus[(cursor++) % gest_corpus.size()]);
      diffusion::joint_train_step(batch, gm.enc, gm.dec, gm.den, stub, sched, gopt, jc,
                                  train_rng);
    }

    // --- criterion 8: editing sanity ---
    const data::Config base_cfg = data::Config::defaults();
    const audio::Waveform wav_a =
        audio::load_audio(dir + "/corpus/clips/c0_e0_s0.wav", 16000);
    const auto plain = edit::generate_edited(wav_a, wav_a, edit::EditMode::none, gm.steps_infer,
                                             71, am, gm, base_cfg);
    const auto self_swap = edit::generate_edited(wav_a, wav_a, edit::EditMode::emotion_swap,
                                                 gm.steps_infer, 71, am, gm, base_cfg);
    bool bit_exact = plain.frames.same_shape(self_swap.frames);
    for (std::int64_t i = 0; bit_exact && i < plain.frames.size(); ++i)
      bit_exact = plain.frames[static_cast<std::size_t>(i)] ==
                  self_swap.frames[static_cast<std::size_t>(i)];

    int hits = 0, total = 0;
    for (int b = 0; b < 8; ++b) {
      const audio::Waveform wav_b = audio::load_audio(
          dir + "/corpus/clips/c1_e" + std::to_string(b) + "_s0.wav", 16000);
      for (std::uint64_t seed : {81u, 82u, 83u, 84u, 85u}) {
        const auto edited = edit::generate_edited(wav_a, wav_b, edit::EditMode::emotion_swap,
                                                  gm.steps_infer, seed, am, gm, base_cfg);
        const Tensor logits = extractor.logits(edited);
        int best = 0;
        for (int c = 1; c < logits.cols(); ++c)
          if (logits.at(0, c) > logits.at(0, best)) best = c;
        hits += best == b ? 1 : 0;
        ++total;
      }
    }
    const double edit_acc = 100.0 * hits / total;
    char ebuf[96];
    std::snprintf(ebuf, sizeof(ebuf), "(self-swap %s, edited-label accuracy %.1f%%)",
                  bit_exact ? "bit-exact" : "MISMATCH", edit_acc);
    report(8, "editing sanity (identity swap, cross-emotion label shift)",
           bit_exact && edit_acc > 12.5, ebuf);

    // --- criterion 10: CLI end-to-end determinism on the saved checkpoints ---
    speech::save_audio_model(dir + "/audio.ckpt", am);
    diffusion::save_gesture_model(dir + "/gesture.ckpt", gm);
    data::Config cli_cfg = data::Config::defaults();
    cli_cfg.set("audio.target_frames", "96");
    cli_cfg.set("audio.n_mels", "16");
    cli_cfg.set("data.window_s", "1");
    cli_cfg.save(dir + "/desk.cfg");
    bool cli_ok = true;
    for (const char* out : {"/cli_a", "/cli_b"})
      cli_ok = cli_ok &&
               cli::run_cli({"generate", "--audio", dir + "/corpus/clips/c0_e2_s0.wav",
                             "--audio-ckpt", dir + "/audio.ckpt", "--gesture-ckpt",
                             dir + "/gesture.ckpt", "--seed", "97", "--out", dir + out,
                             "--config", dir + "/desk.cfg"}) == 0;
    cli_ok = cli_ok && testutil::files_identical(dir + "/cli_a/frames.f32",
                                                 dir + "/cli_b/frames.f32") &&
             testutil::files_identical(dir + "/cli_a/meta.json", dir + "/cli_b/meta.json") &&
             testutil::files_identical(dir + "/cli_a/latents.json", dir + "/cli_b/latents.json");
    report(10, "generate CLI is byte-identical across runs at equal seed", cli_ok, "");
  }
}

}  // namespace

int main() {
  g_start = std::chrono::steady_clock::now();
  std::printf("acceptance suite\n");
  criterion_1();
  criterion_5();
  criterion_9();
  criterion_3();
  criterion_4();
  criterion_2();
  heavy_phase();
  std::printf("done in %.0f s, %d failure(s)\n", elapsed_s(), g_failures);
  return g_failures;
}
