// src/cli.cpp

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

#include "emogest/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "emogest/dataset.hpp"
#include "emogest/editing.hpp"
#include "emogest/errors.hpp"
#include "emogest/extractor.hpp"
#include "emogest/metrics.hpp"

namespace emogest {
namespace cli {

namespace {

data::Config load_config(const std::string& path) {
  return path.empty() ? data::Config::defaults() : data::Config::load(path);
}

speech::AudioModelConfig audio_cfg_from(const data::Config& c) {
  speech::AudioModelConfig a;
  a.n_frames = c.get_int("audio.target_frames");
  a.n_mels = c.get_int("audio.n_mels");
  a.patch = c.get_int("audio.patch");
  a.patch_overlap = c.get_int("audio.patch_overlap");
  a.d_model = c.get_int("model.audio.d_model");
  a.layers = c.get_int("model.audio.layers");
  a.heads = c.get_int("model.audio.heads");
  a.d_ff = c.get_int("model.audio.d_ff");
  a.latent_dim = c.get_int("model.audio.latent_dim");
  a.fusion_dim = c.get_int("model.audio.fusion_dim");
  a.fusion_layers = c.get_int("model.audio.fusion_layers");
  a.fusion_heads = c.get_int("model.audio.fusion_heads");
  a.decoder_layers = c.get_int("model.audio.decoder_layers");
  a.decoder_heads = c.get_int("model.audio.decoder_heads");
  a.n_emotions = c.get_int("model.audio.n_emotions");
  a.n_styles = c.get_int("model.audio.n_styles");
  return a;
}

prior::PriorConfig prior_cfg_from(const data::Config& c) {
  prior::PriorConfig p;
  p.frames = static_cast<int>(std::lround(c.get_double("data.window_s") * c.get_double("data.fps")));
  p.input_dim = 6 * c.get_int("data.joints");
  p.d_model = c.get_int("model.prior.d_model");
  p.layers = c.get_int("model.prior.layers");
  p.heads = c.get_int("model.prior.heads");
  p.d_ff = c.get_int("model.prior.d_ff");
  p.latent_dim = c.get_int("model.prior.latent_dim");
  p.memory_tokens = c.get_int("model.prior.memory_tokens");
  return p;
}

diffusion::DenoiserConfig denoiser_cfg_from(const data::Config& c) {
  diffusion::DenoiserConfig d;
  d.latent_dim = c.get_int("model.prior.latent_dim");
  d.d_model = c.get_int("model.denoiser.d_model");
  d.layers = c.get_int("model.denoiser.layers");
  d.heads = c.get_int("model.denoiser.heads");
  d.d_ff = c.get_int("model.denoiser.d_ff");
  return d;
}

eval::ExtractorConfig extractor_cfg_from(const data::Config& c) {
  eval::ExtractorConfig e;
  e.frames = static_cast<int>(std::lround(c.get_double("data.window_s") * c.get_double("data.fps")));
  e.input_dim = 6 * c.get_int("data.joints");
  e.d_model = c.get_int("model.extractor.d_model");
  e.layers = c.get_int("model.extractor.layers");
  e.heads = c.get_int("model.extractor.heads");
  e.d_ff = c.get_int("model.extractor.d_ff");
  e.n_classes = c.get_int("model.audio.n_emotions");
  return e;
}

data::WindowingOptions windowing_from(const data::Config& c) {
  data::WindowingOptions w;
  w.window_s = c.get_double("data.window_s");
  w.fps = c.get_double("data.fps");
  w.target_frames = c.get_int("audio.target_frames");
  w.fb.n_mels = c.get_int("audio.n_mels");
  w.fb.frame_shift_ms = c.get_double("audio.frame_shift_ms");
  w.fb.frame_window_ms = c.get_double("audio.frame_window_ms");
  w.sample_rate = c.get_int("audio.sample_rate");
  return w;
}

std::uint64_t resolve_seed(const data::Config& cfg, std::optional<std::uint64_t> flag_seed) {
  // explicit flag beats AMUSE_SEED beats config
  if (flag_seed) return *flag_seed;
  return cfg.seed();
}

std::pair<double, double> window_stats(const std::vector<data::WindowedSample>& windows) {
  std::vector<audio::Filterbank> fbs;
  fbs.reserve(windows.size());
  for (const auto& w : windows) fbs.push_back(w.filterbank);
  return audio::corpus_stats(fbs);
}

int cmd_synth_data(const std::string& out, int styles, int contents, int emotions,
                   double seconds, std::uint64_t seed) {
  data::SyntheticCorpusSpec spec;
  spec.n_styles = styles;
  spec.n_contents = contents;
  spec.n_emotions = emotions;
  spec.clip_seconds = seconds;
  spec.seed = seed;
  const auto records = data::generate_synthetic_corpus(spec, out);

  // deterministic semantic scores so the srgr path is exercised end to end
  std::map<std::string, std::vector<double>> scores;
  const int frames = static_cast<int>(std::lround(seconds * spec.fps));
  for (const auto& r : records) {
    std::vector<double> w(frames);
    for (int t = 0; t < frames; ++t)
      w[t] = 0.3 + 0.4 * std::fabs(std::sin(0.21 * t + r.content_id));
    scores[r.clip_id] = std::move(w);
  }
  data::save_semantic_scores(out + "/semantics.csv", scores);
  std::printf("wrote %zu clips under %s\n", records.size(), out.c_str());
  return 0;
}

int cmd_preprocess(const std::string& data_dir, const std::string& out,
                   const std::string& config_path) {
  const data::Config cfg = load_config(config_path);
  const auto records = data::load_dataset(data_dir);
  const auto windows = data::window_dataset(records, windowing_from(cfg));
  if (windows.empty()) throw ConfigError("preprocess: no usable windows in " + data_dir);
  std::filesystem::create_directories(out);
  const auto [mean, std] = window_stats(windows);

  std::ofstream csv(out + "/windows.csv");
  csv << "clip_id,window,emotion_id,style_id,content_id\n";
  for (const auto& w : windows) {
    const std::string base = w.clip_id + "_w" + std::to_string(w.window_index);
    audio::save_filterbank(out + "/" + base + ".fb", w.filterbank);
    body::save_motion(out + "/" + base + ".motion", w.pose);
    csv << w.clip_id << "," << w.window_index << "," << w.emotion_id << "," << w.style_id
        << "," << w.content_id << "\n";
  }
  std::ofstream stats(out + "/stats.json");
  stats << nlohmann::json({{"fb_mean", mean}, {"fb_std", std}}).dump(2) << "\n";
  std::printf("wrote %zu windows under %s (fb mean %.4f std %.4f)\n", windows.size(),
              out.c_str(), mean, std);
  return 0;
}

int cmd_train_audio(const std::string& data_dir, const std::string& out,
                    const std::string& config_path, std::optional<int> steps,
                    std::optional<double> lr, std::optional<std::uint64_t> seed,
                    const std::string& log_path) {
  const data::Config cfg = load_config(config_path);
  const auto records = data::load_dataset(data_dir);
  const auto windows = data::window_dataset(records, windowing_from(cfg));
  if (windows.empty()) throw ConfigError("train-audio: no usable windows in " + data_dir);
  const auto [mean, std] = window_stats(windows);
  const auto quadruples = data::build_quadruples(windows, mean, std, cfg.get_int("audio.patch"),
                                                 cfg.get_int("audio.patch_overlap"));

  Rng rng(resolve_seed(cfg, seed));
  speech::AudioModelBundle bundle(audio_cfg_from(cfg), rng);
  bundle.fb_mean = mean;
  bundle.fb_std = std;

  speech::AudioTrainConfig tc;
  tc.steps = steps.value_or(cfg.get_int("train.steps"));
  tc.lr = lr.value_or(cfg.get_double("train.lr"));
  tc.weight_decay = cfg.get_double("train.weight_decay");
  tc.batch_quadruples = std::min<int>(cfg.get_int("train.batch"),
                                      static_cast<int>(quadruples.size()));
  tc.seed = resolve_seed(cfg, seed);
  tc.log_path = log_path;
  const auto history = speech::train_audio_model(quadruples, bundle.enc, bundle.fd, tc);
  speech::save_audio_model(out, bundle);
  std::printf("trained audio model on %zu quadruples for %d steps (total %.4f -> %.4f), saved %s\n",
              quadruples.size(), tc.steps, history.front().losses.total,
              history.back().losses.total, out.c_str());
  return 0;
}

int cmd_train_gesture(const std::string& data_dir, const std::string& audio_ckpt,
                      const std::string& out, const std::string& config_path,
                      std::optional<int> steps, std::optional<double> lr,
                      std::optional<std::uint64_t> seed, const std::string& log_path) {
  const data::Config cfg = load_config(config_path);
  const speech::AudioModelBundle am = speech::load_audio_model(audio_ckpt);
  const auto records = data::load_dataset(data_dir);
  const auto windows = data::window_dataset(records, windowing_from(cfg));
  if (windows.empty()) throw ConfigError("train-gesture: no usable windows in " + data_dir);

  std::vector<diffusion::GestureBatchItem> corpus;
  for (const auto& w : windows) {
    diffusion::GestureBatchItem item;
    item.pose = w.pose;
    const audio::Filterbank std_fb = audio::standardize(w.filterbank, am.fb_mean, am.fb_std);
    item.cond = am.enc.encode(audio::patchify(std_fb, am.cfg.patch, am.cfg.patch_overlap));
    corpus.push_back(std::move(item));
  }

  const std::uint64_t run_seed = resolve_seed(cfg, seed);
  Rng rng(run_seed);
  diffusion::GestureModelBundle gm(prior_cfg_from(cfg), denoiser_cfg_from(cfg), rng);
  gm.steps_train = cfg.get_int("diffusion.steps_train");
  gm.steps_infer = cfg.get_int("diffusion.steps_infer");
  gm.beta_min = cfg.get_double("diffusion.beta_min");
  gm.beta_max = cfg.get_double("diffusion.beta_max");
  gm.fps = cfg.get_double("data.fps");
  if (am.cfg.latent_dim != gm.dcfg.latent_dim)
    throw ConfigError("train-gesture: audio latent_dim differs from the motion latent_dim");
  const diffusion::DiffusionSchedule sched = gm.schedule();

  std::vector<nn::ParamRef> params;
  gm.enc.collect_params("prior_enc", params);
  gm.dec.collect_params("prior_dec", params);
  gm.den.collect_params("denoiser", params);
  nn::AdamW opt(params, lr.value_or(cfg.get_double("train.lr")),
                cfg.get_double("train.weight_decay"));
  diffusion::JointTrainConfig jc;
  jc.kl_weight = cfg.get_double("train.kl_weight");
  jc.infer_steps = gm.steps_infer;

  const body::BodyModel stub = body::make_stub_body();
  const int n_steps = steps.value_or(cfg.get_int("train.steps"));
  const int batch = std::min<int>(cfg.get_int("train.batch"), static_cast<int>(corpus.size()));
  std::ofstream log;
  if (!log_path.empty()) log.open(log_path);
  Rng train_rng(run_seed + 1);
  double first_total = 0.0, last_total = 0.0;
  std::size_t cursor = 0;
  for (int s = 0; s < n_steps; ++s) {
    std::vector<diffusion::GestureBatchItem> batch_items;
    for (int b = 0; b < batch; ++b) {
      batch_items.push_back(corpus[cursor % corpus.size()]);
      ++cursor;
    }
    const auto rep = diffusion::joint_train_step(batch_items, gm.enc, gm.dec, gm.den, stub,
                                                 sched, opt, jc, train_rng);
    if (s == 0) first_total = rep.l_total;
    last_total = rep.l_total;
    if (log.is_open())
      log << nlohmann::json({{"step", s},
                             {"l_rec", rep.l_rec},
                             {"l_vrec", rep.l_vrec},
                             {"l_kl", rep.l_kl},
                             {"l_ld", rep.l_ld},
                             {"l_align", rep.l_align},
                             {"l_valign", rep.l_valign},
                             {"total", rep.l_total},
                             {"grad_norm", rep.grad_norm}})
                 .dump()
          << "\n";
  }
  save_gesture_model(out, gm);
  std::printf("trained gesture model on %zu windows for %d steps (total %.4f -> %.4f), saved %s\n",
              corpus.size(), n_steps, first_total, last_total, out.c_str());
  return 0;
}

int cmd_generate(const std::string& audio_path, const std::string& audio_ckpt,
                 const std::string& gesture_ckpt, const std::string& out,
                 std::optional<int> steps, std::optional<std::uint64_t> seed,
                 const std::string& config_path) {
  const data::Config cfg = load_config(config_path);
  const speech::AudioModelBundle am = speech::load_audio_model(audio_ckpt);
  const diffusion::GestureModelBundle gm = diffusion::load_gesture_model(gesture_ckpt);
  const audio::Waveform w = audio::load_audio(audio_path, cfg.get_int("audio.sample_rate"));
  const body::PoseSequence motion =
      edit::generate_edited(w, w, edit::EditMode::none, steps.value_or(gm.steps_infer),
                            resolve_seed(cfg, seed), am, gm, cfg);
  body::save_motion(out, motion);
  save_latents(out + "/latents.json", edit::encode_waveform(w, am, cfg));
  std::printf("generated %d frames into %s\n", motion.n_frames(), out.c_str());
  return 0;
}

int cmd_edit(const std::string& audio_a, const std::string& audio_b, const std::string& mode,
             const std::string& audio_ckpt, const std::string& gesture_ckpt,
             const std::string& out, std::optional<int> steps,
             std::optional<std::uint64_t> seed, const std::string& config_path) {
  const data::Config cfg = load_config(config_path);
  const speech::AudioModelBundle am = speech::load_audio_model(audio_ckpt);
  const diffusion::GestureModelBundle gm = diffusion::load_gesture_model(gesture_ckpt);
  const int rate = cfg.get_int("audio.sample_rate");
  const body::PoseSequence motion = edit::generate_edited(
      audio::load_audio(audio_a, rate), audio::load_audio(audio_b, rate),
      edit::parse_mode(mode), steps.value_or(gm.steps_infer), resolve_seed(cfg, seed), am, gm,
      cfg);
  body::save_motion(out, motion);
  std::printf("edited (%s) %d frames into %s\n", mode.c_str(), motion.n_frames(), out.c_str());
  return 0;
}

int cmd_evaluate(const std::string& gen_dir, const std::string& ref_dir,
                 const std::string& extractor_ckpt, bool train_extractor_flag,
                 const std::string& semantics_csv, const std::string& out_path,
                 const std::string& config_path, std::optional<std::uint64_t> seed) {
  const data::Config cfg = load_config(config_path);
  const auto records = data::load_dataset(ref_dir);
  const auto windows = data::window_dataset(records, windowing_from(cfg));
  if (windows.empty()) throw ConfigError("evaluate: reference corpus has no usable windows");

  // pair clip ids with generated motion directories
  struct Pair {
    const data::WindowedSample* ref;
    body::PoseSequence gen;
    std::string audio_path;
  };
  std::vector<Pair> pairs;
  for (const auto& w : windows) {
    if (w.window_index != 0) continue;  // one generated clip per reference clip
    const std::string dir = gen_dir + "/" + w.clip_id + ".motion";
    if (!std::filesystem::exists(dir + "/meta.json")) continue;
    Pair p;
    p.ref = &w;
    p.gen = body::load_motion(dir);
    for (const auto& r : records)
      if (r.clip_id == w.clip_id) p.audio_path = r.audio_path;
    pairs.push_back(std::move(p));
  }
  if (pairs.size() < 2)
    throw ConfigError("evaluate: need generated motions for at least 2 reference clips in " +
                      gen_dir);

  // motion extractor: load or train on the reference windows
  eval::MotionExtractor extractor = [&]() {
    if (!extractor_ckpt.empty() && !train_extractor_flag)
      return eval::load_extractor(extractor_ckpt);
    std::vector<eval::LabeledMotion> labeled;
    for (const auto& w : windows) labeled.push_back({w.pose, w.emotion_id});
    Rng rng(resolve_seed(cfg, seed));
    eval::MotionExtractor ex(extractor_cfg_from(cfg), rng);
    eval::ExtractorTrainConfig tc;
    tc.steps = cfg.get_int("train.steps");
    tc.lr = cfg.get_double("train.lr");
    tc.batch = std::min<int>(cfg.get_int("train.batch"), static_cast<int>(labeled.size()));
    tc.seed = resolve_seed(cfg, seed);
    eval::train_extractor(labeled, {}, ex, tc);
    if (!extractor_ckpt.empty()) eval::save_extractor(extractor_ckpt, ex);
    return ex;
  }();

  std::vector<body::PoseSequence> gen_motions, ref_motions;
  std::vector<int> labels;
  for (const auto& p : pairs) {
    gen_motions.push_back(p.gen);
    ref_motions.push_back(p.ref->pose);
    labels.push_back(p.ref->emotion_id);
  }
  const auto gen_feats = eval::extract_features(extractor, gen_motions);
  const auto ref_feats = eval::extract_features(extractor, ref_motions);

  const body::BodyModel stub = body::make_stub_body();
  const double sigma = cfg.get_double("eval.ba_sigma");
  const double delta = cfg.get_double("eval.srgr_delta");
  const double min_gap = cfg.get_double("eval.beat_min_gap_s");

  std::map<std::string, std::vector<double>> semantics;
  if (!semantics_csv.empty()) semantics = data::load_semantic_scores(semantics_csv);

  double ba_acc = 0.0, srgr_acc = 0.0;
  for (const auto& p : pairs) {
    const audio::Waveform w =
        audio::load_audio(p.audio_path, cfg.get_int("audio.sample_rate"));
    const auto audio_beats = eval::detect_audio_beats(w);
    const auto kin_beats = eval::detect_kinematic_beats(p.gen, stub, min_gap);
    ba_acc += eval::beat_align(kin_beats, audio_beats, sigma);

    std::vector<double> weights(p.gen.n_frames(), 1.0);
    const auto it = semantics.find(p.ref->clip_id);
    if (it != semantics.end())
      for (int t = 0; t < p.gen.n_frames() && t < static_cast<int>(it->second.size()); ++t)
        weights[t] = it->second[t];
    srgr_acc += eval::srgr(p.gen, p.ref->pose, weights, stub, delta);
  }

  const double fgd_eps = cfg.get_double("eval.fgd_eps");
  nlohmann::json report = {
      {"srgr", srgr_acc / pairs.size()},
      {"ba", ba_acc / pairs.size()},
      {"fgd", eval::fgd(gen_feats.features, ref_feats.features, fgd_eps)},
      {"div", cfg.get_string("eval.diversity_mode") == "trace"
                  ? eval::diversity_trace(gen_feats.features)
                  : eval::diversity(gen_feats.features)},
      {"ga", eval::emotion_accuracy(gen_feats.logits, labels)}};
  if (!out_path.empty()) {
    std::ofstream f(out_path);
    if (!f) throw ConfigError("evaluate: cannot open " + out_path);
    f << report.dump(2) << "\n";
  }
  std::printf("%s\n", report.dump().c_str());
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"emotional speech to 3d gesture toolkit"};
  app.require_subcommand(1);

  // synth-data
  auto* synth = app.add_subcommand("synth-data", "generate the labeled synthetic corpus");
  std::string synth_out;
  int synth_styles = 2, synth_contents = 3, synth_emotions = 8;
  double synth_seconds = 2.0;
  std::uint64_t synth_seed = 0;
  synth->add_option("--out", synth_out, "output dataset directory")->required();
  synth->add_option("--styles", synth_styles);
  synth->add_option("--contents", synth_contents);
  synth->add_option("--emotions", synth_emotions);
  synth->add_option("--seconds", synth_seconds, "clip duration");
  synth->add_option("--seed", synth_seed);

  // preprocess
  auto* prep = app.add_subcommand("preprocess", "window a dataset into filterbanks and poses");
  std::string prep_data, prep_out, prep_config;
  prep->add_option("--data", prep_data)->required();
  prep->add_option("--out", prep_out)->required();
  prep->add_option("--config", prep_config);

  // train-audio
  auto* ta = app.add_subcommand("train-audio", "train the speech disentanglement model");
  std::string ta_data, ta_out, ta_config, ta_log;
  std::optional<int> ta_steps;
  std::optional<double> ta_lr;
  std::optional<std::uint64_t> ta_seed;
  ta->add_option("--data", ta_data)->required();
  ta->add_option("--out", ta_out)->required();
  ta->add_option("--config", ta_config);
  ta->add_option("--steps", ta_steps);
  ta->add_option("--lr", ta_lr);
  ta->add_option("--seed", ta_seed);
  ta->add_option("--log", ta_log);

  // train-gesture
  auto* tg = app.add_subcommand("train-gesture", "jointly train the motion prior and denoiser");
  std::string tg_data, tg_audio, tg_out, tg_config, tg_log;
  std::optional<int> tg_steps;
  std::optional<double> tg_lr;
  std::optional<std::uint64_t> tg_seed;
  tg->add_option("--data", tg_data)->required();
  tg->add_option("--audio-ckpt", tg_audio)->required();
  tg->add_option("--out", tg_out)->required();
  tg->add_option("--config", tg_config);
  tg->add_option("--steps", tg_steps);
  tg->add_option("--lr", tg_lr);
  tg->add_option("--seed", tg_seed);
  tg->add_option("--log", tg_log);

  // generate
  auto* gen = app.add_subcommand("generate", "synthesize a gesture from one audio");
  std::string gen_audio, gen_actkpt, gen_gckpt, gen_out, gen_config;
  std::optional<int> gen_steps;
  std::optional<std::uint64_t> gen_seed;
  gen->add_option("--audio", gen_audio)->required();
  gen->add_option("--audio-ckpt", gen_actkpt)->required();
  gen->add_option("--gesture-ckpt", gen_gckpt)->required();
  gen->add_option("--out", gen_out)->required();
  gen->add_option("--steps", gen_steps);
  gen->add_option("--seed", gen_seed);
  gen->add_option("--config", gen_config);

  // edit
  auto* ed = app.add_subcommand("edit", "recombine latents from two audios before generating");
  std::string ed_a, ed_b, ed_mode = "emotion", ed_actkpt, ed_gckpt, ed_out, ed_config;
  std::optional<int> ed_steps;
  std::optional<std::uint64_t> ed_seed;
  ed->add_option("--audio-a", ed_a)->required();
  ed->add_option("--audio-b", ed_b)->required();
  ed->add_option("--mode", ed_mode, "emotion|style|content|none");
  ed->add_option("--audio-ckpt", ed_actkpt)->required();
  ed->add_option("--gesture-ckpt", ed_gckpt)->required();
  ed->add_option("--out", ed_out)->required();
  ed->add_option("--steps", ed_steps);
  ed->add_option("--seed", ed_seed);
  ed->add_option("--config", ed_config);

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "run the metric suite over generated motions");
  std::string ev_gen, ev_ref, ev_extractor, ev_semantics, ev_out, ev_config;
  bool ev_train_extractor = false;
  std::optional<std::uint64_t> ev_seed;
  ev->add_option("--gen", ev_gen)->required();
  ev->add_option("--ref", ev_ref)->required();
  ev->add_option("--extractor", ev_extractor);
  ev->add_flag("--train-extractor", ev_train_extractor);
  ev->add_option("--semantics", ev_semantics);
  ev->add_option("--out", ev_out);
  ev->add_option("--config", ev_config);
  ev->add_option("--seed", ev_seed);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints usage, returns 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (synth->parsed())
      return cmd_synth_data(synth_out, synth_styles, synth_contents, synth_emotions,
                            synth_seconds, synth_seed);
    if (prep->parsed()) return cmd_preprocess(prep_data, prep_out, prep_config);
    if (ta->parsed())
      return cmd_train_audio(ta_data, ta_out, ta_config, ta_steps, ta_lr, ta_seed, ta_log);
    if (tg->parsed())
      return cmd_train_gesture(tg_data, tg_audio, tg_out, tg_config, tg_steps, tg_lr, tg_seed,
                               tg_log);
    if (gen->parsed())
      return cmd_generate(gen_audio, gen_actkpt, gen_gckpt, gen_out, gen_steps, gen_seed,
                          gen_config);
    if (ed->parsed())
      return cmd_edit(ed_a, ed_b, ed_mode, ed_actkpt, ed_gckpt, ed_out, ed_steps, ed_seed,
                      ed_config);
    if (ev->parsed())
      return cmd_evaluate(ev_gen, ev_ref, ev_extractor, ev_train_extractor, ev_semantics,
                          ev_out, ev_config, ev_seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}

}  // namespace cli
}  // namespace emogest
