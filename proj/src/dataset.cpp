// src/dataset.cpp

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

#include "emogest/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "emogest/errors.hpp"

namespace emogest {
namespace data {

namespace {
constexpr double kPi = 3.14159265358979323846;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    // trim
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  return out;
}
}  // namespace

Config Config::defaults() {
  Config c;
  auto& v = c.values_;
  v["audio.sample_rate"] = "16000";
  v["audio.n_mels"] = "128";
  v["audio.frame_shift_ms"] = "10";
  v["audio.frame_window_ms"] = "25";
  v["audio.target_frames"] = "1024";
  v["audio.patch"] = "16";
  v["audio.patch_overlap"] = "6";
  v["augment.max_freq_mask"] = "24";
  v["augment.max_time_mask"] = "96";
  v["augment.noise_std"] = "0.01";
  v["augment.shift_max_frames"] = "96";
  v["augment.enabled"] = "0";
  v["model.audio.d_model"] = "768";
  v["model.audio.layers"] = "12";
  v["model.audio.heads"] = "12";
  v["model.audio.d_ff"] = "0";
  v["model.audio.latent_dim"] = "256";
  v["model.audio.fusion_dim"] = "768";
  v["model.audio.fusion_layers"] = "2";
  v["model.audio.fusion_heads"] = "4";
  v["model.audio.decoder_layers"] = "4";
  v["model.audio.decoder_heads"] = "4";
  v["model.audio.n_emotions"] = "8";
  v["model.audio.n_styles"] = "30";
  v["model.prior.d_model"] = "1024";
  v["model.prior.layers"] = "9";
  v["model.prior.heads"] = "4";
  v["model.prior.d_ff"] = "0";
  v["model.prior.latent_dim"] = "256";
  v["model.prior.memory_tokens"] = "4";
  v["model.denoiser.d_model"] = "1024";
  v["model.denoiser.layers"] = "9";
  v["model.denoiser.heads"] = "4";
  v["model.denoiser.d_ff"] = "0";
  v["model.extractor.d_model"] = "256";
  v["model.extractor.layers"] = "4";
  v["model.extractor.heads"] = "4";
  v["model.extractor.d_ff"] = "0";
  v["diffusion.steps_train"] = "1000";
  v["diffusion.steps_infer"] = "50";
  v["diffusion.beta_min"] = "0.00085";
  v["diffusion.beta_max"] = "0.012";
  v["train.lr"] = "0.0001";
  v["train.batch"] = "64";
  v["train.seed"] = "0";
  v["train.weight_decay"] = "0";
  v["train.kl_weight"] = "0.0001";
  v["train.steps"] = "500";
  v["data.window_s"] = "10";
  v["data.fps"] = "30";
  v["data.joints"] = "47";
  v["eval.ba_sigma"] = "0.1";
  v["eval.srgr_delta"] = "0.05";
  v["eval.fgd_eps"] = "1e-8";
  v["eval.beat_min_gap_s"] = "0.1";
  v["eval.diversity_mode"] = "pairwise";
  return c;
}

Config Config::load(const std::string& path) {
  Config c = defaults();
  std::ifstream f(path);
  if (!f) throw ConfigError("Config::load: cannot open " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw ConfigError("Config::load: bad line " + std::to_string(lineno) + " in " + path);
      continue;
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("Config::load: empty key at line " + std::to_string(lineno));
    c.values_[key] = value;
  }
  return c;
}

void Config::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw ConfigError("Config::save: cannot open " + path);
  for (const auto& [k, v] : values_) f << k << " = " << v << "\n";
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::string Config::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("Config: unknown key " + key);
  return it->second;
}

double Config::get_double(const std::string& key) const {
  const std::string s = get_string(key);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("Config: key " + key + " is not a number: " + s);
  }
}

int Config::get_int(const std::string& key) const {
  const double v = get_double(key);
  const int i = static_cast<int>(std::llround(v));
  if (std::fabs(v - i) > 1e-9) throw ConfigError("Config: key " + key + " is not an integer");
  return i;
}

void Config::set(const std::string& key, const std::string& value) { values_[key] = value; }

std::uint64_t Config::seed() const {
  if (const char* env = std::getenv("AMUSE_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ConfigError("AMUSE_SEED is not an unsigned integer");
    }
  }
  return static_cast<std::uint64_t>(std::stoull(get_string("train.seed")));
}

std::vector<ClipRecord> load_dataset(const std::string& dir) {
  const std::string csv = dir + "/labels.csv";
  std::ifstream f(csv);
  if (!f) throw ConfigError("load_dataset: cannot open " + csv);
  std::vector<ClipRecord> out;
  std::string line;
  bool first = true;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (first && fields.size() >= 1 && fields[0] == "clip_id") {
      first = false;
      continue;  // header
    }
    first = false;
    if (fields.size() != 4)
      throw ConfigError("load_dataset: expected 4 columns in " + csv + ": " + line);
    ClipRecord r;
    r.clip_id = fields[0];
    r.emotion_id = std::stoi(fields[1]);
    r.style_id = std::stoi(fields[2]);
    r.content_id = std::stoi(fields[3]);
    r.audio_path = dir + "/clips/" + r.clip_id + ".wav";
    r.motion_path = dir + "/clips/" + r.clip_id + ".motion";
    out.push_back(std::move(r));
  }
  return out;
}

void save_labels_csv(const std::string& path, const std::vector<ClipRecord>& records) {
  std::ofstream f(path);
  if (!f) throw ConfigError("save_labels_csv: cannot open " + path);
  f << "clip_id,emotion_id,style_id,content_id\n";
  for (const auto& r : records)
    f << r.clip_id << "," << r.emotion_id << "," << r.style_id << "," << r.content_id << "\n";
}

std::vector<WindowedSample> window_dataset(const std::vector<ClipRecord>& records,
                                           const WindowingOptions& opts) {
  std::vector<WindowedSample> out;
  const int window_frames = static_cast<int>(std::lround(opts.window_s * opts.fps));
  for (const auto& r : records) {
    const audio::Waveform w = audio::load_audio(r.audio_path, opts.sample_rate);
    const body::PoseSequence m = body::load_motion(r.motion_path);
    const double duration = std::min(w.duration_s(), m.n_frames() / m.fps);
    const int n_windows = static_cast<int>(std::floor(duration / opts.window_s + 1e-9));
    if (n_windows == 0) {
      std::fprintf(stderr, "window_dataset: clip %s is shorter than one window, skipped\n",
                   r.clip_id.c_str());
      continue;
    }
    const int samples_per_window =
        static_cast<int>(std::lround(opts.window_s * opts.sample_rate));
    for (int k = 0; k < n_windows; ++k) {
      WindowedSample s;
      s.clip_id = r.clip_id;
      s.window_index = k;
      s.emotion_id = r.emotion_id;
      s.style_id = r.style_id;
      s.content_id = r.content_id;

      audio::Waveform chunk;
      chunk.sample_rate_hz = w.sample_rate_hz;
      const std::size_t s0 = static_cast<std::size_t>(k) * samples_per_window;
      const std::size_t s1 = std::min(w.samples.size(), s0 + samples_per_window);
      chunk.samples.assign(w.samples.begin() + s0, w.samples.begin() + s1);
      s.filterbank = audio::compute_filterbank(chunk, opts.target_frames, opts.fb);

      const int f0 = k * window_frames;
      s.pose.fps = m.fps;
      s.pose.frames = Tensor(window_frames, m.frames.cols());
      for (int t = 0; t < window_frames; ++t)
        for (int c = 0; c < m.frames.cols(); ++c)
          s.pose.frames.at(t, c) = m.frames.at(f0 + t, c);
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::vector<speech::AudioQuadruple> build_quadruples(const std::vector<WindowedSample>& samples,
                                                     double fb_mean, double fb_std, int patch,
                                                     int overlap) {
  // index by (emotion, content, style, window)
  std::map<std::tuple<int, int, int, int>, const WindowedSample*> index;
  std::set<int> emotions, contents, styles;
  int max_window = 0;
  for (const auto& s : samples) {
    index[{s.emotion_id, s.content_id, s.style_id, s.window_index}] = &s;
    emotions.insert(s.emotion_id);
    contents.insert(s.content_id);
    styles.insert(s.style_id);
    max_window = std::max(max_window, s.window_index);
  }
  if (contents.size() < 2)
    throw ConfigError("build_quadruples: need two distinct contents, corpus has " +
                      std::to_string(contents.size()));
  if (styles.size() < 2)
    throw ConfigError("build_quadruples: need two distinct styles, corpus has " +
                      std::to_string(styles.size()));

  auto prep = [&](const WindowedSample& s) {
    const audio::Filterbank std_fb = audio::standardize(s.filterbank, fb_mean, fb_std);
    return std::make_pair(audio::patchify(std_fb, patch, overlap), std_fb.values);
  };

  std::vector<speech::AudioQuadruple> out;
  const std::vector<int> emo_list(emotions.begin(), emotions.end());
  const std::vector<int> con_list(contents.begin(), contents.end());
  const std::vector<int> sty_list(styles.begin(), styles.end());
  for (int e : emo_list) {
    for (std::size_t ci = 0; ci < con_list.size(); ++ci) {
      for (std::size_t cj = ci + 1; cj < con_list.size(); ++cj) {
        for (std::size_t si = 0; si < sty_list.size(); ++si) {
          for (std::size_t sj = si + 1; sj < sty_list.size(); ++sj) {
            for (int w = 0; w <= max_window; ++w) {
              const int c1 = con_list[ci], c2 = con_list[cj];
              const int s1 = sty_list[si], s2 = sty_list[sj];
              const std::array<std::tuple<int, int, int, int>, 4> keys = {
                  std::make_tuple(e, c1, s1, w), std::make_tuple(e, c2, s1, w),
                  std::make_tuple(e, c1, s2, w), std::make_tuple(e, c2, s2, w)};
              bool complete = true;
              for (const auto& k : keys)
                if (!index.count(k)) complete = false;
              if (!complete) continue;
              speech::AudioQuadruple q;
              q.emotion_id = e;
              q.content_ids = {c1, c2, c1, c2};
              q.style_ids = {s1, s1, s2, s2};
              for (int k = 0; k < 4; ++k) {
                auto [ps, fb] = prep(*index.at(keys[k]));
                q.audios[k] = std::move(ps);
                q.filterbanks[k] = std::move(fb);
              }
              q.validate();
              out.push_back(std::move(q));
            }
          }
        }
      }
    }
  }
  if (out.empty())
    throw ConfigError(
        "build_quadruples: no aligned (emotion, content pair, style pair, window) "
        "combination exists");
  return out;
}

std::vector<double> SyntheticCorpusSpec::content_beat_times(int c) const {
  std::vector<double> times;
  for (double t = content_beat_offset(c); t < clip_seconds - 0.05;
       t += content_beat_period(c))
    times.push_back(t);
  return times;
}

std::vector<ClipRecord> generate_synthetic_corpus(const SyntheticCorpusSpec& spec,
                                                  const std::string& out_dir) {
  if (spec.n_styles < 1 || spec.n_contents < 1 || spec.n_emotions < 1 ||
      spec.clip_seconds <= 0.0)
    throw ConfigError("generate_synthetic_corpus: bad spec");
  std::filesystem::create_directories(out_dir + "/clips");
  const body::BodyModel stub = body::make_stub_body();

  // Marker joints: one constant rotation per emotion class.
  const char* marker_names[8] = {"left_thumb1",  "left_index1",  "left_middle1",
                                 "left_ring1",   "left_pinky1",  "right_thumb1",
                                 "right_index1", "right_middle1"};
  const int n_samples = static_cast<int>(spec.clip_seconds * spec.sample_rate);
  const int n_frames = static_cast<int>(std::lround(spec.clip_seconds * spec.fps));

  std::vector<ClipRecord> records;
  for (int c = 0; c < spec.n_contents; ++c) {
    for (int e = 0; e < spec.n_emotions; ++e) {
      for (int s = 0; s < spec.n_styles; ++s) {
        ClipRecord r;
        r.clip_id = "c" + std::to_string(c) + "_e" + std::to_string(e) + "_s" +
                    std::to_string(s);
        r.content_id = c;
        r.emotion_id = e;
        r.style_id = s;
        r.audio_path = out_dir + "/clips/" + r.clip_id + ".wav";
        r.motion_path = out_dir + "/clips/" + r.clip_id + ".motion";

        // --- audio: emotion tone + style tone + content clicks ---
        audio::Waveform w;
        w.sample_rate_hz = spec.sample_rate;
        w.samples.assign(n_samples, 0.0);
        const double fe = spec.emotion_tone_hz(e);
        const double fs = spec.style_tone_hz(s);
        for (int i = 0; i < n_samples; ++i) {
          const double t = static_cast<double>(i) / spec.sample_rate;
          w.samples[i] = 0.22 * std::sin(2.0 * kPi * fe * t) +
                         0.22 * std::sin(2.0 * kPi * fs * t);
        }
        for (double tb : spec.content_beat_times(c)) {
          const int s0 = static_cast<int>(tb * spec.sample_rate);
          const int len = spec.sample_rate / 125;  // 8 ms burst
          for (int i = 0; i < len && s0 + i < n_samples; ++i)
            w.samples[s0 + i] += 0.5 * std::sin(2.0 * kPi * 2000.0 * i / spec.sample_rate);
        }
        audio::write_wav(r.audio_path, w);

        // --- motion: emotion oscillation + marker + style phase/scale +
        //     wrist pulses on the content beats ---
        body::PoseSequence m = body::identity_pose(n_frames, body::kNumJoints, spec.fps);
        const double freq = spec.emotion_motion_freq(e);
        const double amp = (0.35 + 0.03 * e) * (1.0 + 0.15 * s);
        const double phase = 0.9 * s;
        const int l_elbow = stub.joint_index("left_elbow");
        const int r_elbow = stub.joint_index("right_elbow");
        const int l_wrist = stub.joint_index("left_wrist");
        const int l_collar = stub.joint_index("left_collar");
        const int r_collar = stub.joint_index("right_collar");
        const int marker = stub.joint_index(marker_names[e % 8]);
        const auto beat_times = spec.content_beat_times(c);
        for (int t = 0; t < n_frames; ++t) {
          const double ts = static_cast<double>(t) / spec.fps;
          const double theta = amp * std::sin(2.0 * kPi * freq * ts + phase);
          const double ce = std::cos(theta), se = std::sin(theta);
          const double r6[6] = {ce, se, 0, -se, ce, 0};
          for (int k = 0; k < 6; ++k) {
            m.frames.at(t, 6 * l_elbow + k) = r6[k];
            m.frames.at(t, 6 * r_elbow + k) = r6[k];
          }
          // constant wide-margin emotion signature: collar posture + marker
          const double sig = 0.5 + 0.15 * e;
          const double cg = std::cos(sig), sg = std::sin(sig);
          const double c6[6] = {cg, sg, 0, -sg, cg, 0};
          for (int k = 0; k < 6; ++k) {
            m.frames.at(t, 6 * l_collar + k) = c6[k];
            m.frames.at(t, 6 * r_collar + k) = c6[k];
          }
          const double mtheta = 1.2;
          const double cm = std::cos(mtheta), sm = std::sin(mtheta);
          const double m6[6] = {cm, sm, 0, -sm, cm, 0};
          for (int k = 0; k < 6; ++k) m.frames.at(t, 6 * marker + k) = m6[k];

          double pulse = 0.0;
          for (double tb : beat_times) {
            const double d = (ts - tb) / 0.06;
            pulse += 0.5 * std::exp(-0.5 * d * d);
          }
          const double cw = std::cos(pulse), sw = std::sin(pulse);
          const double w6[6] = {cw, 0, -sw, 0, 1, 0};
          for (int k = 0; k < 6; ++k) m.frames.at(t, 6 * l_wrist + k) = w6[k];
        }
        body::save_motion(r.motion_path, m);
        records.push_back(std::move(r));
      }
    }
  }
  save_labels_csv(out_dir + "/labels.csv", records);
  return records;
}

std::map<std::string, std::vector<double>> load_semantic_scores(const std::string& csv_path) {
  std::ifstream f(csv_path);
  if (!f) throw ConfigError("load_semantic_scores: cannot open " + csv_path);
  std::map<std::string, std::vector<double>> out;
  std::string line;
  bool first = true;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (first && fields[0] == "clip_id") {
      first = false;
      continue;
    }
    first = false;
    if (fields.size() != 3)
      throw ConfigError("load_semantic_scores: expected clip_id,frame,weight: " + line);
    const std::string clip = fields[0];
    const int frame = std::stoi(fields[1]);
    const double weight = std::stod(fields[2]);
    auto& vec = out[clip];
    if (static_cast<int>(vec.size()) <= frame) vec.resize(frame + 1, 0.0);
    vec[frame] = weight;
  }
  return out;
}

void save_semantic_scores(const std::string& csv_path,
                          const std::map<std::string, std::vector<double>>& scores) {
  std::ofstream f(csv_path);
  if (!f) throw ConfigError("save_semantic_scores: cannot open " + csv_path);
  f << "clip_id,frame,weight\n";
  for (const auto& [clip, weights] : scores)
    for (std::size_t t = 0; t < weights.size(); ++t)
      f << clip << "," << t << "," << weights[t] << "\n";
}

}  // namespace data
}  // namespace emogest
