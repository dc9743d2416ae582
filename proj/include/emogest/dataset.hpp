// emogest/dataset.hpp

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

#include <map>
#include <string>
#include <vector>

#include "emogest/audio.hpp"
#include "emogest/body.hpp"
#include "emogest/speech.hpp"

namespace emogest {
namespace data {

// Flat dotted-key configuration; every training/inference constant has a
// default here so a config file only needs overrides. AMUSE_SEED in the
// environment beats the configured seed.
class Config {
 public:
  static Config defaults();
  static Config load(const std::string& path);  // defaults overlaid with the file
  void save(const std::string& path) const;

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  std::uint64_t seed() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

struct ClipRecord {
  std::string clip_id;
  std::string audio_path;
  std::string motion_path;
  int emotion_id = 0;
  int style_id = 0;
  int content_id = 0;
};

// labels.csv schema: clip_id, emotion_id, style_id, content_id. Audio and
// motion live under clips/<id>.wav and clips/<id>.motion/.
std::vector<ClipRecord> load_dataset(const std::string& dir);
void save_labels_csv(const std::string& path, const std::vector<ClipRecord>& records);

struct WindowedSample {
  std::string clip_id;
  int window_index = 0;
  audio::Filterbank filterbank;  // unstandardized log-mels, target_frames rows
  body::PoseSequence pose;       // window_frames x 6J
  int emotion_id = 0;
  int style_id = 0;
  int content_id = 0;
};

struct WindowingOptions {
  double window_s = 10.0;
  double fps = 30.0;
  int target_frames = 1024;
  audio::FilterbankOptions fb;
  int sample_rate = 16000;
};

// Whole windows from timestamp 0; the unaligned remainder is discarded and
// clips shorter than one window are skipped with a warning.
std::vector<WindowedSample> window_dataset(const std::vector<ClipRecord>& records,
                                           const WindowingOptions& opts);

// Every (emotion, content pair, style pair, window) combination present in
// the samples yields one canonical quadruple. Throws ConfigError naming the
// missing factor when none can be formed.
std::vector<speech::AudioQuadruple> build_quadruples(const std::vector<WindowedSample>& samples,
                                                     double fb_mean, double fb_std, int patch,
                                                     int overlap);

// Labeled per-factor signal design: emotions carry a sinusoidal elbow
// oscillation (frequency base + step * e) plus a constant marker rotation;
// styles add a phase/scale offset and a high tone; contents fix the click
// pattern that both the audio and the wrist pulses follow.
struct SyntheticCorpusSpec {
  int n_styles = 2;
  int n_contents = 3;
  int n_emotions = 8;
  double clip_seconds = 2.0;
  int sample_rate = 16000;
  double fps = 30.0;
  std::uint64_t seed = 0;

  double emotion_motion_freq(int e) const { return 0.5 * (1 + e) / (clip_seconds / 2.0); }
  double emotion_tone_hz(int e) const { return 500.0 + 250.0 * e; }
  double style_tone_hz(int s) const { return 3000.0 + 400.0 * s; }
  double content_beat_period(int c) const { return 0.4 + 0.1 * c; }
  double content_beat_offset(int c) const { return 0.15 + 0.05 * c; }
  std::vector<double> content_beat_times(int c) const;
};

// Writes labels.csv and clips/<id>.{wav,motion}; byte-identical across runs
// for a fixed spec.
std::vector<ClipRecord> generate_synthetic_corpus(const SyntheticCorpusSpec& spec,
                                                  const std::string& out_dir);

// Semantic score CSV: clip_id, frame, weight.
std::map<std::string, std::vector<double>> load_semantic_scores(const std::string& csv_path);
void save_semantic_scores(const std::string& csv_path,
                          const std::map<std::string, std::vector<double>>& scores);

}  // namespace data
}  // namespace emogest
