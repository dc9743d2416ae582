// emogest/audio.hpp

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
#include <utility>
#include <vector>

#include "emogest/tensor.hpp"

namespace emogest {
namespace audio {

struct Waveform {
  std::vector<double> samples;  // mono, [-1, 1]
  int sample_rate_hz = 16000;

  double duration_s() const {
    return samples.empty() ? 0.0 : static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

// PCM16 WAV. Multichannel input is downmixed to mono on read.
Waveform read_wav(const std::string& path);
void write_wav(const std::string& path, const Waveform& w);
// Linear-interpolation resampler.
Waveform resample(const Waveform& w, int target_rate_hz);
// read + downmix + resample to the canonical 16 kHz mono.
Waveform load_audio(const std::string& path, int target_rate_hz = 16000);

struct FilterbankOptions {
  int n_mels = 128;
  double frame_shift_ms = 10.0;
  double frame_window_ms = 25.0;
  double mel_floor = 1e-10;  // clamp before log so silence stays finite
};

struct Filterbank {
  Tensor values;  // n_frames x n_mels, log-mel energies
  int n_mels = 128;
  double frame_shift_ms = 10.0;
  double frame_window_ms = 25.0;
  bool standardized = false;

  int n_frames() const { return values.rows(); }
};

// Hamming-windowed STFT power spectrum, one row per frame.
Tensor stft_power(const Waveform& w, int win_samples, int hop_samples, int nfft);

// Log-mel filterbank padded/truncated at the end to exactly target_frames
// rows. Padding rows carry the log of the mel floor (digital silence).
Filterbank compute_filterbank(const Waveform& w, int target_frames,
                              const FilterbankOptions& opts = {});

Filterbank standardize(const Filterbank& fb, double mean, double std);

// Two-pass mean/std over a corpus of filterbanks.
std::pair<double, double> corpus_stats(const std::vector<Filterbank>& fbs);

struct AugmentConfig {
  int max_freq_mask = 24;
  int max_time_mask = 96;
  double noise_std = 0.0;
  int circular_shift_max_frames = 0;
  std::uint64_t rng_seed = 0;
};

// One frequency mask and one time mask with widths uniform in [0, max],
// Gaussian noise, then a circular shift along time. Deterministic in
// rng_seed; the all-zero config is the identity.
Filterbank augment(const Filterbank& fb, const AugmentConfig& cfg);

struct PatchSequence {
  Tensor patches;                            // n_patches x (patch*patch), row-major tiles
  std::vector<std::pair<int, int>> positions;  // (time_index, mel_index) top-left corners
  int patch = 16;
  int patch_overlap = 6;
  int source_frames = 0;
  int source_mels = 0;

  int n_patches() const { return patches.rows(); }
  Tensor tile(int i) const { return patches.row(i).reshaped(patch, patch); }
};

// Patches per axis for a stride of (patch - overlap): floor((dim-patch)/stride)+1.
int patch_count_1d(int dim, int patch, int overlap);

PatchSequence patchify(const Filterbank& fb, int patch = 16, int overlap = 6);

// Overlap-averaging inverse; rows/cols beyond patch coverage are zero.
Tensor reconstruct_from_patches(const PatchSequence& ps);

// Filterbank disk format: raw little-endian float32 + JSON sidecar header.
void save_filterbank(const std::string& path_prefix, const Filterbank& fb);
Filterbank load_filterbank(const std::string& path_prefix);

}  // namespace audio
}  // namespace emogest
