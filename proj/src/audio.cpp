// src/audio.cpp

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

#include "emogest/audio.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "emogest/errors.hpp"

namespace emogest {
namespace audio {

namespace {

constexpr double kPi = 3.14159265358979323846;

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Iterative radix-2 Cooley-Tukey; n must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * kPi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

struct LE {
  static std::uint32_t u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  }
  static std::uint16_t u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
  }
};

}  // namespace

Waveform read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("read_wav: cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw InvalidInput("read_wav: not a RIFF/WAVE file: " + path);

  int channels = 0, sample_rate = 0, bits = 0;
  std::size_t data_off = 0, data_len = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    const std::uint32_t len = LE::u32(bytes.data() + pos + 4);
    if (std::memcmp(id, "fmt ", 4) == 0 && pos + 8 + 16 <= bytes.size()) {
      const unsigned char* p = bytes.data() + pos + 8;
      const int fmt = LE::u16(p);
      channels = LE::u16(p + 2);
      sample_rate = static_cast<int>(LE::u32(p + 4));
      bits = LE::u16(p + 14);
      if (fmt != 1 || bits != 16)
        throw InvalidInput("read_wav: only PCM16 supported: " + path);
    } else if (std::memcmp(id, "data", 4) == 0) {
      data_off = pos + 8;
      data_len = len;
    }
    pos += 8 + len + (len & 1);
  }
  if (channels <= 0 || data_off == 0) throw InvalidInput("read_wav: missing chunks: " + path);
  if (data_off + data_len > bytes.size()) data_len = bytes.size() - data_off;

  const std::size_t n_samples = data_len / 2 / channels;
  Waveform w;
  w.sample_rate_hz = sample_rate;
  w.samples.resize(n_samples);
  const unsigned char* p = bytes.data() + data_off;
  for (std::size_t i = 0; i < n_samples; ++i) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      const std::int16_t s = static_cast<std::int16_t>(LE::u16(p + 2 * (i * channels + c)));
      acc += static_cast<double>(s);
    }
    w.samples[i] = acc / (channels * 32768.0);
  }
  return w;
}

void write_wav(const std::string& path, const Waveform& w) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("write_wav: cannot open " + path);
  const std::uint32_t data_len = static_cast<std::uint32_t>(w.samples.size() * 2);
  const std::uint32_t riff_len = 36 + data_len;
  auto put_u32 = [&](std::uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); };
  auto put_u16 = [&](std::uint16_t v) { f.write(reinterpret_cast<const char*>(&v), 2); };
  f.write("RIFF", 4);
  put_u32(riff_len);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  put_u32(16);
  put_u16(1);  // PCM
  put_u16(1);  // mono
  put_u32(static_cast<std::uint32_t>(w.sample_rate_hz));
  put_u32(static_cast<std::uint32_t>(w.sample_rate_hz * 2));
  put_u16(2);
  put_u16(16);
  f.write("data", 4);
  put_u32(data_len);
  for (double s : w.samples) {
    const double clamped = std::clamp(s, -1.0, 1.0);
    const std::int16_t v = static_cast<std::int16_t>(std::lrint(clamped * 32767.0));
    f.write(reinterpret_cast<const char*>(&v), 2);
  }
}

Waveform resample(const Waveform& w, int target_rate_hz) {
  if (w.sample_rate_hz == target_rate_hz) return w;
  if (w.samples.empty()) return {std::vector<double>{}, target_rate_hz};
  const double ratio = static_cast<double>(w.sample_rate_hz) / target_rate_hz;
  const std::size_t n_out =
      static_cast<std::size_t>(std::floor(static_cast<double>(w.samples.size()) / ratio));
  Waveform out;
  out.sample_rate_hz = target_rate_hz;
  out.samples.resize(n_out);
  for (std::size_t i = 0; i < n_out; ++i) {
    const double x = i * ratio;
    const std::size_t i0 = static_cast<std::size_t>(x);
    const double frac = x - static_cast<double>(i0);
    const double a = w.samples[std::min(i0, w.samples.size() - 1)];
    const double b = w.samples[std::min(i0 + 1, w.samples.size() - 1)];
    out.samples[i] = a + frac * (b - a);
  }
  return out;
}

Waveform load_audio(const std::string& path, int target_rate_hz) {
  return resample(read_wav(path), target_rate_hz);
}

Tensor stft_power(const Waveform& w, int win_samples, int hop_samples, int nfft) {
  if (w.samples.empty()) throw InvalidInput("stft_power: empty waveform");
  const int n = static_cast<int>(w.samples.size());
  const int n_frames = n >= win_samples ? 1 + (n - win_samples) / hop_samples : 0;
  const int n_bins = nfft / 2 + 1;
  Tensor out(std::max(n_frames, 0), n_bins, 0.0);
  std::vector<double> window(win_samples);
  for (int i = 0; i < win_samples; ++i)
    window[i] = 0.54 - 0.46 * std::cos(2.0 * kPi * i / (win_samples - 1));
  std::vector<std::complex<double>> buf(nfft);
  for (int t = 0; t < n_frames; ++t) {
    std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
    const int off = t * hop_samples;
    for (int i = 0; i < win_samples; ++i) buf[i] = w.samples[off + i] * window[i];
    fft_inplace(buf);
    for (int k = 0; k < n_bins; ++k) out.at(t, k) = std::norm(buf[k]);
  }
  return out;
}

Filterbank compute_filterbank(const Waveform& w, int target_frames,
                              const FilterbankOptions& opts) {
  if (w.samples.empty()) throw InvalidInput("compute_filterbank: empty waveform");
  if (w.sample_rate_hz < 8000)
    throw InvalidInput("compute_filterbank: sample rate must be >= 8000 Hz");
  if (target_frames <= 0) throw InvalidInput("compute_filterbank: target_frames must be > 0");

  const int win = static_cast<int>(std::lround(opts.frame_window_ms * w.sample_rate_hz / 1000.0));
  const int hop = static_cast<int>(std::lround(opts.frame_shift_ms * w.sample_rate_hz / 1000.0));
  const int nfft = next_pow2(win);
  const Tensor power = stft_power(w, win, hop, nfft);
  const int n_bins = nfft / 2 + 1;

  // Triangular mel bank from 0 Hz to Nyquist.
  const double mel_lo = hz_to_mel(0.0);
  const double mel_hi = hz_to_mel(w.sample_rate_hz / 2.0);
  std::vector<double> mel_pts(opts.n_mels + 2);
  for (int i = 0; i < opts.n_mels + 2; ++i)
    mel_pts[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (opts.n_mels + 1));
  Tensor bank(opts.n_mels, n_bins, 0.0);
  for (int m = 0; m < opts.n_mels; ++m) {
    const double f_l = mel_pts[m], f_c = mel_pts[m + 1], f_r = mel_pts[m + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * w.sample_rate_hz / nfft;
      double wgt = 0.0;
      if (f > f_l && f < f_r)
        wgt = f <= f_c ? (f - f_l) / (f_c - f_l) : (f_r - f) / (f_r - f_c);
      bank.at(m, k) = wgt;
    }
  }

  const double log_floor = std::log(opts.mel_floor);
  Filterbank fb;
  fb.n_mels = opts.n_mels;
  fb.frame_shift_ms = opts.frame_shift_ms;
  fb.frame_window_ms = opts.frame_window_ms;
  fb.values = Tensor::full(target_frames, opts.n_mels, log_floor);
  const int n_keep = std::min(power.rows(), target_frames);
  for (int t = 0; t < n_keep; ++t) {
    for (int m = 0; m < opts.n_mels; ++m) {
      double e = 0.0;
      for (int k = 0; k < n_bins; ++k) e += bank.at(m, k) * power.at(t, k);
      fb.values.at(t, m) = std::log(std::max(e, opts.mel_floor));
    }
  }
  return fb;
}

Filterbank standardize(const Filterbank& fb, double mean, double std) {
  if (std == 0.0) throw InvalidInput("standardize: std must be nonzero");
  Filterbank out = fb;
  for (std::int64_t i = 0; i < out.values.size(); ++i) {
    auto k = static_cast<std::size_t>(i);
    out.values[k] = (out.values[k] - mean) / std;
  }
  out.standardized = true;
  return out;
}

std::pair<double, double> corpus_stats(const std::vector<Filterbank>& fbs) {
  if (fbs.empty()) throw InvalidInput("corpus_stats: empty corpus");
  double n = 0.0, sum = 0.0;
  for (const auto& fb : fbs) {
    sum += fb.values.sum();
    n += static_cast<double>(fb.values.size());
  }
  const double mean = sum / n;
  double ss = 0.0;
  for (const auto& fb : fbs)
    for (std::int64_t i = 0; i < fb.values.size(); ++i) {
      const double d = fb.values[static_cast<std::size_t>(i)] - mean;
      ss += d * d;
    }
  return {mean, std::sqrt(ss / n)};
}

Filterbank augment(const Filterbank& fb, const AugmentConfig& cfg) {
  if (!fb.standardized) throw InvalidInput("augment: filterbank must be standardized first");
  const int frames = fb.n_frames(), mels = fb.n_mels;
  if (cfg.max_freq_mask > mels || cfg.max_time_mask > frames)
    throw InvalidInput("augment: mask maxima exceed filterbank dimensions");
  if (cfg.noise_std < 0.0) throw InvalidInput("augment: negative noise_std");

  Rng rng(cfg.rng_seed);
  Filterbank out = fb;

  // Draw order is fixed: freq mask, time mask, noise, shift.
  const int wf = rng.uniform_int(cfg.max_freq_mask + 1);
  const int f0 = wf < mels ? rng.uniform_int(mels - wf + 1) : 0;
  for (int t = 0; t < frames; ++t)
    for (int m = f0; m < f0 + wf; ++m) out.values.at(t, m) = 0.0;

  const int wt = rng.uniform_int(cfg.max_time_mask + 1);
  const int t0 = wt < frames ? rng.uniform_int(frames - wt + 1) : 0;
  for (int t = t0; t < t0 + wt; ++t)
    for (int m = 0; m < mels; ++m) out.values.at(t, m) = 0.0;

  if (cfg.noise_std > 0.0) {
    for (std::int64_t i = 0; i < out.values.size(); ++i)
      out.values[static_cast<std::size_t>(i)] += cfg.noise_std * rng.normal();
  }

  if (cfg.circular_shift_max_frames > 0) {
    const int shift = rng.uniform_int(cfg.circular_shift_max_frames + 1) % frames;
    if (shift > 0) {
      Tensor shifted(frames, mels);
      for (int t = 0; t < frames; ++t)
        for (int m = 0; m < mels; ++m) shifted.at((t + shift) % frames, m) = out.values.at(t, m);
      out.values = std::move(shifted);
    }
  }
  return out;
}

int patch_count_1d(int dim, int patch, int overlap) {
  const int stride = patch - overlap;
  if (stride <= 0) throw InvalidInput("patch_count_1d: overlap must be < patch");
  if (dim < patch) return 0;
  return (dim - patch) / stride + 1;
}

PatchSequence patchify(const Filterbank& fb, int patch, int overlap) {
  const int frames = fb.n_frames(), mels = fb.n_mels;
  const int nt = patch_count_1d(frames, patch, overlap);
  const int nm = patch_count_1d(mels, patch, overlap);
  if (nt == 0 || nm == 0)
    throw InvalidInput("patchify: filterbank smaller than one patch");
  const int stride = patch - overlap;

  PatchSequence ps;
  ps.patch = patch;
  ps.patch_overlap = overlap;
  ps.source_frames = frames;
  ps.source_mels = mels;
  ps.patches = Tensor(nt * nm, patch * patch);
  ps.positions.reserve(static_cast<std::size_t>(nt) * nm);
  int idx = 0;
  for (int it = 0; it < nt; ++it) {
    for (int im = 0; im < nm; ++im) {
      const int t0 = it * stride, m0 = im * stride;
      ps.positions.emplace_back(t0, m0);
      for (int r = 0; r < patch; ++r)
        for (int c = 0; c < patch; ++c)
          ps.patches.at(idx, r * patch + c) = fb.values.at(t0 + r, m0 + c);
      ++idx;
    }
  }
  return ps;
}

Tensor reconstruct_from_patches(const PatchSequence& ps) {
  Tensor acc(ps.source_frames, ps.source_mels, 0.0);
  Tensor cnt(ps.source_frames, ps.source_mels, 0.0);
  for (int i = 0; i < ps.n_patches(); ++i) {
    const auto [t0, m0] = ps.positions[i];
    for (int r = 0; r < ps.patch; ++r)
      for (int c = 0; c < ps.patch; ++c) {
        acc.at(t0 + r, m0 + c) += ps.patches.at(i, r * ps.patch + c);
        cnt.at(t0 + r, m0 + c) += 1.0;
      }
  }
  for (std::int64_t i = 0; i < acc.size(); ++i) {
    auto k = static_cast<std::size_t>(i);
    if (cnt[k] > 0.0) acc[k] /= cnt[k];
  }
  return acc;
}

void save_filterbank(const std::string& path_prefix, const Filterbank& fb) {
  nlohmann::json meta = {{"frames", fb.n_frames()},
                         {"mels", fb.n_mels},
                         {"frame_shift_ms", fb.frame_shift_ms},
                         {"frame_window_ms", fb.frame_window_ms},
                         {"standardized", fb.standardized}};
  std::ofstream mf(path_prefix + ".json");
  if (!mf) throw InvalidInput("save_filterbank: cannot open " + path_prefix + ".json");
  mf << meta.dump(2) << "\n";

  std::ofstream df(path_prefix + ".f32", std::ios::binary);
  if (!df) throw InvalidInput("save_filterbank: cannot open " + path_prefix + ".f32");
  for (std::int64_t i = 0; i < fb.values.size(); ++i) {
    const float v = static_cast<float>(fb.values[static_cast<std::size_t>(i)]);
    df.write(reinterpret_cast<const char*>(&v), sizeof(v));
  }
}

Filterbank load_filterbank(const std::string& path_prefix) {
  std::ifstream mf(path_prefix + ".json");
  if (!mf) throw InvalidInput("load_filterbank: cannot open " + path_prefix + ".json");
  nlohmann::json meta = nlohmann::json::parse(mf);
  Filterbank fb;
  const int frames = meta.at("frames").get<int>();
  fb.n_mels = meta.at("mels").get<int>();
  fb.frame_shift_ms = meta.at("frame_shift_ms").get<double>();
  fb.frame_window_ms = meta.at("frame_window_ms").get<double>();
  fb.standardized = meta.at("standardized").get<bool>();
  fb.values = Tensor(frames, fb.n_mels);
  std::ifstream df(path_prefix + ".f32", std::ios::binary);
  if (!df) throw InvalidInput("load_filterbank: cannot open " + path_prefix + ".f32");
  for (std::int64_t i = 0; i < fb.values.size(); ++i) {
    float v = 0.0f;
    df.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!df) throw InvalidInput("load_filterbank: truncated data in " + path_prefix + ".f32");
    fb.values[static_cast<std::size_t>(i)] = static_cast<double>(v);
  }
  return fb;
}

}  // namespace audio
}  // namespace emogest
