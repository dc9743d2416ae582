// src/metrics.cpp

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

#include "emogest/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "emogest/errors.hpp"

namespace emogest {
namespace eval {

const char* const kBeatJointNames[6] = {"left_wrist",  "left_elbow",  "left_shoulder",
                                        "right_wrist", "right_elbow", "right_shoulder"};

void jacobi_eigen_symmetric(const Tensor& a, Tensor& eigvals, Tensor& eigvecs) {
  if (a.rows() != a.cols()) throw InvalidInput("jacobi: matrix must be square");
  const int n = a.rows();
  Tensor m = a;
  eigvecs = Tensor::identity(n);
  const int max_sweeps = 100;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += m.at(p, q) * m.at(p, q);
    if (off < 1e-24) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = m.at(p, q);
        if (std::fabs(apq) < 1e-300) continue;
        const double theta = (m.at(q, q) - m.at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double mkp = m.at(k, p), mkq = m.at(k, q);
          m.at(k, p) = c * mkp - s * mkq;
          m.at(k, q) = s * mkp + c * mkq;
        }
        for (int k = 0; k < n; ++k) {
          const double mpk = m.at(p, k), mqk = m.at(q, k);
          m.at(p, k) = c * mpk - s * mqk;
          m.at(q, k) = s * mpk + c * mqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = eigvecs.at(k, p), vkq = eigvecs.at(k, q);
          eigvecs.at(k, p) = c * vkp - s * vkq;
          eigvecs.at(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  eigvals = Tensor(1, n);
  for (int i = 0; i < n; ++i) eigvals.at(0, i) = m.at(i, i);
}

namespace {

Tensor mean_rows(const Tensor& f) {
  Tensor mu(1, f.cols(), 0.0);
  for (int r = 0; r < f.rows(); ++r)
    for (int c = 0; c < f.cols(); ++c) mu.at(0, c) += f.at(r, c) / f.rows();
  return mu;
}

Tensor covariance(const Tensor& f, const Tensor& mu, double eps) {
  const int n = f.rows(), d = f.cols();
  Tensor cov(d, d, 0.0);
  for (int r = 0; r < n; ++r)
    for (int i = 0; i < d; ++i) {
      const double di = f.at(r, i) - mu.at(0, i);
      for (int j = 0; j < d; ++j)
        cov.at(i, j) += di * (f.at(r, j) - mu.at(0, j)) / (n - 1);
    }
  for (int i = 0; i < d; ++i) cov.at(i, i) += eps;
  return cov;
}

Tensor sqrtm_psd(const Tensor& a, const char* what) {
  Tensor vals, vecs;
  jacobi_eigen_symmetric(a, vals, vecs);
  double scale = 0.0;
  for (int i = 0; i < vals.cols(); ++i) scale = std::max(scale, std::fabs(vals.at(0, i)));
  Tensor sq(a.rows(), a.cols(), 0.0);
  for (int k = 0; k < vals.cols(); ++k) {
    double lam = vals.at(0, k);
    if (lam < -1e-6 * std::max(scale, 1.0))
      throw NumericalError(std::string("fgd: ") + what +
                           " has a significantly negative eigenvalue; covariance is not PSD "
                           "beyond the eps repair");
    lam = std::max(lam, 0.0);
    const double s = std::sqrt(lam);
    for (int i = 0; i < a.rows(); ++i)
      for (int j = 0; j < a.cols(); ++j) sq.at(i, j) += s * vecs.at(i, k) * vecs.at(j, k);
  }
  return sq;
}

}  // namespace

double fgd(const Tensor& feats_a, const Tensor& feats_b, double eps) {
  if (feats_a.cols() != feats_b.cols()) throw InvalidInput("fgd: feature dims differ");
  if (feats_a.rows() < 2 || feats_b.rows() < 2)
    throw InvalidInput("fgd: need at least 2 samples per side");
  const Tensor mu_a = mean_rows(feats_a), mu_b = mean_rows(feats_b);
  const Tensor cov_a = covariance(feats_a, mu_a, eps);
  const Tensor cov_b = covariance(feats_b, mu_b, eps);

  double mean_term = 0.0;
  for (int c = 0; c < mu_a.cols(); ++c) {
    const double d = mu_a.at(0, c) - mu_b.at(0, c);
    mean_term += d * d;
  }
  double trace_ab = 0.0;
  for (int i = 0; i < cov_a.rows(); ++i) trace_ab += cov_a.at(i, i) + cov_b.at(i, i);

  // Tr (Sa Sb)^{1/2} via the symmetric form sqrt(Sa) Sb sqrt(Sa)
  const Tensor root_a = sqrtm_psd(cov_a, "cov_a");
  Tensor inner = matmul(matmul(root_a, cov_b), root_a);
  for (int i = 0; i < inner.rows(); ++i)
    for (int j = i + 1; j < inner.cols(); ++j) {
      const double sym = 0.5 * (inner.at(i, j) + inner.at(j, i));
      inner.at(i, j) = sym;
      inner.at(j, i) = sym;
    }
  Tensor vals, vecs;
  jacobi_eigen_symmetric(inner, vals, vecs);
  double tr_sqrt = 0.0;
  for (int i = 0; i < vals.cols(); ++i) tr_sqrt += std::sqrt(std::max(vals.at(0, i), 0.0));

  return mean_term + trace_ab - 2.0 * tr_sqrt;
}

double diversity(const Tensor& feats) {
  const int n = feats.rows();
  if (n < 2) throw InvalidInput("diversity: need at least 2 samples");
  double acc = 0.0;
  int pairs = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double d2 = 0.0;
      for (int c = 0; c < feats.cols(); ++c) {
        const double d = feats.at(i, c) - feats.at(j, c);
        d2 += d * d;
      }
      acc += std::sqrt(d2);
      ++pairs;
    }
  return acc / pairs;
}

double diversity_trace(const Tensor& feats) {
  const int n = feats.rows();
  if (n < 2) throw InvalidInput("diversity_trace: need at least 2 samples");
  const Tensor mu = mean_rows(feats);
  double acc = 0.0;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < feats.cols(); ++c) {
      const double d = feats.at(r, c) - mu.at(0, c);
      acc += d * d / (n - 1);
    }
  return acc;
}

double emotion_accuracy(const Tensor& logits, const std::vector<int>& labels) {
  if (logits.rows() == 0) throw InvalidInput("emotion_accuracy: empty input");
  if (logits.rows() != static_cast<int>(labels.size()))
    throw InvalidInput("emotion_accuracy: label count mismatch");
  int hits = 0;
  for (int r = 0; r < logits.rows(); ++r) {
    int best = 0;
    for (int c = 1; c < logits.cols(); ++c)
      if (logits.at(r, c) > logits.at(r, best)) best = c;
    hits += best == labels[r] ? 1 : 0;
  }
  return 100.0 * hits / logits.rows();
}

std::vector<double> detect_kinematic_beats(const body::PoseSequence& m,
                                           const body::BodyModel& bodymodel,
                                           double min_gap_s) {
  std::vector<int> joints;
  for (const char* name : kBeatJointNames) {
    const int idx = bodymodel.joint_index(name);
    if (idx < 0)
      throw ConfigError(std::string("detect_kinematic_beats: body lacks joint ") + name);
    joints.push_back(idx);
  }
  return detect_kinematic_beats(m, bodymodel, joints, min_gap_s);
}

std::vector<double> detect_kinematic_beats(const body::PoseSequence& m,
                                           const body::BodyModel& bodymodel,
                                           const std::vector<int>& joints, double min_gap_s) {
  const int T = m.n_frames();
  if (T < 3) throw InvalidInput("detect_kinematic_beats: need at least 3 frames");
  const Tensor pos = body::joint_positions(m, bodymodel);

  // summed joint speed per frame transition
  std::vector<double> speed(T - 1, 0.0);
  for (int t = 1; t < T; ++t) {
    double s = 0.0;
    for (int j : joints) {
      double d2 = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double d = pos.at(t, 3 * j + c) - pos.at(t - 1, 3 * j + c);
        d2 += d * d;
      }
      s += std::sqrt(d2);
    }
    speed[t - 1] = s * m.fps;
  }

  std::vector<double> beats;
  double last_kept_speed = 0.0;
  for (std::size_t i = 1; i + 1 < speed.size(); ++i) {
    if (speed[i] < speed[i - 1] && speed[i] <= speed[i + 1]) {
      const double t = static_cast<double>(i + 1) / m.fps;
      if (!beats.empty() && t - beats.back() < min_gap_s) {
        if (speed[i] < last_kept_speed) {
          beats.back() = t;
          last_kept_speed = speed[i];
        }
      } else {
        beats.push_back(t);
        last_kept_speed = speed[i];
      }
    }
  }
  return beats;
}

double beat_align(const std::vector<double>& kin_beats, const std::vector<double>& audio_beats,
                  double sigma) {
  if (kin_beats.empty() || audio_beats.empty()) {
    std::fprintf(stderr, "beat_align: empty beat list, score defined as 0\n");
    return 0.0;
  }
  double acc = 0.0;
  for (double k : kin_beats) {
    double best = 1e300;
    for (double a : audio_beats) best = std::min(best, std::fabs(k - a));
    acc += std::exp(-best * best / (2.0 * sigma * sigma));
  }
  return acc / static_cast<double>(kin_beats.size());
}

double srgr(const body::PoseSequence& gen, const body::PoseSequence& gt,
            const std::vector<double>& frame_weights, const body::BodyModel& bodymodel,
            double delta) {
  if (gen.n_frames() != gt.n_frames())
    throw InvalidInput("srgr: sequences must have equal length");
  const int T = gen.n_frames();
  if (static_cast<int>(frame_weights.size()) != T)
    throw InvalidInput("srgr: one semantic weight per frame required");
  double wsum = 0.0;
  for (double w : frame_weights) {
    if (w < 0.0 || w > 1.0) throw InvalidInput("srgr: weights must lie in [0,1]");
    wsum += w;
  }
  if (wsum <= 0.0) throw InvalidInput("srgr: weights sum to zero");

  const Tensor p_gen = body::joint_positions(gen, bodymodel);
  const Tensor p_gt = body::joint_positions(gt, bodymodel);
  const int J = bodymodel.n_joints();
  double acc = 0.0;
  for (int t = 0; t < T; ++t) {
    int recalled = 0;
    for (int j = 0; j < J; ++j) {
      double d2 = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double d = p_gen.at(t, 3 * j + c) - p_gt.at(t, 3 * j + c);
        d2 += d * d;
      }
      if (std::sqrt(d2) < delta) ++recalled;
    }
    acc += (frame_weights[t] / wsum) * static_cast<double>(recalled) / J;
  }
  return acc;
}

std::vector<double> detect_audio_beats(const audio::Waveform& w, const OnsetOptions& opts) {
  if (w.samples.empty()) throw InvalidInput("detect_audio_beats: empty waveform");
  const int win = static_cast<int>(std::lround(opts.frame_window_ms * w.sample_rate_hz / 1000.0));
  const int hop = static_cast<int>(std::lround(opts.frame_shift_ms * w.sample_rate_hz / 1000.0));
  int nfft = 1;
  while (nfft < win) nfft <<= 1;
  if (static_cast<int>(w.samples.size()) < win) return {};
  const Tensor power = audio::stft_power(w, win, hop, nfft);
  const int T = power.rows(), K = power.cols();
  if (T < 3) return {};

  std::vector<double> flux(T, 0.0);
  for (int t = 1; t < T; ++t) {
    double f = 0.0;
    for (int k = 0; k < K; ++k) {
      const double d = std::sqrt(power.at(t, k)) - std::sqrt(power.at(t - 1, k));
      if (d > 0.0) f += d;
    }
    flux[t] = f;
  }
  double mean = 0.0;
  for (double f : flux) mean += f / T;
  double var = 0.0;
  for (double f : flux) var += (f - mean) * (f - mean) / T;
  const double thr = mean + opts.threshold_sigma * std::sqrt(var);

  std::vector<double> beats;
  const double hop_s = static_cast<double>(hop) / w.sample_rate_hz;
  for (int t = 1; t + 1 < T; ++t) {
    if (flux[t] > thr && flux[t] >= flux[t - 1] && flux[t] > flux[t + 1]) {
      const double time = t * hop_s;
      if (beats.empty() || time - beats.back() >= opts.min_gap_s) beats.push_back(time);
    }
  }
  return beats;
}

}  // namespace eval
}  // namespace emogest
