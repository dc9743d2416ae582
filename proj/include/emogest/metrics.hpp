// emogest/metrics.hpp

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

#include <vector>

#include "emogest/audio.hpp"
#include "emogest/body.hpp"
#include "emogest/tensor.hpp"

namespace emogest {
namespace eval {

// Cyclic Jacobi eigendecomposition for symmetric matrices.
// eigvals: 1 x n, eigvecs: columns are eigenvectors.
void jacobi_eigen_symmetric(const Tensor& a, Tensor& eigvals, Tensor& eigvecs);

// Frechet distance between Gaussian fits of two feature sets (rows are
// samples): |mu_a - mu_b|^2 + Tr(Sa + Sb - 2 (Sa Sb)^{1/2}). Covariances are
// unbiased and get eps added to the diagonal; the matrix square root goes
// through the eigendecomposition of the symmetrized product with eigenvalue
// clamping at zero.
double fgd(const Tensor& feats_a, const Tensor& feats_b, double eps = 1e-8);

// Mean pairwise Euclidean distance between feature rows.
double diversity(const Tensor& feats);
// Alternative reading of feature variance, behind a config switch.
double diversity_trace(const Tensor& feats);

// Top-1 percentage.
double emotion_accuracy(const Tensor& logits, const std::vector<int>& labels);

// The six joints whose summed speed defines kinematic beats.
extern const char* const kBeatJointNames[6];

// Velocity-valley beat times in seconds over the named joints, with a
// minimum inter-beat gap.
std::vector<double> detect_kinematic_beats(const body::PoseSequence& m,
                                           const body::BodyModel& bodymodel,
                                           double min_gap_s = 0.1);
// Same detector over an explicit joint subset.
std::vector<double> detect_kinematic_beats(const body::PoseSequence& m,
                                           const body::BodyModel& bodymodel,
                                           const std::vector<int>& joints,
                                           double min_gap_s = 0.1);

// Mean over kinematic beats of exp(-d^2 / (2 sigma^2)) to the nearest audio
// beat (unidirectional). Empty kinematic beats score 0 with a warning.
double beat_align(const std::vector<double>& kin_beats, const std::vector<double>& audio_beats,
                  double sigma = 0.1);

// Semantic-weighted probability of correct keypoints: per-frame weights are
// normalized to sum to 1 over the clip so identical sequences score exactly 1.
double srgr(const body::PoseSequence& gen, const body::PoseSequence& gt,
            const std::vector<double>& frame_weights, const body::BodyModel& bodymodel,
            double delta = 0.05);

struct OnsetOptions {
  double frame_window_ms = 25.0;
  double frame_shift_ms = 10.0;
  double threshold_sigma = 1.5;
  double min_gap_s = 0.05;
};

// Spectral-flux onset times in seconds; silence yields an empty list.
std::vector<double> detect_audio_beats(const audio::Waveform& w, const OnsetOptions& opts = {});

}  // namespace eval
}  // namespace emogest
