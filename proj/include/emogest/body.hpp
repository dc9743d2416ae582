// emogest/body.hpp

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

#include <array>
#include <string>
#include <vector>

#include "emogest/autodiff.hpp"
#include "emogest/tensor.hpp"

namespace emogest {
namespace body {

// Upper-body joint count: the 55-joint expressive skeleton minus the 8
// lower-body joints (hips, knees, ankles, feet).
constexpr int kNumJoints = 47;
constexpr int kPoseDim = 6 * kNumJoints;

using Rot6d = std::array<double, 6>;

// Gram-Schmidt construction: x = a/|a|, y = normalized rejection of b from x,
// z = x cross y, columns [x y z]. Throws on zero or parallel input triples.
Tensor rot6d_to_matrix(const Rot6d& r);
// Norms regularized by eps; for use inside training where decoder outputs
// may pass near the degenerate set.
Tensor rot6d_to_matrix_safe(const Rot6d& r, double eps = 1e-8);
// Canonical inverse: first two columns. Input must be a rotation matrix.
Rot6d matrix_to_rot6d(const Tensor& R);

constexpr Rot6d kIdentityRot6d = {1.0, 0.0, 0.0, 0.0, 1.0, 0.0};

struct PoseSequence {
  Tensor frames;  // T x 6J, per frame one 6d block per joint
  double fps = 30.0;

  int n_frames() const { return frames.rows(); }
  int n_joints() const { return frames.cols() / 6; }
};

PoseSequence identity_pose(int frames, int joints = kNumJoints, double fps = 30.0);

// Kinematic skeleton with linear-blend-skinned vertices. The skinning
// function is differentiable w.r.t. the pose; outputs are root-centered.
struct BodyModel {
  std::vector<std::string> joint_names;
  std::vector<int> parents;  // -1 for root; parents precede children
  Tensor rest_joints;        // J x 3
  Tensor rest_vertices;      // V x 3
  Tensor weights;            // V x J, rows sum to 1

  int n_joints() const { return static_cast<int>(parents.size()); }
  int n_vertices() const { return rest_vertices.rows(); }
  int joint_index(const std::string& name) const;
  void validate() const;
};

// Procedural 47-joint upper-body skeleton with ~550 vertices ringed around
// the bones and inverse-square distance blend weights over the two nearest
// joints. Fully deterministic.
BodyModel make_stub_body();
// Minimal chain along +x with one rigidly bound vertex per joint; used for
// hand-checkable forward kinematics.
BodyModel make_chain_stub(int n_joints, double bone_length = 1.0);
// Asset-backed path: JSON file with joint_names, parents, rest_joints,
// rest_vertices, weights.
BodyModel load_body_model(const std::string& json_path);

// Root-centered world joint positions, T x (J*3). No gradient path.
Tensor joint_positions(const PoseSequence& m, const BodyModel& body);
// Root-centered skinned vertices, T x (V*3). No gradient path.
Tensor pose_to_vertices_values(const PoseSequence& m, const BodyModel& body);
// Differentiable skinning: custom node with an analytic reverse pass through
// skinning, forward kinematics, and the 6d orthonormalization. `body` must
// outlive any backward pass through the result.
ad::Var pose_to_vertices(const ad::Var& pose, const BodyModel& body);

// Motion directory format: meta.json {fps, frames, joints, layout} plus
// frames.f32 (little-endian float32, row-major T x 6J).
void save_motion(const std::string& dir, const PoseSequence& m);
PoseSequence load_motion(const std::string& dir);

}  // namespace body
}  // namespace emogest
