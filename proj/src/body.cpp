// src/body.cpp

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

#include "emogest/body.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "emogest/errors.hpp"

namespace emogest {
namespace body {

namespace {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<double, 9>;  // row-major

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

Mat3 mat_mul(const Mat3& A, const Mat3& B) {
  Mat3 C{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += A[3 * r + k] * B[3 * k + c];
      C[3 * r + c] = s;
    }
  return C;
}

Mat3 mat_mul_abt(const Mat3& A, const Mat3& B) {  // A * B^T
  Mat3 C{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += A[3 * r + k] * B[3 * c + k];
      C[3 * r + c] = s;
    }
  return C;
}

Mat3 mat_mul_atb(const Mat3& A, const Mat3& B) {  // A^T * B
  Mat3 C{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += A[3 * k + r] * B[3 * k + c];
      C[3 * r + c] = s;
    }
  return C;
}

Vec3 mat_vec(const Mat3& A, const Vec3& v) {
  return {A[0] * v[0] + A[1] * v[1] + A[2] * v[2], A[3] * v[0] + A[4] * v[1] + A[5] * v[2],
          A[6] * v[0] + A[7] * v[1] + A[8] * v[2]};
}

struct GsCache {
  Vec3 a, b, x, t, y, z;
  double u, na, v, nt, d;
};

// Columns of R are (x, y, z).
Mat3 gs_forward(const double* r6, bool strict, double eps, GsCache* cache) {
  const Vec3 a = {r6[0], r6[1], r6[2]};
  const Vec3 b = {r6[3], r6[4], r6[5]};
  const double u = norm(a);
  if (strict && u < 1e-12) throw InvalidInput("rot6d_to_matrix: first triple is singular");
  const double na = u + eps;
  const Vec3 x = {a[0] / na, a[1] / na, a[2] / na};
  const double d = dot(x, b);
  const Vec3 t = {b[0] - d * x[0], b[1] - d * x[1], b[2] - d * x[2]};
  const double v = norm(t);
  if (strict && v < 1e-12)
    throw InvalidInput("rot6d_to_matrix: second triple is parallel to the first");
  const double nt = v + eps;
  const Vec3 y = {t[0] / nt, t[1] / nt, t[2] / nt};
  const Vec3 z = cross(x, y);
  if (cache) *cache = {a, b, x, t, y, z, u, na, v, nt, d};
  return Mat3{x[0], y[0], z[0], x[1], y[1], z[1], x[2], y[2], z[2]};
}

// Reverse pass given column gradients of R; writes the 6 pose gradients.
void gs_backward(const GsCache& c, const Mat3& gR, double* g6) {
  Vec3 gx = {gR[0], gR[3], gR[6]};
  Vec3 gy = {gR[1], gR[4], gR[7]};
  const Vec3 gz = {gR[2], gR[5], gR[8]};
  // z = x cross y
  const Vec3 y_gz = cross(c.y, gz);
  const Vec3 gz_x = cross(gz, c.x);
  for (int i = 0; i < 3; ++i) {
    gx[i] += y_gz[i];
    gy[i] += gz_x[i];
  }
  // y = t / (|t| + eps)
  const double tn = std::max(c.v, 1e-30);
  const double t_gy = dot(c.t, gy);
  Vec3 gt;
  for (int i = 0; i < 3; ++i) gt[i] = gy[i] / c.nt - (c.t[i] / tn) * t_gy / (c.nt * c.nt);
  // t = b - d x
  Vec3 gb = gt;
  double gd = -dot(c.x, gt);
  for (int i = 0; i < 3; ++i) gx[i] -= c.d * gt[i];
  // d = x . b
  for (int i = 0; i < 3; ++i) {
    gx[i] += gd * c.b[i];
    gb[i] += gd * c.x[i];
  }
  // x = a / (|a| + eps)
  const double an = std::max(c.u, 1e-30);
  const double a_gx = dot(c.a, gx);
  for (int i = 0; i < 3; ++i)
    g6[i] += gx[i] / c.na - (c.a[i] / an) * a_gx / (c.na * c.na);
  for (int i = 0; i < 3; ++i) g6[3 + i] += gb[i];
}

struct FrameFk {
  std::vector<GsCache> gs;
  std::vector<Mat3> rot_local;
  std::vector<Mat3> rot_world;
  std::vector<Vec3> joints_world;
};

void fk_forward(const double* pose_row, const BodyModel& body, bool strict, double eps,
                FrameFk& fk) {
  const int J = body.n_joints();
  fk.gs.resize(J);
  fk.rot_local.resize(J);
  fk.rot_world.resize(J);
  fk.joints_world.resize(J);
  for (int j = 0; j < J; ++j) {
    fk.rot_local[j] = gs_forward(pose_row + 6 * j, strict, eps, &fk.gs[j]);
    const int p = body.parents[j];
    if (p < 0) {
      fk.rot_world[j] = fk.rot_local[j];
      fk.joints_world[j] = {body.rest_joints.at(j, 0), body.rest_joints.at(j, 1),
                            body.rest_joints.at(j, 2)};
    } else {
      fk.rot_world[j] = mat_mul(fk.rot_world[p], fk.rot_local[j]);
      const Vec3 offset = {body.rest_joints.at(j, 0) - body.rest_joints.at(p, 0),
                           body.rest_joints.at(j, 1) - body.rest_joints.at(p, 1),
                           body.rest_joints.at(j, 2) - body.rest_joints.at(p, 2)};
      const Vec3 moved = mat_vec(fk.rot_world[p], offset);
      for (int i = 0; i < 3; ++i)
        fk.joints_world[j][i] = fk.joints_world[p][i] + moved[i];
    }
  }
}

void skin_forward(const FrameFk& fk, const BodyModel& body, double* verts_out) {
  const int V = body.n_vertices();
  const int J = body.n_joints();
  const Vec3 root = fk.joints_world[0];
  for (int i = 0; i < V; ++i) {
    Vec3 acc = {0.0, 0.0, 0.0};
    for (int j = 0; j < J; ++j) {
      const double w = body.weights.at(i, j);
      if (w == 0.0) continue;
      const Vec3 rel = {body.rest_vertices.at(i, 0) - body.rest_joints.at(j, 0),
                        body.rest_vertices.at(i, 1) - body.rest_joints.at(j, 1),
                        body.rest_vertices.at(i, 2) - body.rest_joints.at(j, 2)};
      const Vec3 moved = mat_vec(fk.rot_world[j], rel);
      for (int k = 0; k < 3; ++k) acc[k] += w * (moved[k] + fk.joints_world[j][k]);
    }
    for (int k = 0; k < 3; ++k) verts_out[3 * i + k] = acc[k] - root[k];
  }
}

// Reverse pass through skinning and the kinematic chain; recomputes the
// forward intermediates from the pose row.
void frame_backward(const double* pose_row, const BodyModel& body, double eps,
                    const double* g_verts, double* g_pose_row) {
  FrameFk fk;
  fk_forward(pose_row, body, /*strict=*/false, eps, fk);
  const int V = body.n_vertices();
  const int J = body.n_joints();
  std::vector<Mat3> gRw(J, Mat3{});
  std::vector<Vec3> gjw(J, Vec3{});

  for (int i = 0; i < V; ++i) {
    const double* gv = g_verts + 3 * i;
    for (int j = 0; j < J; ++j) {
      const double w = body.weights.at(i, j);
      if (w == 0.0) continue;
      const Vec3 rel = {body.rest_vertices.at(i, 0) - body.rest_joints.at(j, 0),
                        body.rest_vertices.at(i, 1) - body.rest_joints.at(j, 1),
                        body.rest_vertices.at(i, 2) - body.rest_joints.at(j, 2)};
      for (int r = 0; r < 3; ++r) {
        gjw[j][r] += w * gv[r];
        for (int c = 0; c < 3; ++c) gRw[j][3 * r + c] += w * gv[r] * rel[c];
      }
    }
    for (int r = 0; r < 3; ++r) gjw[0][r] -= gv[r];  // root centering
  }

  for (int j = J - 1; j >= 1; --j) {
    const int p = body.parents[j];
    const Mat3 gRw_j = gRw[j];
    const Mat3 add_p = mat_mul_abt(gRw_j, fk.rot_local[j]);
    const Mat3 gRl_j = mat_mul_atb(fk.rot_world[p], gRw_j);
    for (int k = 0; k < 9; ++k) gRw[p][k] += add_p[k];
    const Vec3 offset = {body.rest_joints.at(j, 0) - body.rest_joints.at(p, 0),
                         body.rest_joints.at(j, 1) - body.rest_joints.at(p, 1),
                         body.rest_joints.at(j, 2) - body.rest_joints.at(p, 2)};
    for (int r = 0; r < 3; ++r) {
      gjw[p][r] += gjw[j][r];
      for (int c = 0; c < 3; ++c) gRw[p][3 * r + c] += gjw[j][r] * offset[c];
    }
    gs_backward(fk.gs[j], gRl_j, g_pose_row + 6 * j);
  }
  gs_backward(fk.gs[0], gRw[0], g_pose_row);
}

}  // namespace

Tensor rot6d_to_matrix(const Rot6d& r) {
  const Mat3 m = gs_forward(r.data(), /*strict=*/true, 0.0, nullptr);
  Tensor R(3, 3);
  for (int i = 0; i < 9; ++i) R[i] = m[i];
  return R;
}

Tensor rot6d_to_matrix_safe(const Rot6d& r, double eps) {
  const Mat3 m = gs_forward(r.data(), /*strict=*/false, eps, nullptr);
  Tensor R(3, 3);
  for (int i = 0; i < 9; ++i) R[i] = m[i];
  return R;
}

Rot6d matrix_to_rot6d(const Tensor& R) {
  if (R.rows() != 3 || R.cols() != 3) throw InvalidInput("matrix_to_rot6d: expected 3x3");
  const Tensor gram = matmul_tn(R, R);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      if (std::fabs(gram.at(r, c) - (r == c ? 1.0 : 0.0)) > 1e-6)
        throw InvalidInput("matrix_to_rot6d: input is not orthonormal");
  const double det = R.at(0, 0) * (R.at(1, 1) * R.at(2, 2) - R.at(1, 2) * R.at(2, 1)) -
                     R.at(0, 1) * (R.at(1, 0) * R.at(2, 2) - R.at(1, 2) * R.at(2, 0)) +
                     R.at(0, 2) * (R.at(1, 0) * R.at(2, 1) - R.at(1, 1) * R.at(2, 0));
  if (std::fabs(det - 1.0) > 1e-6)
    throw InvalidInput("matrix_to_rot6d: determinant is not +1");
  return {R.at(0, 0), R.at(1, 0), R.at(2, 0), R.at(0, 1), R.at(1, 1), R.at(2, 1)};
}

PoseSequence identity_pose(int frames, int joints, double fps) {
  PoseSequence m;
  m.fps = fps;
  m.frames = Tensor(frames, 6 * joints);
  for (int t = 0; t < frames; ++t)
    for (int j = 0; j < joints; ++j)
      for (int k = 0; k < 6; ++k) m.frames.at(t, 6 * j + k) = kIdentityRot6d[k];
  return m;
}

int BodyModel::joint_index(const std::string& name) const {
  for (std::size_t i = 0; i < joint_names.size(); ++i)
    if (joint_names[i] == name) return static_cast<int>(i);
  return -1;
}

void BodyModel::validate() const {
  const int J = n_joints();
  if (J <= 0) throw ConfigError("BodyModel: no joints");
  if (rest_joints.rows() != J || static_cast<int>(joint_names.size()) != J)
    throw ConfigError("BodyModel: joint table size mismatch");
  if (parents[0] != -1) throw ConfigError("BodyModel: joint 0 must be the root");
  for (int j = 1; j < J; ++j)
    if (parents[j] < 0 || parents[j] >= j)
      throw ConfigError("BodyModel: parents must precede children");
  if (weights.rows() != n_vertices() || weights.cols() != J)
    throw ConfigError("BodyModel: weight matrix shape mismatch");
  for (int i = 0; i < weights.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < J; ++j) s += weights.at(i, j);
    if (std::fabs(s - 1.0) > 1e-9)
      throw ConfigError("BodyModel: blend weights must sum to 1 per vertex");
  }
}

BodyModel make_stub_body() {
  BodyModel b;
  auto add = [&](const std::string& name, int parent, double dx, double dy, double dz) {
    b.joint_names.push_back(name);
    b.parents.push_back(parent);
    const int j = static_cast<int>(b.parents.size()) - 1;
    Tensor rj(static_cast<int>(b.parents.size()), 3);
    for (int i = 0; i + 1 < rj.rows(); ++i)
      for (int c = 0; c < 3; ++c) rj.at(i, c) = b.rest_joints.at(i, c);
    const double px = parent >= 0 ? b.rest_joints.at(parent, 0) : 0.0;
    const double py = parent >= 0 ? b.rest_joints.at(parent, 1) : 0.0;
    const double pz = parent >= 0 ? b.rest_joints.at(parent, 2) : 0.0;
    rj.at(j, 0) = px + dx;
    rj.at(j, 1) = py + dy;
    rj.at(j, 2) = pz + dz;
    b.rest_joints = std::move(rj);
    return j;
  };

  const int root = add("root", -1, 0.0, 0.0, 0.0);
  const int spine1 = add("spine1", root, 0.0, 0.12, 0.0);
  const int spine2 = add("spine2", spine1, 0.0, 0.12, 0.0);
  const int spine3 = add("spine3", spine2, 0.0, 0.12, 0.0);
  const int neck = add("neck", spine3, 0.0, 0.10, 0.0);
  const int head = add("head", neck, 0.0, 0.10, 0.0);
  add("jaw", head, 0.0, -0.03, 0.06);
  add("left_eye", head, 0.035, 0.03, 0.08);
  add("right_eye", head, -0.035, 0.03, 0.08);

  const char* side_names[2] = {"left", "right"};
  for (int s = 0; s < 2; ++s) {
    const double sign = s == 0 ? 1.0 : -1.0;
    const std::string side = side_names[s];
    const int collar = add(side + "_collar", spine3, sign * 0.06, 0.06, 0.0);
    const int shoulder = add(side + "_shoulder", collar, sign * 0.12, 0.0, 0.0);
    const int elbow = add(side + "_elbow", shoulder, sign * 0.26, 0.0, 0.0);
    const int wrist = add(side + "_wrist", elbow, sign * 0.25, 0.0, 0.0);
    const char* fingers[5] = {"thumb", "index", "middle", "ring", "pinky"};
    for (int f = 0; f < 5; ++f) {
      const double z = 0.05 - 0.025 * f;
      const double reach = f == 0 ? 0.05 : 0.09;
      int parent = wrist;
      for (int seg = 1; seg <= 3; ++seg) {
        const double dx = seg == 1 ? sign * reach : sign * 0.03;
        parent = add(side + "_" + fingers[f] + std::to_string(seg), parent, dx, 0.0,
                     seg == 1 ? z : 0.0);
      }
    }
  }
  if (b.n_joints() != kNumJoints) throw ConfigError("make_stub_body: joint count drifted");

  // Vertex rings along every bone.
  std::vector<std::array<double, 3>> verts;
  for (int j = 1; j < b.n_joints(); ++j) {
    const int p = b.parents[j];
    const Vec3 a = {b.rest_joints.at(p, 0), b.rest_joints.at(p, 1), b.rest_joints.at(p, 2)};
    const Vec3 c = {b.rest_joints.at(j, 0), b.rest_joints.at(j, 1), b.rest_joints.at(j, 2)};
    Vec3 dir = {c[0] - a[0], c[1] - a[1], c[2] - a[2]};
    const double len = std::max(norm(dir), 1e-9);
    for (int k = 0; k < 3; ++k) dir[k] /= len;
    Vec3 ref = std::fabs(dir[2]) < 0.9 ? Vec3{0.0, 0.0, 1.0} : Vec3{1.0, 0.0, 0.0};
    Vec3 u = cross(dir, ref);
    const double un = std::max(norm(u), 1e-9);
    for (int k = 0; k < 3; ++k) u[k] /= un;
    const Vec3 v = cross(dir, u);
    const double radius = 0.02;
    for (int ring = 0; ring < 3; ++ring) {
      const double s = (ring + 1) / 4.0;
      const Vec3 center = {a[0] + s * (c[0] - a[0]), a[1] + s * (c[1] - a[1]),
                           a[2] + s * (c[2] - a[2])};
      for (int k = 0; k < 4; ++k) {
        const double ang = 2.0 * 3.14159265358979323846 * k / 4.0;
        verts.push_back({center[0] + radius * (std::cos(ang) * u[0] + std::sin(ang) * v[0]),
                         center[1] + radius * (std::cos(ang) * u[1] + std::sin(ang) * v[1]),
                         center[2] + radius * (std::cos(ang) * u[2] + std::sin(ang) * v[2])});
      }
    }
  }
  const int V = static_cast<int>(verts.size());
  b.rest_vertices = Tensor(V, 3);
  for (int i = 0; i < V; ++i)
    for (int c = 0; c < 3; ++c) b.rest_vertices.at(i, c) = verts[i][c];

  // Inverse-square distance weights over the two nearest joints.
  b.weights = Tensor(V, b.n_joints(), 0.0);
  for (int i = 0; i < V; ++i) {
    int best = 0, second = 1;
    double d_best = 1e300, d_second = 1e300;
    for (int j = 0; j < b.n_joints(); ++j) {
      const double dx = verts[i][0] - b.rest_joints.at(j, 0);
      const double dy = verts[i][1] - b.rest_joints.at(j, 1);
      const double dz = verts[i][2] - b.rest_joints.at(j, 2);
      const double d2 = dx * dx + dy * dy + dz * dz;
      if (d2 < d_best) {
        second = best;
        d_second = d_best;
        best = j;
        d_best = d2;
      } else if (d2 < d_second) {
        second = j;
        d_second = d2;
      }
    }
    const double w1 = 1.0 / (d_best + 1e-6);
    const double w2 = 1.0 / (d_second + 1e-6);
    b.weights.at(i, best) = w1 / (w1 + w2);
    b.weights.at(i, second) = w2 / (w1 + w2);
  }
  b.validate();
  return b;
}

BodyModel make_chain_stub(int n_joints, double bone_length) {
  if (n_joints < 1) throw ConfigError("make_chain_stub: need at least one joint");
  BodyModel b;
  b.rest_joints = Tensor(n_joints, 3, 0.0);
  for (int j = 0; j < n_joints; ++j) {
    b.joint_names.push_back("chain" + std::to_string(j));
    b.parents.push_back(j - 1);
    b.rest_joints.at(j, 0) = bone_length * j;
  }
  // One vertex rigidly bound to each joint, offset in +y.
  b.rest_vertices = Tensor(n_joints, 3, 0.0);
  b.weights = Tensor(n_joints, n_joints, 0.0);
  for (int j = 0; j < n_joints; ++j) {
    b.rest_vertices.at(j, 0) = bone_length * j;
    b.rest_vertices.at(j, 1) = 0.5 * bone_length;
    b.weights.at(j, j) = 1.0;
  }
  b.validate();
  return b;
}

BodyModel load_body_model(const std::string& json_path) {
  std::ifstream f(json_path);
  if (!f) throw ConfigError("load_body_model: cannot open " + json_path);
  nlohmann::json j = nlohmann::json::parse(f);
  BodyModel b;
  b.joint_names = j.at("joint_names").get<std::vector<std::string>>();
  b.parents = j.at("parents").get<std::vector<int>>();
  const auto read_mat = [&](const char* key) {
    const auto& rows = j.at(key);
    Tensor t(static_cast<int>(rows.size()),
             rows.empty() ? 0 : static_cast<int>(rows[0].size()));
    for (int r = 0; r < t.rows(); ++r)
      for (int c = 0; c < t.cols(); ++c) t.at(r, c) = rows[r][c].get<double>();
    return t;
  };
  b.rest_joints = read_mat("rest_joints");
  b.rest_vertices = read_mat("rest_vertices");
  b.weights = read_mat("weights");
  b.validate();
  return b;
}

Tensor joint_positions(const PoseSequence& m, const BodyModel& body) {
  if (m.n_joints() != body.n_joints())
    throw InvalidInput("joint_positions: pose joint count does not match body");
  const int T = m.n_frames(), J = body.n_joints();
  Tensor out(T, 3 * J);
  FrameFk fk;
  for (int t = 0; t < T; ++t) {
    fk_forward(m.frames.data() + static_cast<std::size_t>(t) * m.frames.cols(), body,
               /*strict=*/true, 0.0, fk);
    const Vec3 root = fk.joints_world[0];
    for (int j = 0; j < J; ++j)
      for (int c = 0; c < 3; ++c) out.at(t, 3 * j + c) = fk.joints_world[j][c] - root[c];
  }
  return out;
}

Tensor pose_to_vertices_values(const PoseSequence& m, const BodyModel& body) {
  if (m.n_joints() != body.n_joints())
    throw InvalidInput("pose_to_vertices: pose joint count does not match body");
  const int T = m.n_frames(), V = body.n_vertices();
  Tensor out(T, 3 * V);
  FrameFk fk;
  for (int t = 0; t < T; ++t) {
    fk_forward(m.frames.data() + static_cast<std::size_t>(t) * m.frames.cols(), body,
               /*strict=*/true, 0.0, fk);
    skin_forward(fk, body, out.data() + static_cast<std::size_t>(t) * out.cols());
  }
  return out;
}

ad::Var pose_to_vertices(const ad::Var& pose, const BodyModel& body) {
  if (pose.cols() != 6 * body.n_joints())
    throw InvalidInput("pose_to_vertices: pose width does not match body joints");
  const int T = pose.rows(), V = body.n_vertices();
  Tensor out(T, 3 * V);
  FrameFk fk;
  for (int t = 0; t < T; ++t) {
    fk_forward(pose.value().data() + static_cast<std::size_t>(t) * pose.cols(), body,
               /*strict=*/false, 1e-8, fk);
    skin_forward(fk, body, out.data() + static_cast<std::size_t>(t) * out.cols());
  }
  auto parent = pose.node();
  const BodyModel* body_ptr = &body;
  auto node = std::make_shared<ad::Node>();
  node->value = std::move(out);
  node->is_leaf = false;
  node->parents = {parent};
  node->requires_grad = parent->requires_grad;
  if (node->requires_grad) {
    node->backward_fn = [parent, body_ptr](ad::Node& n) {
      Tensor& g_pose = parent->grad_ref();
      const int T = parent->value.rows();
      for (int t = 0; t < T; ++t) {
        frame_backward(parent->value.data() + static_cast<std::size_t>(t) * parent->value.cols(),
                       *body_ptr, 1e-8,
                       n.grad.data() + static_cast<std::size_t>(t) * n.grad.cols(),
                       g_pose.data() + static_cast<std::size_t>(t) * g_pose.cols());
      }
    };
  }
  return ad::Var::wrap(node);
}

void save_motion(const std::string& dir, const PoseSequence& m) {
  std::filesystem::create_directories(dir);
  nlohmann::json meta = {{"fps", m.fps},
                         {"frames", m.n_frames()},
                         {"joints", m.n_joints()},
                         {"layout", "rot6d"}};
  std::ofstream mf(dir + "/meta.json");
  if (!mf) throw InvalidInput("save_motion: cannot open " + dir + "/meta.json");
  mf << meta.dump(2) << "\n";
  std::ofstream df(dir + "/frames.f32", std::ios::binary);
  if (!df) throw InvalidInput("save_motion: cannot open " + dir + "/frames.f32");
  for (std::int64_t i = 0; i < m.frames.size(); ++i) {
    const float v = static_cast<float>(m.frames[static_cast<std::size_t>(i)]);
    df.write(reinterpret_cast<const char*>(&v), sizeof(v));
  }
}

PoseSequence load_motion(const std::string& dir) {
  std::ifstream mf(dir + "/meta.json");
  if (!mf) throw InvalidInput("load_motion: cannot open " + dir + "/meta.json");
  nlohmann::json meta = nlohmann::json::parse(mf);
  if (meta.at("layout").get<std::string>() != "rot6d")
    throw InvalidInput("load_motion: unsupported layout in " + dir);
  PoseSequence m;
  m.fps = meta.at("fps").get<double>();
  const int frames = meta.at("frames").get<int>();
  const int joints = meta.at("joints").get<int>();
  m.frames = Tensor(frames, 6 * joints);
  std::ifstream df(dir + "/frames.f32", std::ios::binary);
  if (!df) throw InvalidInput("load_motion: cannot open " + dir + "/frames.f32");
  for (std::int64_t i = 0; i < m.frames.size(); ++i) {
    float v = 0.0f;
    df.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!df) throw InvalidInput("load_motion: truncated frames.f32 in " + dir);
    m.frames[static_cast<std::size_t>(i)] = static_cast<double>(v);
  }
  return m;
}

}  // namespace body
}  // namespace emogest
