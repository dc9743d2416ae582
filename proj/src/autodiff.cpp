// src/autodiff.cpp

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

#include "emogest/autodiff.hpp"

#include <cmath>
#include <unordered_set>

#include "emogest/errors.hpp"

namespace emogest {
namespace ad {

namespace {

std::shared_ptr<Node> make_op(Tensor value, std::vector<std::shared_ptr<Node>> parents,
                              std::function<void(Node&)> backward_fn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->is_leaf = false;
  n->parents = std::move(parents);
  for (const auto& p : n->parents)
    if (p->requires_grad) n->requires_grad = true;
  if (n->requires_grad) n->backward_fn = std::move(backward_fn);
  return n;
}

void check_same_shape(const Var& a, const Var& b, const char* op) {
  if (!a.value().same_shape(b.value()))
    throw InvalidInput(std::string(op) + ": shape mismatch");
}

}  // namespace

Var::Var(Tensor value, bool requires_grad) : n_(std::make_shared<Node>()) {
  n_->value = std::move(value);
  n_->requires_grad = requires_grad;
}

Tensor Var::grad() const {
  if (!n_ || n_->grad.empty()) {
    return n_ ? Tensor::zeros(n_->value.rows(), n_->value.cols()) : Tensor();
  }
  return n_->grad;
}

Var Var::detach() const {
  Var v;
  v.n_ = std::make_shared<Node>();
  v.n_->value = n_->value;
  v.n_->requires_grad = false;
  return v;
}

Var Var::wrap(std::shared_ptr<Node> n) {
  Var v;
  v.n_ = std::move(n);
  return v;
}

Var constant(Tensor value) { return Var(std::move(value), false); }

void backward(const Var& root) {
  if (!root.defined()) throw InvalidInput("backward: undefined root");
  if (root.value().size() != 1) throw InvalidInput("backward: root must be scalar");
  if (!root.requires_grad()) return;

  // Post-order DFS to get a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  struct Frame {
    Node* node;
    std::size_t next_parent;
  };
  std::vector<Frame> stack;
  stack.push_back({root.node().get(), 0});
  visited.insert(root.node().get());
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_parent < f.node->parents.size()) {
      Node* p = f.node->parents[f.next_parent++].get();
      if (p->requires_grad && !visited.count(p)) {
        visited.insert(p);
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(f.node);
      stack.pop_back();
    }
  }

  root.node()->grad_ref().at(0, 0) += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && !n->grad.empty()) n->backward_fn(*n);
  }
}

Var add(const Var& a, const Var& b) {
  check_same_shape(a, b, "add");
  auto pa = a.node(), pb = b.node();
  return Var::wrap(make_op(a.value() + b.value(), {pa, pb}, [pa, pb](Node& n) {
    if (pa->requires_grad) pa->grad_ref().add_scaled(n.grad, 1.0);
    if (pb->requires_grad) pb->grad_ref().add_scaled(n.grad, 1.0);
  }));
}

Var sub(const Var& a, const Var& b) {
  check_same_shape(a, b, "sub");
  auto pa = a.node(), pb = b.node();
  return Var::wrap(make_op(a.value() - b.value(), {pa, pb}, [pa, pb](Node& n) {
    if (pa->requires_grad) pa->grad_ref().add_scaled(n.grad, 1.0);
    if (pb->requires_grad) pb->grad_ref().add_scaled(n.grad, -1.0);
  }));
}

Var mul(const Var& a, const Var& b) {
  check_same_shape(a, b, "mul");
  auto pa = a.node(), pb = b.node();
  return Var::wrap(make_op(hadamard(a.value(), b.value()), {pa, pb}, [pa, pb](Node& n) {
    if (pa->requires_grad) pa->grad_ref().add_scaled(hadamard(n.grad, pb->value), 1.0);
    if (pb->requires_grad) pb->grad_ref().add_scaled(hadamard(n.grad, pa->value), 1.0);
  }));
}

Var scale(const Var& a, double s) {
  auto pa = a.node();
  return Var::wrap(make_op(a.value() * s, {pa}, [pa, s](Node& n) {
    if (pa->requires_grad) pa->grad_ref().add_scaled(n.grad, s);
  }));
}

Var add_rowvec(const Var& a, const Var& row) {
  if (row.rows() != 1 || row.cols() != a.cols())
    throw InvalidInput("add_rowvec: row must be 1 x cols(a)");
  Tensor out = a.value();
  for (int r = 0; r < out.rows(); ++r)
    for (int c = 0; c < out.cols(); ++c) out.at(r, c) += row.value().at(0, c);
  auto pa = a.node(), pr = row.node();
  return Var::wrap(make_op(std::move(out), {pa, pr}, [pa, pr](Node& n) {
    if (pa->requires_grad) pa->grad_ref().add_scaled(n.grad, 1.0);
    if (pr->requires_grad) {
      Tensor& g = pr->grad_ref();
      for (int r = 0; r < n.grad.rows(); ++r)
        for (int c = 0; c < n.grad.cols(); ++c) g.at(0, c) += n.grad.at(r, c);
    }
  }));
}

Var exp_(const Var& a) {
  Tensor out = a.value();
  for (std::int64_t i = 0; i < out.size(); ++i)
    out[static_cast<std::size_t>(i)] = std::exp(out[static_cast<std::size_t>(i)]);
  auto pa = a.node();
  Tensor cached = out;
  return Var::wrap(make_op(std::move(out), {pa}, [pa, cached](Node& n) {
    if (pa->requires_grad) pa->grad_ref().add_scaled(hadamard(n.grad, cached), 1.0);
  }));
}

Var log_(const Var& a) {
  Tensor out = a.value();
  for (std::int64_t i = 0; i < out.size(); ++i)
    out[static_cast<std::size_t>(i)] = std::log(out[static_cast<std::size_t>(i)]);
  auto pa = a.node();
  return Var::wrap(make_op(std::move(out), {pa}, [pa](Node& n) {
    if (!pa->requires_grad) return;
    Tensor& g = pa->grad_ref();
    for (std::int64_t i = 0; i < n.grad.size(); ++i) {
      auto k = static_cast<std::size_t>(i);
      g[k] += n.grad[k] / pa->value[k];
    }
  }));
}

Var abs_(const Var& a) {
  Tensor out = a.value();
  for (std::int64_t i = 0; i < out.size(); ++i)
    out[static_cast<std::size_t>(i)] = std::fabs(out[static_cast<std::size_t>(i)]);
  auto pa = a.node();
  return Var::wrap(make_op(std::move(out), {pa}, [pa](Node& n) {
    if (!pa->requires_grad) return;
    Tensor& g = pa->grad_ref();
    for (std::int64_t i = 0; i < n.grad.size(); ++i) {
      auto k = static_cast<std::size_t>(i);
      const double v = pa->value[k];
      g[k] += n.grad[k] * (v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0));
    }
  }));
}

Var gelu(const Var& a) {
  // Exact erf form; derivative 0.5(1+erf(x/sqrt2)) + x * phi(x)
  const double inv_sqrt2 = 0.70710678118654752440;
  const double inv_sqrt2pi = 0.39894228040143267794;
  Tensor out = a.value();
  for (std::int64_t i = 0; i < out.size(); ++i) {
    auto k = static_cast<std::size_t>(i);
    const double x = out[k];
    out[k] = 0.5 * x * (1.0 + std::erf(x * inv_sqrt2));
  }
  auto pa = a.node();
  return Var::wrap(make_op(std::move(out), {pa}, [pa, inv_sqrt2, inv_sqrt2pi](Node& n) {
    if (!pa->requires_grad) return;
    Tensor& g = pa->grad_ref();
    for (std::int64_t i = 0; i < n.grad.size(); ++i) {
      auto k = static_cast<std::size_t>(i);
      const double x = pa->value[k];
      const double d = 0.5 * (1.0 + std::erf(x * inv_sqrt2)) +
                       x * inv_sqrt2pi * std::exp(-0.5 * x * x);
      g[k] += n.grad[k] * d;
    }
  }));
}

Var matmul(const Var& a, const Var& b) {
  auto pa = a.node(), pb = b.node();
  return Var::wrap(make_op(emogest::matmul(a.value(), b.value()), {pa, pb}, [pa, pb](Node& n) {
    if (pa->requires_grad) pa->grad_ref().add_scaled(emogest::matmul_nt(n.grad, pb->value), 1.0);
    if (pb->requires_grad) pb->grad_ref().add_scaled(emogest::matmul_tn(pa->value, n.grad), 1.0);
  }));
}

Var matmul_nt(const Var& a, const Var& b) {
  auto pa = a.node(), pb = b.node();
  return Var::wrap(make_op(emogest::matmul_nt(a.value(), b.value()), {pa, pb}, [pa, pb](Node& n) {
    // out = a b^T ; ga += g b ; gb += g^T a
    if (pa->requires_grad) pa->grad_ref().add_scaled(emogest::matmul(n.grad, pb->value), 1.0);
    if (pb->requires_grad) pb->grad_ref().add_scaled(emogest::matmul_tn(n.grad, pa->value), 1.0);
  }));
}

Var reshape(const Var& a, int rows, int cols) {
  auto pa = a.node();
  const int ar = a.rows(), ac = a.cols();
  return Var::wrap(make_op(a.value().reshaped(rows, cols), {pa}, [pa, ar, ac](Node& n) {
    if (pa->requires_grad) pa->grad_ref().add_scaled(n.grad.reshaped(ar, ac), 1.0);
  }));
}

Var slice_rows(const Var& a, int r0, int r1) {
  if (r0 < 0 || r1 > a.rows() || r0 >= r1) throw InvalidInput("slice_rows: bad range");
  Tensor out(r1 - r0, a.cols());
  for (int r = r0; r < r1; ++r)
    for (int c = 0; c < a.cols(); ++c) out.at(r - r0, c) = a.value().at(r, c);
  auto pa = a.node();
  return Var::wrap(make_op(std::move(out), {pa}, [pa, r0](Node& n) {
    if (!pa->requires_grad) return;
    Tensor& g = pa->grad_ref();
    for (int r = 0; r < n.grad.rows(); ++r)
      for (int c = 0; c < n.grad.cols(); ++c) g.at(r + r0, c) += n.grad.at(r, c);
  }));
}

Var slice_cols(const Var& a, int c0, int c1) {
  if (c0 < 0 || c1 > a.cols() || c0 >= c1) throw InvalidInput("slice_cols: bad range");
  Tensor out(a.rows(), c1 - c0);
  for (int r = 0; r < a.rows(); ++r)
    for (int c = c0; c < c1; ++c) out.at(r, c - c0) = a.value().at(r, c);
  auto pa = a.node();
  return Var::wrap(make_op(std::move(out), {pa}, [pa, c0](Node& n) {
    if (!pa->requires_grad) return;
    Tensor& g = pa->grad_ref();
    for (int r = 0; r < n.grad.rows(); ++r)
      for (int c = 0; c < n.grad.cols(); ++c) g.at(r, c + c0) += n.grad.at(r, c);
  }));
}

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw InvalidInput("concat_rows: empty");
  int rows = 0;
  const int cols = parts[0].cols();
  for (const auto& p : parts) {
    if (p.cols() != cols) throw InvalidInput("concat_rows: col mismatch");
    rows += p.rows();
  }
  Tensor out(rows, cols);
  std::vector<std::shared_ptr<Node>> parents;
  std::vector<int> offsets;
  int r = 0;
  for (const auto& p : parts) {
    offsets.push_back(r);
    for (int i = 0; i < p.rows(); ++i)
      for (int c = 0; c < cols; ++c) out.at(r + i, c) = p.value().at(i, c);
    r += p.rows();
    parents.push_back(p.node());
  }
  auto parents_copy = parents;
  return Var::wrap(make_op(std::move(out), std::move(parents),
                           [parents_copy, offsets](Node& n) {
    for (std::size_t k = 0; k < parents_copy.size(); ++k) {
      Node* p = parents_copy[k].get();
      if (!p->requires_grad) continue;
      Tensor& g = p->grad_ref();
      const int off = offsets[k];
      for (int i = 0; i < p->value.rows(); ++i)
        for (int c = 0; c < p->value.cols(); ++c) g.at(i, c) += n.grad.at(off + i, c);
    }
  }));
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw InvalidInput("concat_cols: empty");
  const int rows = parts[0].rows();
  int cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw InvalidInput("concat_cols: row mismatch");
    cols += p.cols();
  }
  Tensor out(rows, cols);
  std::vector<std::shared_ptr<Node>> parents;
  std::vector<int> offsets;
  int c0 = 0;
  for (const auto& p : parts) {
    offsets.push_back(c0);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < p.cols(); ++c) out.at(r, c0 + c) = p.value().at(r, c);
    c0 += p.cols();
    parents.push_back(p.node());
  }
  auto parents_copy = parents;
  return Var::wrap(make_op(std::move(out), std::move(parents),
                           [parents_copy, offsets](Node& n) {
    for (std::size_t k = 0; k < parents_copy.size(); ++k) {
      Node* p = parents_copy[k].get();
      if (!p->requires_grad) continue;
      Tensor& g = p->grad_ref();
      const int off = offsets[k];
      for (int r = 0; r < p->value.rows(); ++r)
        for (int c = 0; c < p->value.cols(); ++c) g.at(r, c) += n.grad.at(r, off + c);
    }
  }));
}

Var sum(const Var& a) {
  auto pa = a.node();
  Tensor out(1, 1);
  out.at(0, 0) = a.value().sum();
  return Var::wrap(make_op(std::move(out), {pa}, [pa](Node& n) {
    if (!pa->requires_grad) return;
    Tensor& g = pa->grad_ref();
    const double gv = n.grad.at(0, 0);
    for (std::int64_t i = 0; i < g.size(); ++i) g[static_cast<std::size_t>(i)] += gv;
  }));
}

Var mean(const Var& a) { return scale(sum(a), 1.0 / static_cast<double>(a.value().size())); }

Var softmax_rows(const Var& a) {
  Tensor out = a.value();
  for (int r = 0; r < out.rows(); ++r) {
    double m = -1e300;
    for (int c = 0; c < out.cols(); ++c) m = std::max(m, out.at(r, c));
    double s = 0.0;
    for (int c = 0; c < out.cols(); ++c) {
      out.at(r, c) = std::exp(out.at(r, c) - m);
      s += out.at(r, c);
    }
    for (int c = 0; c < out.cols(); ++c) out.at(r, c) /= s;
  }
  auto pa = a.node();
  Tensor y = out;
  return Var::wrap(make_op(std::move(out), {pa}, [pa, y](Node& n) {
    if (!pa->requires_grad) return;
    Tensor& g = pa->grad_ref();
    for (int r = 0; r < y.rows(); ++r) {
      double dot = 0.0;
      for (int c = 0; c < y.cols(); ++c) dot += n.grad.at(r, c) * y.at(r, c);
      for (int c = 0; c < y.cols(); ++c)
        g.at(r, c) += y.at(r, c) * (n.grad.at(r, c) - dot);
    }
  }));
}

Var layer_norm_rows(const Var& x, const Var& gamma, const Var& beta, double eps) {
  if (gamma.rows() != 1 || gamma.cols() != x.cols() || beta.rows() != 1 ||
      beta.cols() != x.cols())
    throw InvalidInput("layer_norm_rows: affine params must be 1 x cols");
  const int R = x.rows(), C = x.cols();
  Tensor xhat(R, C), inv_sigma(R, 1), out(R, C);
  for (int r = 0; r < R; ++r) {
    double mu = 0.0;
    for (int c = 0; c < C; ++c) mu += x.value().at(r, c);
    mu /= C;
    double var = 0.0;
    for (int c = 0; c < C; ++c) {
      const double d = x.value().at(r, c) - mu;
      var += d * d;
    }
    var /= C;
    const double is = 1.0 / std::sqrt(var + eps);
    inv_sigma.at(r, 0) = is;
    for (int c = 0; c < C; ++c) {
      xhat.at(r, c) = (x.value().at(r, c) - mu) * is;
      out.at(r, c) = xhat.at(r, c) * gamma.value().at(0, c) + beta.value().at(0, c);
    }
  }
  auto px = x.node();
  auto pg = gamma.node();
  auto pb = beta.node();
  return Var::wrap(make_op(std::move(out), {px, pg, pb},
                           [px, pg, pb, xhat, inv_sigma](Node& n) {
    const int R = xhat.rows(), C = xhat.cols();
    if (pg->requires_grad) {
      Tensor& gg = pg->grad_ref();
      for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c) gg.at(0, c) += n.grad.at(r, c) * xhat.at(r, c);
    }
    if (pb->requires_grad) {
      Tensor& gb = pb->grad_ref();
      for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c) gb.at(0, c) += n.grad.at(r, c);
    }
    if (px->requires_grad) {
      Tensor& gx = px->grad_ref();
      for (int r = 0; r < R; ++r) {
        double mean_gh = 0.0, mean_ghx = 0.0;
        for (int c = 0; c < C; ++c) {
          const double gh = n.grad.at(r, c) * pg->value.at(0, c);
          mean_gh += gh;
          mean_ghx += gh * xhat.at(r, c);
        }
        mean_gh /= C;
        mean_ghx /= C;
        const double is = inv_sigma.at(r, 0);
        for (int c = 0; c < C; ++c) {
          const double gh = n.grad.at(r, c) * pg->value.at(0, c);
          gx.at(r, c) += is * (gh - mean_gh - xhat.at(r, c) * mean_ghx);
        }
      }
    }
  }));
}

Var l1_loss(const Var& a, const Var& b) {
  check_same_shape(a, b, "l1_loss");
  const double inv_n = 1.0 / static_cast<double>(a.value().size());
  Tensor d = a.value() - b.value();
  Tensor out(1, 1);
  double s = 0.0;
  for (std::int64_t i = 0; i < d.size(); ++i) s += std::fabs(d[static_cast<std::size_t>(i)]);
  out.at(0, 0) = s * inv_n;
  auto pa = a.node(), pb = b.node();
  return Var::wrap(make_op(std::move(out), {pa, pb}, [pa, pb, d, inv_n](Node& n) {
    const double g = n.grad.at(0, 0) * inv_n;
    for (std::int64_t i = 0; i < d.size(); ++i) {
      auto k = static_cast<std::size_t>(i);
      const double sgn = d[k] > 0.0 ? 1.0 : (d[k] < 0.0 ? -1.0 : 0.0);
      if (pa->requires_grad) pa->grad_ref()[k] += g * sgn;
      if (pb->requires_grad) pb->grad_ref()[k] -= g * sgn;
    }
  }));
}

Var smooth_l1_loss(const Var& a, const Var& b) {
  check_same_shape(a, b, "smooth_l1_loss");
  const double inv_n = 1.0 / static_cast<double>(a.value().size());
  Tensor d = a.value() - b.value();
  double s = 0.0;
  for (std::int64_t i = 0; i < d.size(); ++i) {
    const double v = d[static_cast<std::size_t>(i)];
    s += std::fabs(v) < 1.0 ? 0.5 * v * v : std::fabs(v) - 0.5;
  }
  Tensor out(1, 1);
  out.at(0, 0) = s * inv_n;
  auto pa = a.node(), pb = b.node();
  return Var::wrap(make_op(std::move(out), {pa, pb}, [pa, pb, d, inv_n](Node& n) {
    const double g = n.grad.at(0, 0) * inv_n;
    for (std::int64_t i = 0; i < d.size(); ++i) {
      auto k = static_cast<std::size_t>(i);
      const double v = d[k];
      const double dv = std::fabs(v) < 1.0 ? v : (v > 0.0 ? 1.0 : -1.0);
      if (pa->requires_grad) pa->grad_ref()[k] += g * dv;
      if (pb->requires_grad) pb->grad_ref()[k] -= g * dv;
    }
  }));
}

Var squared_l2(const Var& a, const Var& b) {
  check_same_shape(a, b, "squared_l2");
  Tensor d = a.value() - b.value();
  double s = 0.0;
  for (std::int64_t i = 0; i < d.size(); ++i) {
    const double v = d[static_cast<std::size_t>(i)];
    s += v * v;
  }
  Tensor out(1, 1);
  out.at(0, 0) = s;
  auto pa = a.node(), pb = b.node();
  return Var::wrap(make_op(std::move(out), {pa, pb}, [pa, pb, d](Node& n) {
    const double g = n.grad.at(0, 0);
    for (std::int64_t i = 0; i < d.size(); ++i) {
      auto k = static_cast<std::size_t>(i);
      if (pa->requires_grad) pa->grad_ref()[k] += 2.0 * g * d[k];
      if (pb->requires_grad) pb->grad_ref()[k] -= 2.0 * g * d[k];
    }
  }));
}

Var cross_entropy_logits(const Var& logits, const std::vector<int>& labels) {
  const int N = logits.rows(), K = logits.cols();
  if (static_cast<int>(labels.size()) != N)
    throw InvalidInput("cross_entropy_logits: labels size mismatch");
  for (int lbl : labels)
    if (lbl < 0 || lbl >= K) throw InvalidInput("cross_entropy_logits: label out of range");
  Tensor probs(N, K);
  double loss = 0.0;
  for (int r = 0; r < N; ++r) {
    double m = -1e300;
    for (int c = 0; c < K; ++c) m = std::max(m, logits.value().at(r, c));
    double s = 0.0;
    for (int c = 0; c < K; ++c) {
      probs.at(r, c) = std::exp(logits.value().at(r, c) - m);
      s += probs.at(r, c);
    }
    for (int c = 0; c < K; ++c) probs.at(r, c) /= s;
    loss -= std::log(std::max(probs.at(r, labels[r]), 1e-300));
  }
  Tensor out(1, 1);
  out.at(0, 0) = loss / N;
  auto pl = logits.node();
  return Var::wrap(make_op(std::move(out), {pl}, [pl, probs, labels](Node& n) {
    if (!pl->requires_grad) return;
    const int N = probs.rows(), K = probs.cols();
    const double g = n.grad.at(0, 0) / N;
    Tensor& gl = pl->grad_ref();
    for (int r = 0; r < N; ++r)
      for (int c = 0; c < K; ++c)
        gl.at(r, c) += g * (probs.at(r, c) - (labels[r] == c ? 1.0 : 0.0));
  }));
}

}  // namespace ad
}  // namespace emogest
