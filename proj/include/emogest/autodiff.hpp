// emogest/autodiff.hpp

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

#include <functional>
#include <memory>
#include <vector>

#include "emogest/tensor.hpp"

namespace emogest {
namespace ad {

// Reverse-mode autodiff over Tensor values. Graphs are built dynamically;
// backward() walks the tape in reverse topological order. Leaves created
// with requires_grad=true accumulate gradients (model parameters); detach()
// cuts the tape, which is how stop-gradient is expressed.

struct Node {
  Tensor value;
  Tensor grad;  // empty until first accumulation
  bool requires_grad = false;
  bool is_leaf = true;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  Tensor& grad_ref() {
    if (grad.empty()) grad = Tensor::zeros(value.rows(), value.cols());
    return grad;
  }
};

class Var {
 public:
  Var() = default;
  explicit Var(Tensor value, bool requires_grad = false);

  bool defined() const { return static_cast<bool>(n_); }
  const Tensor& value() const { return n_->value; }
  Tensor& mutable_value() { return n_->value; }
  // Zeros if no gradient ever reached this node.
  Tensor grad() const;
  bool requires_grad() const { return n_ && n_->requires_grad; }
  int rows() const { return n_->value.rows(); }
  int cols() const { return n_->value.cols(); }

  Var detach() const;
  void zero_grad() { if (n_) n_->grad = Tensor(); }

  std::shared_ptr<Node> node() const { return n_; }
  static Var wrap(std::shared_ptr<Node> n);

 private:
  std::shared_ptr<Node> n_;
};

// Runs backprop from a 1x1 scalar root.
void backward(const Var& root);

Var constant(Tensor value);

// --- elementwise / broadcast ---
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var add_rowvec(const Var& a, const Var& row);  // row is 1 x cols
Var exp_(const Var& a);
Var log_(const Var& a);
Var abs_(const Var& a);
Var gelu(const Var& a);

// --- linear algebra ---
Var matmul(const Var& a, const Var& b);
Var matmul_nt(const Var& a, const Var& b);  // a * b^T

// --- shape ---
Var reshape(const Var& a, int rows, int cols);
Var slice_rows(const Var& a, int r0, int r1);
Var slice_cols(const Var& a, int c0, int c1);
Var concat_rows(const std::vector<Var>& parts);
Var concat_cols(const std::vector<Var>& parts);

// --- reductions / losses ---
Var sum(const Var& a);
Var mean(const Var& a);
Var softmax_rows(const Var& a);
Var layer_norm_rows(const Var& x, const Var& gamma, const Var& beta, double eps = 1e-5);
// mean |a - b| over elements
Var l1_loss(const Var& a, const Var& b);
// mean of 0.5 d^2 (|d|<1) else |d|-0.5
Var smooth_l1_loss(const Var& a, const Var& b);
// sum of squared differences
Var squared_l2(const Var& a, const Var& b);
// mean over rows of -log softmax(logits)[label]
Var cross_entropy_logits(const Var& logits, const std::vector<int>& labels);

}  // namespace ad
}  // namespace emogest
